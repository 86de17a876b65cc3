"""The down and up density transformations and their compositions.

The down transformation sends a strictly decreasing density f to
f(x(s))^alpha / |f'(x(s))| under the canonical variable change

    s(x) = f(x)^{2-alpha} / (alpha - 2)    (alpha != 2)
    s(x) = -ln f(x)                        (alpha = 2)

and the up transformation is its inverse,

    U(u) = |(alpha-2) x(u)|^{1/(2-alpha)}  with  u'(x) = -|(alpha-2)x|^{1/(alpha-2)} f(x)
    U(u) = e^{-x(u)}                       with  u'(x) = -e^x f(x)        (alpha = 2),

anchored at the upper support edge, falling back to the lower edge and then
to the median when the defining primitive diverges.  Both transforms are
evaluated numerically: each value costs one monotone inversion of the
variable change, warmed by a knot table built eagerly at construction.

Increasing densities are handled by reflecting x -> -x before transforming;
the transforms are gauge-fixed only up to translation (and the reflection
just described), so comparisons between transformed densities use
`gauge_align`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    EDGE_SLACK,
    Density,
    Support,
    integrate,
    invert_monotone,
    quantiles,
    reflect,
    rescale,
    translate,
)
from .errors import (
    DivergentIntegral,
    EdgeIllConditioned,
    InvalidEta,
    InvalidParams,
    MissingDerivative,
    MissingSecondDerivative,
    NotDecreasing,
    OutOfDomain,
)

__all__ = [
    "TransformedDensity",
    "TailReport",
    "AdmissibilityWitness",
    "down",
    "up",
    "down_support_length",
    "double_down_admissible",
    "compose_updown",
    "compose_downdown",
    "tail_classify_down",
    "tail_classify_up",
    "gauge_align",
]

_TABLE_N = 160
_U_CAP = 1e305  # cumulative weighted mass beyond which a side is treated as unbounded
_SEG_TOL = 1e-13


@dataclass(frozen=True, eq=False)
class TransformedDensity(Density):
    """A density produced by a down or up transform, evaluated lazily via
    monotone inversion of the canonical variable change."""

    source: Optional[Density] = None
    alpha: float = 0.0
    direction: str = ""
    anchor: str = ""


@dataclass(frozen=True)
class TailReport:
    regime: str  # algebraic | exponential | compact-support | no-finite-moments
    exponent: Optional[float] = None
    alpha_c: Optional[float] = None

    def __post_init__(self) -> None:
        if (self.exponent is not None) != (self.regime == "algebraic"):
            raise InvalidParams("exponent present iff regime is algebraic")


@dataclass(frozen=True)
class AdmissibilityWitness:
    admissible: bool
    observed_sup: float
    alpha: float
    margin: float = 1e-9

    def __bool__(self) -> bool:
        return self.admissible


# ---------------------------------------------------------------------------
# edge limits
# ---------------------------------------------------------------------------


def _edge_limit(f: Density, side: str) -> float:
    """One-sided limit of f at a support edge (may be 0 or +inf)."""
    lo, hi = f.support.lower, f.support.upper
    if side == "lower":
        edge, inward = lo, +1.0
    else:
        edge, inward = hi, -1.0
    if not math.isfinite(edge):
        # integrable densities vanish at infinite edges
        return 0.0
    scale = max(1.0, abs(edge))
    vals = []
    hs = []
    for k in range(8, 104, 8):
        h = scale * 2.0**-k
        x = edge + inward * h
        if x == edge:
            break
        try:
            v = float(f.value(x))
        except (EdgeIllConditioned, DivergentIntegral):
            break
        if not math.isfinite(v):
            return math.inf
        if v == 0.0 and len(vals) >= 2 and vals[-1] > vals[-2] > 0:
            # an increasing run that collapses to 0 hit a beyond-reach
            # sentinel of a transformed density: the limit is unbounded
            return math.inf
        vals.append(v)
        hs.append(h)
    if len(vals) < 3:
        return vals[-1] if vals else math.inf
    if vals[-1] > 1e12 and vals[-1] > 2.0 * vals[-2] > 0:
        return math.inf
    # a sequence still climbing materially at the innermost probes is a
    # slowly (logarithmically) divergent limit; algebraic h^c approaches
    # have contracted far below this threshold at these depths
    tail = vals[-3:]
    if all(b > a for a, b in zip(tail[:-1], tail[1:])):
        rel = (tail[-1] - tail[-2]) / max(abs(tail[-1]), 1e-300)
        if rel > 1e-5:
            return math.inf
    # Richardson step: the last two probes differ by O(h), extrapolate to h=0
    v1 = float(f.value(edge + inward * hs[-1] * 2.0))
    v2 = float(f.value(edge + inward * hs[-1]))
    if math.isfinite(v1) and math.isfinite(v2) and abs(2.0 * v2 - v1) < 1e13:
        ext = max(2.0 * v2 - v1, 0.0)
        if ext < 1e-6 * max(vals[-1], 1e-300):
            return 0.0  # the sequence is heading linearly to zero
        return ext
    return vals[-1]


# ---------------------------------------------------------------------------
# down transformation
# ---------------------------------------------------------------------------


def down(f: Density, alpha: float) -> TransformedDensity:
    """Down transformation of a strictly decreasing density.

    Requires an analytic derivative and a finite lower support edge;
    increasing densities are reflected first.
    """
    if f.monotone_increasing and not f.monotone_decreasing:
        return down(reflect(f), alpha)
    if not f.monotone_decreasing:
        raise NotDecreasing(
            f"down transform requires a strictly decreasing density, got {f.label!r}"
        )
    if f.derivative is None:
        raise MissingDerivative("down transform requires an analytic derivative")
    if not math.isfinite(f.support.lower):
        raise OutOfDomain("down transform requires a finite lower support edge")

    a = float(alpha)
    sup_f = _edge_limit(f, "lower")   # largest value (decreasing density)
    inf_f = _edge_limit(f, "upper")   # smallest value

    if a != 2.0:

        def s_of_level(y: float) -> float:
            if y == math.inf:
                return -math.inf if a < 2 else 0.0
            if y == 0.0:
                return 0.0 if a < 2 else math.inf
            return y ** (2.0 - a) / (a - 2.0)

        def level_of_s(s: float) -> float:
            X = (a - 2.0) * s
            if X <= 0.0:
                # outside the canonical variable's range (possible only from
                # rounding at the zero edge): treat as the edge itself
                return 0.0 if a < 2 else math.inf
            return X ** (1.0 / (2.0 - a))

    else:

        def s_of_level(y: float) -> float:
            if y == math.inf:
                return -math.inf
            if y == 0.0:
                return math.inf
            return -math.log(y)

        def level_of_s(s: float) -> float:
            return math.exp(-s)

    s_lo = s_of_level(sup_f)
    s_hi = s_of_level(inf_f)
    sup = Support(s_lo, s_hi)

    y_hi = sup_f if math.isfinite(sup_f) else 1e300
    y_lo = max(inf_f, 1e-300)

    def x_of_s(s: float) -> float:
        y = level_of_s(s)
        y = min(max(y, y_lo * (1.0 + 1e-15)), y_hi * (1.0 - 1e-15))
        return float(f.invert_level(y, tol=1e-13))

    def value_scalar(s: float) -> float:
        y = level_of_s(s)
        if not (y_lo < y < y_hi):
            y = min(max(y, y_lo * (1.0 + 1e-15)), y_hi * (1.0 - 1e-15))
        x = float(f.invert_level(y, tol=1e-13))
        dv = abs(float(f.derivative(x)))
        if dv == 0.0 or not math.isfinite(dv):
            # fall back to the analytic log-derivative where the linear-scale
            # derivative under- or overflows (deep edge coordinates)
            if f.log_abs_derivative is not None:
                ld = float(f.log_abs_derivative(x))
                with np.errstate(all="ignore"):
                    return math.exp(a * math.log(y) - ld)
            raise EdgeIllConditioned(f"source derivative vanishes at x = {x}")
        with np.errstate(all="ignore"):
            return math.exp(a * math.log(y) - math.log(dv))

    def val(s):
        if np.isscalar(s):
            return value_scalar(float(s))
        return np.array([value_scalar(float(si)) for si in np.asarray(s, dtype=float)])

    # image monotonicity: sign of dD/ds is -sign(alpha - f f''/f'^2)
    mono_dec = mono_inc = False
    der = None
    log_der = None
    if f.second_derivative is not None:

        def ratio(x):
            x = np.asarray(x, dtype=float)
            with np.errstate(all="ignore"):
                return f.value(x) * f.second_derivative(x) / f.derivative(x) ** 2

        rs = ratio(_probe_grid(f))
        rs = rs[np.isfinite(rs)]
        if rs.size:
            if a > float(rs.max()) + 1e-9:
                mono_dec = True
            elif a < float(rs.min()) - 1e-9:
                mono_inc = True

        def der_scalar(s: float) -> float:
            x = x_of_s(s)
            v = float(f.value(x))
            dv = float(f.derivative(x))
            ddv = float(f.second_derivative(x))
            return v ** (2 * a - 2.0) / dv * (a - v * ddv / dv**2)

        der = lambda s: (
            der_scalar(float(s))
            if np.isscalar(s)
            else np.array([der_scalar(float(si)) for si in np.asarray(s, dtype=float)])
        )

        def log_der_scalar(s: float) -> float:
            x = x_of_s(s)
            v = float(f.value(x))
            dv = float(f.derivative(x))
            ddv = float(f.second_derivative(x))
            mag = abs(a - v * ddv / dv**2)
            if mag == 0.0 or v <= 0.0:
                return -math.inf
            return (2 * a - 2.0) * math.log(v) - math.log(abs(dv)) + math.log(mag)

        log_der = lambda s: (
            log_der_scalar(float(s))
            if np.isscalar(s)
            else np.array([log_der_scalar(float(si)) for si in np.asarray(s, dtype=float)])
        )

    def log_val(s):
        def one(si: float) -> float:
            y = level_of_s(float(si))
            if not (y_lo < y < y_hi):
                y = min(max(y, y_lo * (1.0 + 1e-15)), y_hi * (1.0 - 1e-15))
            x = float(f.invert_level(y, tol=1e-13))
            dv = abs(float(f.derivative(x)))
            if dv == 0.0 or not math.isfinite(dv):
                if f.log_abs_derivative is not None:
                    return a * math.log(y) - float(f.log_abs_derivative(x))
                return math.inf
            return a * math.log(y) - math.log(dv)

        if np.isscalar(s):
            return one(s)
        return np.array([one(si) for si in np.asarray(s, dtype=float)])

    table = _down_bracket_table(sup, val)
    inverter = None
    if mono_dec or mono_inc:
        inverter = _down_level_inverter(f, a, s_of_level, mono_dec, sup_f, inf_f)

    return TransformedDensity(
        support=sup,
        value=val,
        derivative=der,
        monotone_decreasing=mono_dec,
        monotone_increasing=mono_inc,
        label=f"down({f.label},alpha={a:g})",
        mass=f.mass,
        level_inverter=inverter,
        bracket_table=table,
        log_value=log_val,
        log_abs_derivative=log_der,
        source=f,
        alpha=a,
        direction="down",
        anchor="canonical",
    )


def _probe_grid(f: Density, n: int = 65) -> np.ndarray:
    lo, hi = f.support.lower, f.support.upper
    t = np.linspace(0.0, 1.0, n + 2)[1:-1]
    if math.isfinite(lo) and math.isfinite(hi):
        return lo + (hi - lo) * t
    if math.isfinite(lo):
        return lo + t / (1.0 - t)
    if math.isfinite(hi):
        return hi - (1.0 - t) / t
    return np.tan(math.pi * (t - 0.5))


def _down_bracket_table(sup: Support, val, n: int = 48):
    lo, hi = sup.lower, sup.upper
    t = np.sin(np.linspace(0.0, 1.0, n + 2)[1:-1] * math.pi / 2) ** 2
    if math.isfinite(lo) and math.isfinite(hi):
        ss = lo + (hi - lo) * t
    elif math.isfinite(lo):
        ss = lo + t / (1.0 - t)
    elif math.isfinite(hi):
        ss = hi - (1.0 - t) / t
    else:
        ss = np.tan(math.pi * (t - 0.5))
    try:
        vals = np.array([float(val(s)) for s in ss])
    except Exception:
        return None
    good = np.isfinite(vals)
    if good.sum() < 4:
        return None
    order = np.argsort(vals[good])
    return (ss[good][order], vals[good][order])


def _down_level_inverter(f: Density, a: float, s_of_level, mono_dec: bool, sup_f, inf_f):
    """Level inversion of a monotone down image: solve f^alpha/|f'| = y in x,
    then map back through the canonical variable change."""

    def g(x: float) -> float:
        v = float(f.value(x))
        dv = abs(float(f.derivative(x)))
        with np.errstate(all="ignore"):
            return math.exp(a * math.log(v) - math.log(dv)) if v > 0 and dv > 0 else math.inf

    def inverter(y: float) -> float:
        xs, vals = _source_sample(f)
        gs = np.array([g(x) for x in xs])
        good = np.isfinite(gs)
        xs, gs = xs[good], gs[good]
        order = np.argsort(gs)
        xs, gs = xs[order], gs[order]
        j = int(np.searchsorted(gs, y))
        j = min(max(j, 1), len(gs) - 1)
        bracket = (min(xs[j - 1], xs[j]), max(xs[j - 1], xs[j]))
        x = invert_monotone(g, y, bracket, tol=1e-12)
        return s_of_level(float(f.value(x)))

    return inverter


def _source_sample(f: Density, n: int = 96):
    xs = _probe_grid(f, n)
    vals = np.asarray(f.value(xs), dtype=float)
    return xs, vals


# ---------------------------------------------------------------------------
# up transformation
# ---------------------------------------------------------------------------


def _wf_integral(wf, lo: float, hi: float, tol: float = _SEG_TOL) -> float:
    """Integral of the weighted density over (lo, hi), geometrically split
    when the interval spans many decades on one side of the origin (the
    weight is a power there, so the mass is spread logarithmically).

    Runs non-strict: integrand values behind one level of monotone
    inversion carry ~1e-13 relative noise, below which the convergence
    criterion cannot be met; the achieved error is checked instead.
    """
    pts: tuple = ()
    if (lo > 0.0 or hi < 0.0) and lo != 0.0 and hi != 0.0:
        amin, amax = sorted((abs(lo), abs(hi)))
        if amin > 0:
            decades = math.log10(amax) - math.log10(amin)
            if decades > 4.0:
                n = min(80, max(2, int(decades / 2.0)))
                mags = np.geomspace(amin, amax, n + 2)[1:-1]
                sign = 1.0 if lo > 0 else -1.0
                pts = tuple(sorted(sign * m for m in mags))
    r = integrate(wf, Support(lo, hi), tol=tol, points=pts, strict=False, min_scale=0.0)
    # integrands behind a level inversion carry noise that is amplified
    # near ill-conditioned edges; accept the estimate unless the stall is
    # material at the round-trip tolerance scale
    if r.error_estimate > 3e-6 * max(1e-280, abs(r.value)):
        raise EdgeIllConditioned(
            f"weighted segment integral on ({lo}, {hi}) stalled at error {r.error_estimate:.2e}"
        )
    return r.value


def _up_weight(alpha: float):
    """(weight, log-weight) callables for the up variable change."""
    a = float(alpha)
    if a == 2.0:

        def w(x):
            x = np.asarray(x, dtype=float)
            with np.errstate(all="ignore"):
                return np.exp(x)

        def logw(x):
            return np.asarray(x, dtype=float)

        return w, logw

    e = 1.0 / (a - 2.0)

    def w(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            return np.abs((a - 2.0) * x) ** e

    def logw(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            return e * np.log(np.abs((a - 2.0) * x))

    return w, logw


def up(f: Density, alpha: float) -> TransformedDensity:
    """Up transformation of a density (no monotonicity required).

    The primitive is anchored at the upper support edge; when that integral
    diverges it is anchored at the lower edge, then at the median.
    """
    a = float(alpha)
    if f.support.contains(0.0, slack=EDGE_SLACK) and 1.0 <= a < 2.0:
        raise OutOfDomain(
            "weighted change of variable is not integrable across an interior origin "
            f"for alpha = {a}"
        )
    w, logw = _up_weight(a)

    if f.log_value is not None:
        # log-space product: e^x-type weights overflow long before the
        # weighted integrand itself stops being representable
        def wf(x):
            with np.errstate(all="ignore"):
                return np.exp(logw(x) + np.asarray(f.log_value(x), dtype=float))

    else:

        def wf(x):
            with np.errstate(all="ignore"):
                return w(x) * np.asarray(f.value(x), dtype=float)

    knots = _up_knots(f)
    segs = _segment_integrals(wf, f.support, knots)
    anchor, knots_arr, u_arr, sup = _anchor_and_cumulate(segs)
    coords = _UpCoords(f, wf, knots_arr, u_arr, sup, anchor)
    u_of_x = coords.u_of_x
    x_of_u = coords.x_of_u

    if a == 2.0:

        def value_of_x(x: float) -> float:
            if math.isnan(x):
                return 0.0
            return math.exp(-x)

        def logvalue_of_x(x: float) -> float:
            if math.isnan(x):
                return -math.inf
            return -x

    else:
        exq = 1.0 / (2.0 - a)

        def value_of_x(x: float) -> float:
            if math.isnan(x):
                return 0.0
            return abs((a - 2.0) * x) ** exq

        def logvalue_of_x(x: float) -> float:
            if math.isnan(x):
                return -math.inf
            m = abs((a - 2.0) * x)
            return exq * math.log(m) if m > 0 else -math.inf

    def val(u):
        def one(ui: float) -> float:
            return value_of_x(x_of_u(float(ui)))

        if np.isscalar(u):
            return one(u)
        return np.array([one(ui) for ui in np.asarray(u, dtype=float)])

    def log_val(u):
        def one(ui: float) -> float:
            return logvalue_of_x(x_of_u(float(ui)))

        if np.isscalar(u):
            return one(u)
        return np.array([one(ui) for ui in np.asarray(u, dtype=float)])

    # dU/du = sign((a-2)x) |(a-2)x|^{a/(2-a)} / f(x);  for a = 2: +e^{-2x}/f(x)
    def der_scalar(u: float) -> float:
        x = x_of_u(float(u))
        if math.isnan(x):
            return 0.0
        v = float(f.value(x))
        if a == 2.0:
            return math.exp(-2.0 * x) / v
        m = (a - 2.0) * x
        return math.copysign(abs(m) ** (a / (2.0 - a)), m) / v

    der = lambda u: (
        der_scalar(u)
        if np.isscalar(u)
        else np.array([der_scalar(float(ui)) for ui in np.asarray(u, dtype=float)])
    )

    def log_der_scalar(u: float) -> float:
        x = x_of_u(float(u))
        if math.isnan(x):
            return -math.inf
        if f.log_value is not None:
            lv = float(f.log_value(x))
        else:
            v = float(f.value(x))
            lv = math.log(v) if v > 0 else -math.inf
        if a == 2.0:
            return -2.0 * x - lv
        m = abs((a - 2.0) * x)
        lm = math.log(m) if m > 0 else -math.inf
        return (a / (2.0 - a)) * lm - lv

    log_der = lambda u: (
        log_der_scalar(u)
        if np.isscalar(u)
        else np.array([log_der_scalar(float(ui)) for ui in np.asarray(u, dtype=float)])
    )

    # image monotonicity: sign of dU/du is sign((a-2)x), fixed when the
    # source support does not straddle the origin; for alpha = 2 the
    # derivative e^{-2x}/f is positive on any support
    mono_dec = mono_inc = False
    if a == 2.0:
        mono_inc = True
    elif f.support.lower >= 0.0:
        if a < 2.0:
            mono_dec = True
        else:
            mono_inc = True
    elif f.support.upper <= 0.0:
        if a < 2.0:
            mono_inc = True
        else:
            mono_dec = True
    # level inversion via the analytic inverse of the value map
    inverter = None
    if mono_dec or mono_inc:

        def inverter(y: float) -> float:
            if a == 2.0:
                x_star = -math.log(y)
            else:
                mag = y ** (2.0 - a) / abs(a - 2.0)
                x_star = mag if f.support.lower >= 0.0 else -mag
            return u_of_x(x_star)

    uvals = np.array([value_of_x(float(x)) for x in knots_arr])
    order = np.argsort(uvals)
    table = (u_arr[order], uvals[order])

    return TransformedDensity(
        support=sup,
        value=val,
        derivative=der,
        monotone_decreasing=mono_dec,
        monotone_increasing=mono_inc,
        label=f"up({f.label},alpha={a:g})",
        mass=f.mass,
        level_inverter=inverter,
        bracket_table=table,
        log_value=log_val,
        log_abs_derivative=log_der,
        source=f,
        alpha=a,
        direction="up",
        anchor=anchor,
    )


def _up_knots(f: Density, n: int = _TABLE_N) -> np.ndarray:
    lo, hi = f.support.lower, f.support.upper
    t = np.sin(np.linspace(0.0, 1.0, n + 2)[1:-1] * math.pi / 2) ** 2
    if math.isfinite(lo) and math.isfinite(hi):
        xs = lo + (hi - lo) * t
    elif math.isfinite(lo):
        xs = lo + t / (1.0 - t)
    elif math.isfinite(hi):
        xs = hi - (1.0 - t) / t
    else:
        xs = np.tan(math.pi * (t - 0.5))
    if f.support.contains(0.0, slack=EDGE_SLACK):
        xs = np.append(xs, 0.0)
    return np.unique(xs)


def _segment_integrals(wf, support: Support, knots: np.ndarray) -> dict:
    """Per-segment weighted masses, including open head/tail segments.

    Values are floats; a divergent or overflowing side is recorded as inf.
    Integrands sit behind a monotone inversion whose ~1e-13 relative noise
    can stall the convergence criterion, so the achieved error is checked
    instead of trusting strict convergence.
    """

    def seg(lo, hi, open_ended: bool) -> float:
        try:
            r = integrate(wf, Support(lo, hi), tol=_SEG_TOL, strict=False, min_scale=0.0)
        except DivergentIntegral:
            return math.inf
        except EdgeIllConditioned:
            if open_ended:
                return math.inf
            raise
        if r.error_estimate > 1e-7 * max(1e-280, abs(r.value)):
            if open_ended:
                return math.inf
            raise EdgeIllConditioned(
                f"segment integral on ({lo}, {hi}) stalled at error {r.error_estimate:.2e}"
            )
        return r.value

    inner = [seg(xa, xb, False) for xa, xb in zip(knots[:-1], knots[1:])]
    head = seg(support.lower, knots[0], True)
    tail = seg(knots[-1], support.upper, True)
    return {"knots": knots, "inner": np.asarray(inner), "head": head, "tail": tail}


def _anchor_and_cumulate(segs: dict):
    """Choose the anchor, cumulate u at the knots, and fix the u-support.

    Anchoring at the upper edge gives u in (0, total]; at the lower edge
    u in [-total, 0); at the median both signs.  Knots whose cumulative
    weighted mass overflows the cap are dropped (the support is unbounded
    on that side, reachable only by bracket marching).
    """
    knots = np.asarray(segs["knots"], dtype=float)
    inner = segs["inner"]
    head, tail = segs["head"], segs["tail"]
    n = len(knots)

    if math.isfinite(tail):
        # u(x_k) = tail + sum of segments above k (suffix sums)
        u = np.full(n, np.nan)
        acc = tail
        u[-1] = acc
        for j in range(n - 2, -1, -1):
            acc += inner[j]
            if not math.isfinite(acc) or acc > _U_CAP:
                break
            u[j] = acc
        good = np.isfinite(u)
        truncated = not good.all()
        hi_u = math.inf if (truncated or not math.isfinite(head)) else float(u[good][0] + head)
        if not truncated and hi_u > _U_CAP:
            hi_u = math.inf
        return "upper", knots[good], u[good], Support(0.0, hi_u)

    if math.isfinite(head):
        u = np.full(n, np.nan)
        acc = -head
        u[0] = acc
        for j in range(1, n):
            acc -= inner[j - 1]
            if not math.isfinite(acc) or -acc > _U_CAP:
                break
            u[j] = acc
        good = np.isfinite(u)
        truncated = not good.all()
        lo_u = -math.inf if (truncated or not math.isfinite(tail)) else float(u[good][-1] - tail)
        if not truncated and lo_u < -_U_CAP:
            lo_u = -math.inf
        return "lower", knots[good], u[good], Support(lo_u, 0.0)

    # both edges divergent: anchor at the median knot
    m = n // 2
    u = np.full(n, np.nan)
    u[m] = 0.0
    acc = 0.0
    for j in range(m - 1, -1, -1):
        acc += inner[j]
        if not math.isfinite(acc) or acc > _U_CAP:
            break
        u[j] = acc
    acc = 0.0
    for j in range(m + 1, n):
        acc -= inner[j - 1]
        if not math.isfinite(acc) or -acc > _U_CAP:
            break
        u[j] = acc
    good = np.isfinite(u)
    return "median", knots[good], u[good], Support(-math.inf, math.inf)


class _UpCoords:
    """Cumulative coordinate u(x) of an up transform and its inverse.

    Backed by the eagerly-built knot table; evaluations beyond the table
    extend a growing anchor cache (marched once, reused ever after).  A side
    whose preimages exhaust the float range records its reach; coordinates
    beyond reach on an unbounded u-side return nan (the image value there
    has decayed beyond double precision).
    """

    def __init__(
        self,
        f: Density,
        wf,
        knots: np.ndarray,
        u_knots: np.ndarray,
        sup: Support,
        anchor: str,
    ):
        self.f = f
        self.wf = wf
        self.xs = list(map(float, knots))
        self.us = list(map(float, u_knots))
        self.sup = sup
        self.anchor = anchor
        self.lo_reach: Optional[float] = None  # u at the deepest reachable x above the table
        self.hi_reach: Optional[float] = None  # u at the deepest reachable x below the table
        if anchor == "median":
            self.anchor_x = self.xs[len(self.xs) // 2]
        elif anchor == "upper":
            self.anchor_x = f.support.upper
        else:
            self.anchor_x = f.support.lower

    # -- marching ----------------------------------------------------------
    def _step(self, x_prev: float, direction: float, i: int) -> Optional[float]:
        fsup = self.f.support
        to_edge = (direction > 0 and math.isfinite(fsup.upper)) or (
            direction < 0 and math.isfinite(fsup.lower)
        )
        if to_edge:
            edge = fsup.upper if direction > 0 else fsup.lower
            dist = abs(edge - x_prev)
            dist_next = dist / 4.0 if (i < 40 or dist >= 1.0) else dist * dist
            x_next = edge - math.copysign(dist_next, direction)
            if direction > 0:
                x_next = min(x_next, math.nextafter(edge, -math.inf))
            else:
                x_next = max(x_next, math.nextafter(edge, math.inf))
        else:
            step = max(1e-6, abs(x_prev)) * (0.5 * 2.0**i)
            x_next = x_prev + direction * step
        if x_next == x_prev or not math.isfinite(x_next):
            return None
        return x_next

    def _extend(self, direction: float, n_steps: int = 4) -> bool:
        """Append up to n_steps marched anchors on one side; False if the
        side's reach is exhausted."""
        if direction > 0:
            if self.lo_reach is not None:
                return False
            x_prev, u_prev = self.xs[-1], self.us[-1]
        else:
            if self.hi_reach is not None:
                return False
            x_prev, u_prev = self.xs[0], self.us[0]
        appended = False
        base_i = getattr(self, "_iter_hi" if direction > 0 else "_iter_lo", 0)
        for i in range(base_i, base_i + n_steps):
            x_next = self._step(x_prev, direction, i)
            if x_next is None:
                break
            try:
                with np.errstate(all="ignore"):
                    probe = float(self.wf(x_next))
            except (EdgeIllConditioned, DivergentIntegral):
                probe = math.nan
            if not math.isfinite(probe):
                x_next = None
                break
            try:
                u_next = self.u_of_x(x_next)
            except (DivergentIntegral, EdgeIllConditioned):
                x_next = None
                break
            if not math.isfinite(u_next) or abs(u_next) > _U_CAP:
                x_next = None
                break
            if direction > 0:
                self.xs.append(x_next)
                self.us.append(u_next)
                self._iter_hi = i + 1
            else:
                self.xs.insert(0, x_next)
                self.us.insert(0, u_next)
                self._iter_lo = i + 1
            appended = True
            x_prev, u_prev = x_next, u_next
        if x_next is None:
            if direction > 0:
                self.lo_reach = u_prev
            else:
                self.hi_reach = u_prev
            return appended
        return True

    # -- public ------------------------------------------------------------
    def u_of_x(self, x: float) -> float:
        """Signed direct integral from the anchor: no suffix-sum
        subtraction, so the coordinate keeps full relative precision even
        where the primitive decays by hundreds of orders of magnitude."""
        ax = self.anchor_x
        if x == ax:
            return 0.0
        if self.anchor == "upper":
            if math.isfinite(ax):
                return _wf_integral(self.wf, x, ax)
            r = integrate(self.wf, Support(x, math.inf), tol=_SEG_TOL, strict=False, min_scale=0.0)
            return r.value
        if self.anchor == "lower":
            if math.isfinite(ax):
                return -_wf_integral(self.wf, ax, x)
            r = integrate(self.wf, Support(-math.inf, x), tol=_SEG_TOL, strict=False, min_scale=0.0)
            return -r.value
        # median anchor
        if x > ax:
            return -_wf_integral(self.wf, ax, x)
        return _wf_integral(self.wf, x, ax)

    def x_of_u(self, u: float) -> float:
        for _ in range(400):
            us = self.us
            n = len(us)
            rev = us[::-1]
            j = int(np.searchsorted(rev, u))
            k = n - j  # first index with u_knot < u
            if 0 < k < n:
                x_lo, x_hi = self.xs[k - 1], self.xs[k]
                break
            direction = -1.0 if k == 0 else +1.0
            if not self._extend(direction):
                if direction < 0:
                    if math.isinf(self.sup.upper):
                        return math.nan
                    e = self.f.support.lower
                    return e + EDGE_SLACK * max(1.0, abs(e))
                if math.isinf(self.sup.lower):
                    return math.nan
                e = self.f.support.upper
                return e - EDGE_SLACK * max(1.0, abs(e))
        else:
            raise EdgeIllConditioned(f"could not bracket coordinate u = {u}")

        def du(x):
            return -float(self.wf(x))

        return invert_monotone(self.u_of_x, u, (x_lo, x_hi), tol=1e-13, dg=du)


# ---------------------------------------------------------------------------
# support length, admissibility, composition
# ---------------------------------------------------------------------------


def down_support_length(f: Density, alpha: float) -> float:
    """Length of the support of the down image, from the edge limits of f."""
    base = reflect(f) if (f.monotone_increasing and not f.monotone_decreasing) else f
    v_lo = _edge_limit(base, "lower")
    v_hi = _edge_limit(base, "upper")
    a = float(alpha)
    if a != 2.0:
        with np.errstate(all="ignore"):
            t_lo = v_lo ** (2.0 - a) if v_lo > 0 else (0.0 if a < 2 else math.inf)
            t_hi = v_hi ** (2.0 - a) if v_hi > 0 else (0.0 if a < 2 else math.inf)
        if math.isinf(t_lo) or math.isinf(t_hi):
            return math.inf
        return abs(t_lo - t_hi) / abs(2.0 - a)
    if v_hi == 0.0 or v_lo == math.inf or v_lo <= 0.0:
        return math.inf
    return abs(math.log(v_lo / v_hi))


def double_down_admissible(
    f: Density, alpha: float, n_grid: int = 129, margin: float = 1e-9
) -> AdmissibilityWitness:
    """Whether down can be applied twice: alpha must exceed sup f f''/f'^2."""
    if f.second_derivative is None:
        raise MissingSecondDerivative("double-down admissibility requires f''")
    if f.derivative is None:
        raise MissingDerivative("double-down admissibility requires f'")
    xs = _probe_grid(f, n_grid)
    with np.errstate(all="ignore"):
        r = np.asarray(f.value(xs), dtype=float) * np.asarray(
            f.second_derivative(xs), dtype=float
        ) / np.asarray(f.derivative(xs), dtype=float) ** 2
    r = r[np.isfinite(r)]
    if r.size == 0:
        raise EdgeIllConditioned("admissibility ratio not finite anywhere on the grid")
    sup_r = float(r.max())
    return AdmissibilityWitness(
        admissible=alpha > sup_r + margin, observed_sup=sup_r, alpha=float(alpha), margin=margin
    )


def compose_updown(f: Density, alpha: float, beta: float) -> TransformedDensity:
    """f -> down_beta[up_alpha[f]] (lazy; evaluation chains the inversions)."""
    mid = up(f, alpha)
    if not mid.monotone:
        raise NotDecreasing("intermediate up image is not monotone; cannot apply down")
    return down(mid, beta)


def compose_downdown(f: Density, alpha: float, beta: float) -> TransformedDensity:
    """f -> down_beta[down_alpha[f]] (requires double-down admissibility)."""
    witness = double_down_admissible(f, alpha)
    if not witness.admissible:
        raise NotDecreasing(
            f"alpha = {alpha} does not exceed sup f f''/f'^2 = {witness.observed_sup}"
        )
    mid = down(f, alpha)
    if not mid.monotone:
        raise NotDecreasing("first down image not classified monotone")
    return down(mid, beta)


# ---------------------------------------------------------------------------
# tail classification
# ---------------------------------------------------------------------------


def tail_classify_down(eta: float, alpha: float) -> TailReport:
    """Tail regime of down_alpha applied to a density with f' ~ -C x^{-eta-1}."""
    if not eta > 1:
        raise InvalidEta("tail classification requires eta > 1")
    a = float(alpha)
    if a > 2.0:
        return TailReport(
            regime="algebraic", exponent=(eta * (a - 1.0) - 1.0) / (eta * (a - 2.0))
        )
    if a == 2.0:
        return TailReport(regime="exponential")
    return TailReport(regime="compact-support")


def tail_classify_up(eta: float, alpha: float) -> TailReport:
    """Tail regime of up_alpha applied to a density with f ~ C x^{-eta}."""
    if not eta > 1:
        raise InvalidEta("tail classification requires eta > 1")
    a = float(alpha)
    alpha_c = 2.0 + 1.0 / (eta - 1.0)
    if a == 2.0:
        return TailReport(regime="no-finite-moments", alpha_c=alpha_c)
    if 2.0 < a < alpha_c:
        return TailReport(
            regime="algebraic", exponent=1.0 / (eta * (a - 2.0) + 1.0 - a), alpha_c=alpha_c
        )
    if a == alpha_c:
        return TailReport(regime="exponential", alpha_c=alpha_c)
    return TailReport(regime="compact-support", alpha_c=alpha_c)


# ---------------------------------------------------------------------------
# gauge alignment
# ---------------------------------------------------------------------------


def _probe_points(sup: Support) -> np.ndarray:
    lo, hi = sup.lower, sup.upper
    if math.isfinite(lo) and math.isfinite(hi):
        return lo + (hi - lo) * np.array([0.25, 0.45, 0.7])
    if math.isfinite(lo):
        return lo + np.array([0.3, 0.8, 1.7])
    if math.isfinite(hi):
        return hi - np.array([0.3, 0.8, 1.7])
    return np.array([-1.0, 0.0, 1.0])


def _aligned_candidate(d: Density, target: Density, flip: bool) -> Optional[Density]:
    out = reflect(d) if flip else d
    d_lo_fin = math.isfinite(out.support.lower)
    d_hi_fin = math.isfinite(out.support.upper)
    t_lo_fin = math.isfinite(target.support.lower)
    t_hi_fin = math.isfinite(target.support.upper)
    if (d_lo_fin, d_hi_fin) != (t_lo_fin, t_hi_fin):
        return None
    if d_lo_fin and d_hi_fin:
        len_d = out.support.length
        len_t = target.support.length
        if abs(len_d - len_t) > 1e-12 * max(len_d, len_t):
            out = rescale(out, len_d / len_t)
        return translate(out, target.support.lower - out.support.lower)
    if d_lo_fin:
        return translate(out, target.support.lower - out.support.lower)
    if d_hi_fin:
        return translate(out, target.support.upper - out.support.upper)
    return out


def gauge_align(d: Density, target: Density) -> Density:
    """Affine image of d whose support matches the target's.

    The transforms are defined up to a translation (and an orientation flip
    when the canonical anchor sits at the opposite edge), so comparisons
    translate and, if necessary, reflect first.  When both supports are
    bounded and their lengths differ, the map also rescales; family
    identities for transform images hold only in this affine gauge.
    Orientation is chosen by monotonicity metadata when both densities
    carry it, otherwise by probing values at a few interior points.
    """
    flips = []
    if d.monotone and target.monotone:
        flips = [
            (d.monotone_increasing and target.monotone_decreasing)
            or (d.monotone_decreasing and target.monotone_increasing)
        ]
    else:
        flips = [False, True]
    candidates = [c for fl in flips if (c := _aligned_candidate(d, target, fl)) is not None]
    if not candidates:
        return d
    if len(candidates) == 1:
        return candidates[0]
    pts = _probe_points(target.support)
    tv = np.array([float(target.value(p)) for p in pts])

    def score(c: Density) -> float:
        out = 0.0
        for p, t in zip(pts, tv):
            try:
                v = float(c.value(p))
            except Exception:
                return math.inf
            if not math.isfinite(v):
                return math.inf
            with np.errstate(all="ignore"):
                out += abs(math.log(max(v, 1e-300) / max(t, 1e-300)))
        return out

    return min(candidates, key=score)
