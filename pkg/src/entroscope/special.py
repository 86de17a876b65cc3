"""Stretched deformed Gaussians, generalized trigonometric functions,
incomplete-Gamma machinery, and closed-form down/up images of the family.

The family g_{p,lambda}(x) = a_{p,lambda} * exp_{2-lambda}(-|x|^{p*}) is the
minimizer of the biparametric Stam and moment-entropy inequalities.  Three
construction modes are supported:

* ``half``  - restriction to (0, edge) rescaled to unit mass (doubled),
* ``sym``   - symmetric density on (-edge, edge) with unit mass,
* ``paper`` - bare restriction to (0, edge) carrying mass 1/2.

Closed-form transform images below are parameterized by the actual
amplitude of the input, so they are exact for every mode.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as _gamma_fn

from .core import Density, Support, integrate, invert_monotone
from .errors import DivergentIntegral, InvalidParams, OutOfDomain, OutOfRange

__all__ = [
    "exp_lambda",
    "GGParams",
    "gg_normalization",
    "gg_density",
    "gg_support_edge",
    "mirror_gg",
    "arcsin_gen",
    "sin_gen",
    "arcsinh_gen",
    "sinh_gen",
    "inc_gamma_upper",
    "inv_inc_gamma_upper",
    "down_of_gg",
    "up_of_gg",
]

_SHANNON_WINDOW = 1e-9


def _pstar(p: float) -> float:
    if p == 1:
        return math.inf
    if p == 0:
        return 0.0
    return p / (p - 1.0)


def _beta(a: float, b: float) -> float:
    """Beta function via the Gamma product; valid for non-pole arguments,
    including the formal continuation to negative non-integers."""
    return _gamma_fn(a) * _gamma_fn(b) / _gamma_fn(a + b)


def exp_lambda(lam: float, x) -> float:
    """Generalized Tsallis exponential (1 + (1-lambda) x)_+^{1/(1-lambda)};
    the window |lambda - 1| < 1e-9 routes to exp."""
    if abs(lam - 1.0) < _SHANNON_WINDOW:
        return np.exp(x) if not np.isscalar(x) else math.exp(x)
    base = 1.0 + (1.0 - lam) * np.asarray(x, dtype=float)
    with np.errstate(all="ignore"):
        out = np.where(base > 0.0, np.where(base > 0.0, base, 1.0) ** (1.0 / (1.0 - lam)), 0.0)
    return float(out) if np.isscalar(x) else out


def gg_support_edge(p: float, lam: float) -> float:
    """Upper edge of the positive half of the support of g_{p,lambda}."""
    if lam <= 1.0:
        return math.inf
    if p == 0:
        return 1.0
    return (lam - 1.0) ** (-1.0 / _pstar(p))


def _check_gg_domain(p: float, lam: float) -> None:
    if p == 1:
        raise OutOfDomain("g_{p,lambda} requires p != 1 (the p -> 1 limit is a uniform density)")
    if p == 0:
        if not lam > 1:
            raise OutOfDomain("the p = 0 family member requires lambda > 1")
        return
    ps = _pstar(p)
    if not ps > 0:
        raise OutOfDomain(f"g_{{p,lambda}} requires p > 1 or p < 0 (p* > 0); got p = {p}")
    if not lam > 1.0 - ps:
        raise OutOfDomain(f"integrability requires lambda > 1 - p* = {1.0 - ps}; got {lam}")


def gg_normalization(p: float, lam: float) -> float:
    """Normalization constant a_{p,lambda} (Beta/Gamma closed form)."""
    _check_gg_domain(p, lam)
    if p == 0:
        return 1.0 / (2.0 * _gamma_fn(lam / (lam - 1.0)))
    ps = _pstar(p)
    if abs(lam - 1.0) < _SHANNON_WINDOW:
        return ps / (2.0 * _gamma_fn(1.0 / ps))
    second = lam / abs(1.0 - lam) + (1.0 / p if 1.0 - lam > 0 else 0.0)
    return ps * abs(1.0 - lam) ** (1.0 / ps) / (2.0 * _beta(1.0 / ps, second))


@dataclass(frozen=True)
class GGParams:
    """Parameter pair (p, lambda) with its derived quantities."""

    p: float
    lam: float

    def __post_init__(self) -> None:
        _check_gg_domain(self.p, self.lam)

    @property
    def pstar(self) -> float:
        return _pstar(self.p)

    @property
    def a(self) -> float:
        return gg_normalization(self.p, self.lam)

    @property
    def support_edge(self) -> float:
        return gg_support_edge(self.p, self.lam)


def _gg_halfline_callables(p: float, lam: float, amplitude: float):
    """(value, derivative, second_derivative, level_inverter) on (0, edge)."""
    A = amplitude
    if p == 0:
        c = 1.0 / (lam - 1.0)

        def val(x):
            x = np.asarray(x, dtype=float)
            with np.errstate(all="ignore"):
                u = -np.log(x)
                return A * np.where(u > 0, np.where(u > 0, u, 1.0) ** c, 0.0)

        def der(x):
            x = np.asarray(x, dtype=float)
            with np.errstate(all="ignore"):
                u = -np.log(x)
                return -A * c * u ** (c - 1.0) / x

        def sec(x):
            x = np.asarray(x, dtype=float)
            with np.errstate(all="ignore"):
                u = -np.log(x)
                return A * c / x**2 * ((c - 1.0) * u ** (c - 2.0) + u ** (c - 1.0))

        inv = lambda y: math.exp(-((y / A) ** (1.0 / c)))
        return val, der, sec, inv

    ps = _pstar(p)
    if abs(lam - 1.0) < _SHANNON_WINDOW:

        def val(x):
            x = np.asarray(x, dtype=float)
            return A * np.exp(-(x**ps))

        def der(x):
            x = np.asarray(x, dtype=float)
            with np.errstate(all="ignore"):
                return -A * ps * x ** (ps - 1.0) * np.exp(-(x**ps))

        def sec(x):
            x = np.asarray(x, dtype=float)
            with np.errstate(all="ignore"):
                return A * ps * x ** (ps - 2.0) * np.exp(-(x**ps)) * (ps * x**ps - (ps - 1.0))

        inv = lambda y: math.log(A / y) ** (1.0 / ps)
        return val, der, sec, inv

    lm1 = lam - 1.0
    m = (2.0 - lam) / lm1  # exponent of B in the derivative

    if lm1 > 0:
        edge = lm1 ** (-1.0 / ps)

        def _B(x):
            # 1 - (lam-1) x^{p*} = -expm1(p* log(x/edge)): exact up to the
            # support edge, where the naive form cancels catastrophically
            with np.errstate(all="ignore"):
                return -np.expm1(ps * (np.log(x) - math.log(edge)))

    else:

        def _B(x):
            return 1.0 - lm1 * x**ps

    def val(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            b = _B(x)
            return A * np.where(b > 0, np.where(b > 0, b, 1.0) ** (1.0 / lm1), 0.0)

    # derivative limit at the support edge (B = 0): 0 for m > 0, the finite
    # -A p* x^{ps-1} for m = 0 (lambda = 2), divergent for m < 0
    if m > 0:
        edge_der = lambda x: np.zeros_like(x)
    elif m == 0:
        edge_der = lambda x: -A * ps * x ** (ps - 1.0)
    else:
        edge_der = lambda x: np.full_like(x, -np.inf)

    def der(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            b = _B(x)
            good = b > 0
            return np.where(
                good, -A * ps * x ** (ps - 1.0) * np.where(good, b, 1.0) ** m, edge_der(x)
            )

    def sec(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            b = _B(x)
            good = b > 0
            bb = np.where(good, b, 1.0)
            return np.where(
                good,
                -A * ps * x ** (ps - 2.0) * bb ** (m - 1.0) * ((ps - 1.0) * bb - (2.0 - lam) * ps * x**ps),
                0.0,
            )

    def inv(y):
        return ((1.0 - (y / A) ** lm1) / lm1) ** (1.0 / ps)

    return val, der, sec, inv


def gg_density(p: float, lam: float, mode: str = "half") -> Density:
    """Stretched deformed Gaussian g_{p,lambda} as a Density.

    mode 'half' doubles the positive-half restriction to unit mass, 'sym'
    is the symmetric unit-mass density, 'paper' is the bare restriction to
    the positive half line carrying mass 1/2.
    """
    mode = mode.lower()
    if mode not in ("half", "sym", "paper"):
        raise InvalidParams(f"gg mode must be half, sym, or paper; got {mode!r}")
    _check_gg_domain(p, lam)
    a = gg_normalization(p, lam)
    edge = gg_support_edge(p, lam)
    if mode == "sym":
        val_h, der_h, sec_h, _ = _gg_halfline_callables(p, lam, a)

        def val(x):
            return val_h(np.abs(np.asarray(x, dtype=float)))

        def der(x):
            x = np.asarray(x, dtype=float)
            return np.sign(x) * der_h(np.abs(x))

        def sec(x):
            return sec_h(np.abs(np.asarray(x, dtype=float)))

        return Density(
            support=Support(-edge, edge),
            value=val,
            derivative=der,
            second_derivative=sec,
            label=f"gg(p={p:g},lambda={lam:g},sym)",
        )
    amp = 2.0 * a if mode == "half" else a
    mass = 1.0 if mode == "half" else 0.5
    val, der, sec, inv = _gg_halfline_callables(p, lam, amp)
    return Density(
        support=Support(0.0, edge),
        value=val,
        derivative=der,
        second_derivative=sec,
        monotone_decreasing=True,
        label=f"gg(p={p:g},lambda={lam:g},{mode})",
        mass=mass,
        level_inverter=inv,
    )


def mirror_gg(p: float, lam: float, tol: float = 1e-10) -> Density:
    """Family member with the modulus-flipped deformation sign:

        a_{p,lambda} (1 - |lambda-1| t^{p*})_+^{1/(lambda-1)}  on (0, edge).

    For lambda > 1 this is the ordinary restricted member (mass 1/2); for
    lambda < 1 it is the formal mirrored-domain member, divergent at its
    support edge, with the Beta-formula constant continued formally.
    """
    if lam == 1 or p in (0, 1):
        raise OutOfDomain("mirror_gg requires lambda != 1 and p not in {0, 1}")
    ps = _pstar(p)
    if ps == 0:
        raise OutOfDomain("mirror_gg requires p* != 0")
    second = lam / abs(1.0 - lam) + (1.0 / p if 1.0 - lam > 0 else 0.0)
    A = ps * abs(1.0 - lam) ** (1.0 / ps) / (2.0 * _beta(1.0 / ps, second))
    if not (math.isfinite(A) and A > 0):
        raise OutOfDomain(f"formal normalization constant undefined at (p, lambda) = ({p}, {lam})")
    edge = abs(lam - 1.0) ** (-1.0 / ps)
    c = abs(lam - 1.0)
    e = 1.0 / (lam - 1.0)

    def val(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(all="ignore"):
            b = 1.0 - c * t**ps
            return A * np.where(b > 0, np.where(b > 0, b, 1.0) ** e, 0.0)

    def der(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(all="ignore"):
            b = 1.0 - c * t**ps
            good = b > 0
            return np.where(
                good, -A * e * c * ps * t ** (ps - 1.0) * np.where(good, b, 1.0) ** (e - 1.0), 0.0
            )

    mass = integrate(val, Support(0.0, edge), tol=tol).value
    return Density(
        support=Support(0.0, edge),
        value=val,
        derivative=der,
        monotone_decreasing=lam > 1,
        monotone_increasing=lam < 1,
        label=f"mirror_gg(p={p:g},lambda={lam:g})",
        mass=mass,
    )


# ---------------------------------------------------------------------------
# generalized trigonometric / hyperbolic functions
# ---------------------------------------------------------------------------


def arcsin_gen(v: float, b: float, x: float, tol: float = 1e-12) -> float:
    """arcsin_{v,b}(x) = int_0^x (1 - t^b)^{-1/v} dt for x in [0, 1]."""
    if not b > 0:
        raise OutOfDomain("arcsin_gen requires b > 0")
    if not 0.0 <= x <= 1.0:
        raise OutOfDomain(f"arcsin_gen argument must lie in [0, 1]; got {x}")
    if x == 0.0:
        return 0.0

    def integrand(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(all="ignore"):
            return (1.0 - t**b) ** (-1.0 / v)

    if x < 0.75:
        return integrate(integrand, Support(0.0, x), tol=tol).value

    # split so the (possibly singular) edge t = 1 becomes an origin in the
    # substituted variable u = 1 - t, where 1 - (1-u)^b = -expm1(b log1p(-u))
    # is free of cancellation
    def integrand_sub(u):
        u = np.asarray(u, dtype=float)
        with np.errstate(all="ignore"):
            return (-np.expm1(b * np.log1p(-u))) ** (-1.0 / v)

    head = integrate(integrand, Support(0.0, 0.5), tol=tol / 2).value
    tail = integrate(integrand_sub, Support(1.0 - x, 0.5), tol=tol / 2).value
    return head + tail


@functools.lru_cache(maxsize=256)
def _arcsin_quarter(v: float, b: float) -> float:
    """Cached quarter period arcsin_{v,b}(1), infinite when 1/v >= 1."""
    try:
        return arcsin_gen(v, b, 1.0)
    except DivergentIntegral:
        return math.inf


def sin_gen(v: float, b: float, y: float, tol: float = 1e-11) -> float:
    """Principal-branch inverse of arcsin_gen: sin_{v,b}(y) in [0, 1]."""
    if not b > 0:
        raise OutOfDomain("sin_gen requires b > 0")
    ymax = _arcsin_quarter(v, b)
    if y < -tol or (math.isfinite(ymax) and y > ymax * (1.0 + 1e-12) + tol):
        raise OutOfDomain(f"sin_gen argument {y} outside principal branch [0, {ymax}]")
    y = min(max(y, 0.0), ymax)
    if y == 0.0:
        return 0.0
    if math.isfinite(ymax) and y == ymax:
        return 1.0

    def dg(t):
        base = 1.0 - t**b
        if base <= 0.0:
            return math.inf
        return base ** (-1.0 / v)

    return invert_monotone(lambda t: arcsin_gen(v, b, t), y, (0.0, 1.0), tol=tol, dg=dg)


def arcsinh_gen(v: float, b: float, x: float, tol: float = 1e-12) -> float:
    """arcsinh_{v,b}(x) = int_0^x (1 + t^b)^{-1/v} dt for x >= 0."""
    if not b > 0:
        raise OutOfDomain("arcsinh_gen requires b > 0")
    if x < 0:
        raise OutOfDomain("arcsinh_gen requires x >= 0")
    if x == 0.0:
        return 0.0

    def integrand(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(all="ignore"):
            return (1.0 + t**b) ** (-1.0 / v)

    return integrate(integrand, Support(0.0, x), tol=tol).value


@functools.lru_cache(maxsize=256)
def _arcsinh_limit(v: float, b: float) -> float:
    """Cached limit arcsinh_{v,b}(inf); finite iff b/v > 1."""
    if b / v <= 1.0:
        return math.inf

    def integrand(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(all="ignore"):
            return (1.0 + t**b) ** (-1.0 / v)

    return integrate(integrand, Support(0.0, math.inf), tol=1e-12).value


def sinh_gen(v: float, b: float, y: float, tol: float = 1e-11) -> float:
    """Inverse of arcsinh_gen on its range."""
    if y < 0:
        raise OutOfDomain("sinh_gen requires y >= 0")
    if y == 0.0:
        return 0.0
    ylim = _arcsinh_limit(v, b)
    if y >= ylim:
        raise OutOfDomain(f"sinh_gen argument {y} beyond range limit {ylim}")
    hi = 1.0
    while arcsinh_gen(v, b, hi) < y:
        hi *= 2.0
        if hi > 1e12:
            raise OutOfDomain("sinh_gen bracket expansion failed")

    def dg(t):
        with np.errstate(all="ignore"):
            return (1.0 + t**b) ** (-1.0 / v)

    return invert_monotone(lambda t: arcsinh_gen(v, b, t), y, (0.0, hi), tol=tol, dg=dg)


# ---------------------------------------------------------------------------
# incomplete Gamma
# ---------------------------------------------------------------------------

_EPS = 1e-16
_FPMIN = 1e-300


def _gamma_series_lower(a: float, x: float) -> float:
    """Lower incomplete gamma(a, x) by the standard ascending series; a > 0."""
    ap = a
    s = 1.0 / a
    term = s
    for _ in range(10_000):
        ap += 1.0
        term *= x / ap
        s += term
        if abs(term) < abs(s) * _EPS:
            break
    return s * math.exp(-x + a * math.log(x))


def _gamma_cf_upper(a: float, x: float) -> float:
    """Upper incomplete Gamma(a, x) via the Lentz continued fraction; x > 0."""
    b0 = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b0 if b0 != 0 else 1.0 / _FPMIN
    h = d
    for i in range(1, 10_000):
        an = -i * (i - a)
        b0 += 2.0
        d = an * d + b0
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b0 + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h * math.exp(-x + a * math.log(x))


def inc_gamma_upper(a: float, x: float) -> float:
    """Upper incomplete Gamma(a, x) = int_x^inf t^{a-1} e^{-t} dt.

    Series for small x, continued fraction for large x; non-positive
    non-integer orders are lifted by the recursion
    Gamma(a, x) = (Gamma(a+1, x) - x^a e^{-x}) / a.
    """
    if x < 0:
        raise OutOfRange("inc_gamma_upper requires x >= 0")
    if a <= 0 and abs(a - round(a)) < 1e-14:
        raise OutOfRange("inc_gamma_upper: order must not be a non-positive integer")
    if a <= 0:
        if x == 0:
            raise OutOfRange("Gamma(a, 0) diverges for a <= 0")
        n = int(math.ceil(-a)) + 1
        g = inc_gamma_upper(a + n, x)
        for j in range(n - 1, -1, -1):
            aj = a + j
            g = (g - math.exp(-x + aj * math.log(x))) / aj
        return g
    if x == 0:
        return _gamma_fn(a)
    if x < a + 1.0:
        return _gamma_fn(a) - _gamma_series_lower(a, x)
    return _gamma_cf_upper(a, x)


def inv_inc_gamma_upper(a: float, y: float, tol: float = 1e-12) -> float:
    """Inverse of x -> Gamma(a, x) (strictly decreasing) by bracketed Newton."""
    if not y > 0:
        raise OutOfRange("inv_inc_gamma_upper requires y > 0")
    if a > 0:
        top = _gamma_fn(a)
        if y > top * (1.0 + 1e-12):
            raise OutOfRange(f"y = {y} above Gamma({a}) = {top}")
        if y >= top:
            return 0.0
    lo = hi = 1.0
    for _ in range(2000):
        if inc_gamma_upper(a, hi) <= y:
            break
        hi *= 2.0
    else:
        raise OutOfRange("inv_inc_gamma_upper bracket expansion failed upward")
    for _ in range(2000):
        if inc_gamma_upper(a, lo) >= y:
            break
        lo *= 0.5
    else:
        raise OutOfRange("inv_inc_gamma_upper bracket expansion failed downward")

    def dg(x):
        return -math.exp(-x + (a - 1.0) * math.log(x)) if x > 0 else 0.0

    return invert_monotone(lambda x: inc_gamma_upper(a, x), y, (lo, hi), tol=tol, dg=dg)


# ---------------------------------------------------------------------------
# closed-form down/up images of g_{p,lambda}
# ---------------------------------------------------------------------------


def _gg_amplitude(p: float, lam: float, mode: str) -> tuple[float, float]:
    """(amplitude, mass) of the half-line representation used by transforms."""
    a = gg_normalization(p, lam)
    mode = mode.lower()
    if mode == "half":
        return 2.0 * a, 1.0
    if mode == "paper":
        return a, 0.5
    raise InvalidParams("closed-form transforms operate on half or paper mode")


def down_of_gg(p: float, lam: float, alpha: float, mode: str = "half") -> Density:
    """Closed-form density of the alpha-order down transform of g_{p,lambda}.

    The four analytic branches (generic, lambda=1, alpha=2, both) are exact
    in the canonical variable; they cross-validate the numeric transform.
    """
    if p == 0:
        raise OutOfDomain("closed-form down images require p != 0")
    _check_gg_domain(p, lam)
    A, mass = _gg_amplitude(p, lam, mode)
    ps = _pstar(p)
    lam1 = abs(lam - 1.0) < _SHANNON_WINDOW
    if alpha != 2:
        s_lo = A ** (2.0 - alpha) / (alpha - 2.0)
        s_hi = 0.0 if alpha < 2 else math.inf
        sup = Support(s_lo, s_hi)
        if lam1:

            def val(s):
                s = np.asarray(s, dtype=float)
                with np.errstate(all="ignore"):
                    X = (alpha - 2.0) * s
                    logterm = np.log(A ** (alpha - 2.0) * X) / (alpha - 2.0)
                    return (1.0 / ps) * X ** ((alpha - 1.0) / (2.0 - alpha)) * logterm ** (-1.0 / p)

        else:
            C = abs(1.0 - lam) ** (1.0 / p) / (A ** ((lam - 1.0) / ps) * ps)

            def val(s):
                s = np.asarray(s, dtype=float)
                with np.errstate(all="ignore"):
                    X = (alpha - 2.0) * s
                    return (
                        C
                        * X ** ((alpha + lam - 2.0) / (2.0 - alpha))
                        * np.abs(X ** ((lam - 1.0) / (2.0 - alpha)) - A ** (lam - 1.0))
                        ** (-1.0 / p)
                    )

    else:
        sup = Support(-math.log(A), math.inf)
        if lam1:

            def val(s):
                s = np.asarray(s, dtype=float)
                with np.errstate(all="ignore"):
                    return np.exp(-s) / (ps * (s + math.log(A)) ** (1.0 / p))

        else:
            C = abs(1.0 - lam) ** (1.0 / p) * A ** (1.0 - lam) / ps

            def val(s):
                s = np.asarray(s, dtype=float)
                with np.errstate(all="ignore"):
                    return (
                        C
                        * np.exp(-lam * s)
                        * np.abs(A ** (1.0 - lam) * np.exp((1.0 - lam) * s) - 1.0) ** (-1.0 / p)
                    )

    return Density(
        support=sup,
        value=val,
        label=f"down_of_gg(p={p:g},lambda={lam:g},alpha={alpha:g},{mode})",
        mass=mass,
    )


def up_of_gg(p: float, lam: float, alpha: float, mode: str = "half"):
    """Closed-form density of the alpha-order up transform of g_{p,lambda}.

    Generalized sine form for lambda > 1, hyperbolic form for lambda < 1,
    inverse incomplete Gamma for lambda = 1, each valid for alpha outside
    [1, 2].  Inside [1, 2] no closed form exists and the numeric transform
    is returned instead (a TransformedDensity, which flags the fallback).
    """
    if p == 0:
        raise OutOfDomain("closed-form up images require p != 0")
    _check_gg_domain(p, lam)
    if 1.0 <= alpha <= 2.0:
        from .transforms import up

        return up(gg_density(p, lam, mode=mode), alpha)
    A, mass = _gg_amplitude(p, lam, mode)
    ps = _pstar(p)
    a2 = alpha - 2.0
    pref = abs(a2) ** (1.0 / (2.0 - alpha))

    if abs(lam - 1.0) < _SHANNON_WINDOW:
        cg = (alpha - 1.0) / (a2 * ps)
        K = (A / ps) * abs(a2) ** (1.0 / a2)
        length = K * _gamma_fn(cg)
        sup = Support(0.0, length)

        def x_of_s(s: float) -> float:
            return inv_inc_gamma_upper(cg, s / K) ** (1.0 / ps)

    else:
        m = abs(lam - 1.0) ** (1.0 / ps)
        b = (a2 / (alpha - 1.0)) * ps
        C = A * abs(a2) ** (1.0 / a2) * a2 / ((alpha - 1.0) * m ** ((alpha - 1.0) / a2))
        exq = a2 / (alpha - 1.0)
        if lam > 1:
            v = 1.0 - lam
            y_quarter = _arcsin_quarter(v, b)
            sup = Support(0.0, C * y_quarter)

            def x_of_s(s: float) -> float:
                y = y_quarter - s / C
                return sin_gen(v, b, y) ** exq / m

        else:
            v = 1.0 - lam
            ylim = _arcsinh_limit(v, b)
            if math.isfinite(ylim):
                sup = Support(0.0, C * ylim)

                def x_of_s(s: float) -> float:
                    y = ylim - s / C
                    return sinh_gen(v, b, y) ** exq / m

            else:
                sup = Support(-math.inf, 0.0)

                def x_of_s(s: float) -> float:
                    return sinh_gen(v, b, -s / C) ** exq / m

    def val(s):
        def one(si: float) -> float:
            x = x_of_s(float(si))
            return pref * x ** (1.0 / (2.0 - alpha))

        if np.isscalar(s):
            return one(s)
        return np.array([one(si) for si in np.asarray(s, dtype=float)])

    return Density(
        support=sup,
        value=val,
        label=f"up_of_gg(p={p:g},lambda={lam:g},alpha={alpha:g},{mode})",
        mass=mass,
    )
