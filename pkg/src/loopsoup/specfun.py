"""Complex special functions used by the closed-form loop-soup formulas.

Three functions are provided:

* :func:`gamma` -- the Gamma function for complex arguments (Lanczos).
* :func:`hyp2f1` -- the Gauss hypergeometric function on the cut plane.
* :func:`hyp3f2_special` -- the particular 3F2(1, 1, 4/3; 2, 5/3; x).

All functions are pure and operate on Python scalars.  Branch cuts lie on
``[1, inf)``; points exactly on the cut take the limit from ``Im x < 0``,
which is the value produced by principal-branch powers of ``1 - x``.
"""
from __future__ import annotations

import cmath
import math

__all__ = [
    "SpecialFunctionError",
    "PoleError",
    "BranchPointError",
    "ConvergenceError",
    "gamma",
    "rgamma",
    "hyp2f1",
    "hyp3f2_special",
    "MAX_TERMS",
    "SERIES_RADIUS",
]

MAX_TERMS = 10_000
TERM_TOL = 1e-17
SERIES_RADIUS = 0.8


class SpecialFunctionError(ValueError):
    """Base class for evaluation failures in this module."""


class PoleError(SpecialFunctionError):
    """Raised when a function is evaluated at one of its poles."""


class BranchPointError(SpecialFunctionError):
    """Raised at a branch point where the function is not finite."""


class ConvergenceError(SpecialFunctionError):
    """Raised when a series fails to converge within the term budget."""


# ---------------------------------------------------------------------------
# Gamma
# ---------------------------------------------------------------------------

_LANCZOS_G = 7
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _is_nonpositive_integer(z: complex) -> bool:
    return z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real)


def _lanczos(z: complex) -> complex:
    # valid for Re z >= 1/2
    z = z - 1.0
    acc = _LANCZOS[0]
    for k in range(1, len(_LANCZOS)):
        acc += _LANCZOS[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return _SQRT_2PI * cmath.exp((z + 0.5) * cmath.log(t) - t) * acc


def gamma(z) -> complex:
    """Gamma function for complex ``z``.

    Uses the g=7, n=9 Lanczos approximation for ``Re z >= 1/2`` and the
    reflection formula otherwise.  On the real axis the result agrees with
    ``math.gamma`` to about 1e-14 relative for ``|z| <= 30``.

    Raises
    ------
    PoleError
        If ``z`` is zero or a negative integer.
    """
    z = complex(z)
    if _is_nonpositive_integer(z):
        raise PoleError(f"gamma has a pole at {z.real:g}")
    if z.imag == 0.0:
        # the real axis is the common case; math.gamma is correctly rounded
        # there and shares the Lanczos error budget elsewhere
        try:
            return complex(math.gamma(z.real), 0.0)
        except OverflowError:
            pass
    if z.real < 0.5:
        return cmath.pi / (cmath.sin(cmath.pi * z) * gamma(1.0 - z))
    return _lanczos(z)


def rgamma(z) -> complex:
    """Reciprocal Gamma function, equal to zero at the poles of Gamma."""
    z = complex(z)
    if _is_nonpositive_integer(z):
        return 0j
    return 1.0 / gamma(z)


# ---------------------------------------------------------------------------
# Gauss hypergeometric function
# ---------------------------------------------------------------------------


def _normalize_arg(x) -> complex:
    x = complex(x)
    if x.imag == 0.0:
        # pin points on the real axis to the lower side of any cut
        x = complex(x.real, -0.0)
    return x


def _series_2f1(a: complex, b: complex, c: complex, x: complex) -> complex:
    term = 1.0 + 0j
    total = term
    small = 0
    for n in range(MAX_TERMS):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * x
        total += term
        if abs(term) <= TERM_TOL * abs(total):
            small += 1
            if small == 2:
                return total
        else:
            small = 0
        if term == 0:
            return total
    raise ConvergenceError(f"2F1 series did not converge at x={x}")


def _is_integer(z: complex, tol: float = 1e-12) -> bool:
    return abs(z.imag) < tol and abs(z.real - round(z.real)) < tol


def _taylor_step(a, b, c, z0, f0, d0, h, want_integral=False):
    """Advance (f, f') of a 2F1 solution from ``z0`` to ``z0 + h``.

    The Taylor coefficients about ``z0`` follow a three-term recurrence
    derived from the hypergeometric differential equation.  When
    ``want_integral`` is set the integral of ``f`` from ``z0`` to ``z0+h``
    is returned as a third element.
    """
    p0 = z0 * (1.0 - z0)
    p1 = 1.0 - 2.0 * z0
    q0 = c - (a + b + 1.0) * z0
    q1 = -(a + b + 1.0)
    ab = a * b
    fm, fn = f0, d0  # f_n, f_{n+1}
    val = f0 + d0 * h
    der = d0
    integ = f0 * h + d0 * h * h / 2.0
    hp = h  # h**(n+1)
    small = 0
    for n in range(MAX_TERMS):
        fnext = -((p1 * n + q0) * (n + 1) * fn + (-n * (n - 1) + q1 * n - ab) * fm) / (
            p0 * (n + 2) * (n + 1)
        )
        # fnext is the coefficient of t^(n+2)
        der += (n + 2) * fnext * hp
        hp *= h
        t = fnext * hp
        val += t
        if want_integral:
            integ += t * h / (n + 3)
        if abs(t) <= TERM_TOL * max(abs(val), 1e-300):
            small += 1
            if small == 3:
                return val, der, integ
        else:
            small = 0
        fm, fn = fn, fnext
    raise ConvergenceError("Taylor continuation did not converge")


def _continuation_path(x: complex) -> list[complex]:
    """Waypoints from a point of fast series convergence to ``x``.

    The path keeps away from the singular points 0 and 1 and never crosses
    the cut ``[1, inf)``.  Real points beyond 1 are reached from below.
    """
    r = abs(x)
    below = math.copysign(1.0, x.imag) < 0
    u = x / r
    near_cut = abs(x.imag) < 0.6 and x.real > 0.4
    if not near_cut:
        return [0.6 * u, x]
    s = -1.0 if below else 1.0
    pts = [0.6 * cmath.exp(1j * s * math.pi / 4), complex(0.6, 0.9 * s)]
    pts.append(complex(1.4, 0.9 * s) if x.real > 1.0 else complex(x.real, 0.9 * s))
    pts.append(x)
    return pts


def _hyp2f1_taylor(a, b, c, x, with_integral=False):
    """Evaluate 2F1 by analytic continuation of the ODE along a path.

    Returns ``(f(x), f'(x), integral)``, where the integral of ``f`` runs
    from the first waypoint to ``x`` (only when ``with_integral``).
    """
    path = _continuation_path(x)
    z = path[0]
    f = _series_2f1(a, b, c, z)
    d = a * b / c * _series_2f1(a + 1, b + 1, c + 1, z)
    integ = 0j
    for target in path[1:]:
        while abs(target - z) > 1e-15:
            rad = min(abs(z), abs(1.0 - z))
            step = target - z
            if abs(step) > 0.5 * rad:
                step = step / abs(step) * 0.5 * rad
            f, d, di = _taylor_step(a, b, c, z, f, d, step, with_integral)
            integ += di
            z = z + step
    return f, d, integ


def _transformations(a, b, c, x):
    """Candidate argument maps as (|w|, name) pairs, best first."""
    cands = []
    cab = c - a - b
    amb = a - b
    with_cab = not _is_integer(cab)
    with_amb = not _is_integer(amb)
    if abs(x - 1.0) > 0:
        cands.append((abs(x / (x - 1.0)), "pfaff"))
    if with_cab:
        cands.append((abs(1.0 - x), "one_minus"))
        if x != 0:
            cands.append((abs(1.0 - 1.0 / x), "one_minus_inv"))
    if with_amb:
        if x != 0:
            cands.append((abs(1.0 / x), "inv"))
        if x != 1:
            cands.append((abs(1.0 / (1.0 - x)), "inv_one_minus"))
    cands.sort(key=lambda t: t[0])
    return cands


def _apply_transformation(name, a, b, c, x):
    F = _series_2f1
    if name == "pfaff":
        return (1.0 - x) ** (-a) * F(a, c - b, c, x / (x - 1.0))
    g = gamma(c)
    if name == "one_minus":
        w = 1.0 - x
        t1 = g * gamma(c - a - b) * rgamma(c - a) * rgamma(c - b) * F(a, b, a + b - c + 1, w)
        t2 = (
            w ** (c - a - b)
            * g
            * gamma(a + b - c)
            * rgamma(a)
            * rgamma(b)
            * F(c - a, c - b, c - a - b + 1, w)
        )
        return t1 + t2
    if name == "one_minus_inv":
        w = 1.0 - 1.0 / x
        t1 = g * gamma(c - a - b) * rgamma(c - a) * rgamma(c - b) * x ** (-a) * F(
            a, a - c + 1, a + b - c + 1, w
        )
        t2 = (
            g
            * gamma(a + b - c)
            * rgamma(a)
            * rgamma(b)
            * (1.0 - x) ** (c - a - b)
            * x ** (a - c)
            * F(c - a, 1 - a, c - a - b + 1, w)
        )
        return t1 + t2
    if name == "inv":
        w = 1.0 / x
        mx = -x
        t1 = g * gamma(b - a) * rgamma(b) * rgamma(c - a) * mx ** (-a) * F(a, a - c + 1, a - b + 1, w)
        t2 = g * gamma(a - b) * rgamma(a) * rgamma(c - b) * mx ** (-b) * F(b, b - c + 1, b - a + 1, w)
        return t1 + t2
    if name == "inv_one_minus":
        w = 1.0 / (1.0 - x)
        t1 = g * gamma(b - a) * rgamma(b) * rgamma(c - a) * (1.0 - x) ** (-a) * F(a, c - b, a - b + 1, w)
        t2 = g * gamma(a - b) * rgamma(a) * rgamma(c - b) * (1.0 - x) ** (-b) * F(b, c - a, b - a + 1, w)
        return t1 + t2
    raise KeyError(name)


def hyp2f1(a, b, c, x) -> complex:
    """Gauss hypergeometric function 2F1(a, b; c; x) for complex arguments.

    The Gauss series is summed for ``|x| <= 0.8``.  Elsewhere the linear
    transformation whose image argument is smallest is used, skipping the
    ones that are degenerate for integer ``c-a-b`` or ``a-b``.  If no
    transformation reaches the series disk (this happens near
    ``exp(+-i pi/3)``) the hypergeometric ODE is continued along a path by
    Taylor re-expansion.

    Raises
    ------
    PoleError
        If ``c`` is a non-positive integer.
    BranchPointError
        At ``x = 1`` when the Gauss sum diverges.
    ConvergenceError
        If a series exceeds the term budget.
    """
    a, b, c = complex(a), complex(b), complex(c)
    if _is_nonpositive_integer(c):
        raise PoleError("2F1 undefined for non-positive integer c")
    x = _normalize_arg(x)
    if x == 0:
        return 1.0 + 0j
    if abs(x) <= SERIES_RADIUS:
        return _series_2f1(a, b, c, x)
    if x == 1:
        if (c - a - b).real > 0:
            return gamma(c) * gamma(c - a - b) * rgamma(c - a) * rgamma(c - b)
        raise BranchPointError("2F1 diverges at x = 1 for Re(c-a-b) <= 0")
    for radius, name in _transformations(a, b, c, x):
        if radius > SERIES_RADIUS:
            break
        return _apply_transformation(name, a, b, c, x)
    return _hyp2f1_taylor(a, b, c, x)[0]


# ---------------------------------------------------------------------------
# 3F2(1, 1, 4/3; 2, 5/3; x)
# ---------------------------------------------------------------------------

_TWO_PI_SQRT3 = 2.0 * math.pi / math.sqrt(3.0)
# K = 2 Gamma(2/3)^2 / Gamma(4/3), the coefficient of the 2F1 term in the
# connection formula below
_K_CONN = 2.0 * math.gamma(2.0 / 3.0) ** 2 / math.gamma(4.0 / 3.0)


def _series_3f2(x: complex) -> complex:
    term = 1.0 + 0j
    total = term
    small = 0
    for n in range(MAX_TERMS):
        term *= (n + 1.0) * (n + 4.0 / 3.0) / ((n + 2.0) * (n + 5.0 / 3.0)) * x
        total += term
        if abs(term) <= TERM_TOL * abs(total):
            small += 1
            if small == 2:
                return total
        else:
            small = 0
    raise ConvergenceError(f"3F2 series did not converge at x={x}")


def _g_series(w: complex) -> complex:
    # G(w) = w 3F2(1,1,4/3;2,5/3;w)
    return w * _series_3f2(w)


def _g_connection(w: complex) -> complex:
    """G(w) expressed through G(1 - 1/w).

    This is the half-plane pair-weight identity (the eta and sigma forms of
    the same weight) written with sigma = eta/(eta-1), i.e.
    ``G(w) = 2pi/sqrt3 - 2 log w + G(1-1/w)
    - K (1-w)^{1/3} w^{-2/3} 2F1(1, 2/3; 4/3; 1-1/w)``.
    """
    v = 1.0 - 1.0 / w
    return (
        _TWO_PI_SQRT3
        - 2.0 * cmath.log(w)
        + _g_series(v)
        - _K_CONN * (1.0 - w) ** (1.0 / 3.0) * w ** (-2.0 / 3.0) * hyp2f1(1.0, 2.0 / 3.0, 4.0 / 3.0, v)
    )


def _g_taylor(x: complex) -> complex:
    # G' = 2F1(1, 4/3; 5/3; .), so G is the integral of a 2F1 along the
    # continuation path starting inside the series disk
    path = _continuation_path(x)
    start = path[0]
    _, _, integ = _hyp2f1_taylor(1.0, 4.0 / 3.0, 5.0 / 3.0, x, with_integral=True)
    return _g_series(start) + integ


def _g_of(x: complex) -> complex:
    if abs(x) <= SERIES_RADIUS:
        return _g_series(x)
    if abs(1.0 - 1.0 / x) <= SERIES_RADIUS:
        return _g_connection(x)
    if abs(1.0 - x) >= 1.0 / SERIES_RADIUS:
        # invert the connection formula: x = 1 - 1/w with w = 1/(1-x)
        w = 1.0 / (1.0 - x)
        return (
            _g_series(w)
            - _TWO_PI_SQRT3
            + 2.0 * cmath.log(w)
            + _K_CONN * (1.0 - w) ** (1.0 / 3.0) * w ** (-2.0 / 3.0) * hyp2f1(1.0, 2.0 / 3.0, 4.0 / 3.0, x)
        )
    return _g_taylor(x)


def hyp3f2_special(x) -> complex:
    """3F2(1, 1, 4/3; 2, 5/3; x) on the plane cut along ``[1, inf)``.

    Inside ``|x| <= 0.8`` the series is summed.  Outside, the function is
    reached through a connection formula relating ``x F(x)`` to
    ``(1 - 1/x) F(1 - 1/x)``, used forwards or backwards.  The lens-shaped
    regions around ``exp(+-i pi/3)`` that neither direction maps into the
    series disk are handled by integrating ``d/dx [x F(x)] = 2F1(1, 4/3;
    5/3; x)`` by Taylor continuation.

    Raises
    ------
    BranchPointError
        At ``x = 1``.
    """
    x = _normalize_arg(x)
    if x == 1:
        raise BranchPointError("3F2(1,1,4/3;2,5/3;x) has a branch point at x = 1")
    if x == 0:
        return 1.0 + 0j
    if abs(x) <= SERIES_RADIUS:
        return _series_3f2(x)
    return _g_of(x) / x
