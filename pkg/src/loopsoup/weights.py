"""Brownian loop-measure coverage weights.

Half-plane quantities (pair weight, one-point-not-the-other weight and the
thinness sum), the plane thinness function, the cross-ratio, the
crossing-symmetric function A(x), and the seven sphere-paired weights of
four plane points.

Points are Python complex numbers.  Cutoff-dependent weights take a
:class:`CutoffConstants` carrying the UV cutoff ``delta`` and the model
constant ``alpha_bar``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import specfun
from .series import A_PREFACTOR

__all__ = [
    "GeometryError",
    "CutoffError",
    "HalfPlanePair",
    "GeometryInvariants",
    "CutoffConstants",
    "AlphaSSet",
    "PARTITIONS",
    "geometry",
    "pair_weight_halfplane",
    "one_not_other_halfplane",
    "nacu_werner",
    "thinness_sum_halfplane",
    "cross_ratio",
    "a_of_x",
    "alpha_s_closed_form",
    "alpha_s_linear_system",
    "permutation_equations",
]

_PI_5SQRT3 = math.pi / (5.0 * math.sqrt(3.0))
# Gamma(2/3)^2 / Gamma(4/3)
_G23_G43 = specfun.gamma(2.0 / 3.0).real ** 2 / specfun.gamma(4.0 / 3.0).real


class GeometryError(ValueError):
    """Coincident points, points off the half-plane, or a degenerate ratio."""


class CutoffError(ValueError):
    """A UV-cutoff precondition was violated."""


@dataclass(frozen=True)
class HalfPlanePair:
    """Two distinct points in the open upper half-plane."""

    z1: complex
    z2: complex

    def __post_init__(self):
        z1, z2 = complex(self.z1), complex(self.z2)
        object.__setattr__(self, "z1", z1)
        object.__setattr__(self, "z2", z2)
        if z1.imag <= 0 or z2.imag <= 0:
            raise GeometryError("both points must have positive imaginary part")
        if z1 == z2:
            raise GeometryError("points coincide")


@dataclass(frozen=True)
class GeometryInvariants:
    eta: complex
    sigma: float


@dataclass(frozen=True)
class CutoffConstants:
    """UV cutoff ``delta`` and the loop-soup constant ``alpha_bar``."""

    delta: float = 1e-3
    alpha_bar: float = 0.0

    def __post_init__(self):
        if not self.delta > 0:
            raise CutoffError("delta must be positive")

    @property
    def q(self) -> float:
        return _PI_5SQRT3 - 0.2 * math.log(2.0 * self.delta) + self.alpha_bar


PARTITIONS = ("1|234", "2|134", "3|124", "4|123", "12|34", "13|24", "14|23")


@dataclass(frozen=True)
class AlphaSSet:
    """The seven sphere-paired weights keyed by partition label."""

    values: dict = field(default_factory=dict)

    def __getitem__(self, key: str) -> float:
        return self.values[key]

    def as_array(self) -> np.ndarray:
        return np.array([self.values[k] for k in PARTITIONS])

    @classmethod
    def from_array(cls, arr) -> "AlphaSSet":
        return cls({k: float(v) for k, v in zip(PARTITIONS, arr)})


# ---------------------------------------------------------------------------
# Half-plane
# ---------------------------------------------------------------------------


def geometry(p: HalfPlanePair) -> GeometryInvariants:
    """eta and sigma of a half-plane pair."""
    z1, z2 = p.z1, p.z2
    eta = (z1 - z2) * (z1 - z2).conjugate() / ((z1 - z1.conjugate()) * (z2 - z2.conjugate()))
    sigma = abs(z1 - z2) ** 2 / abs(z1 - z2.conjugate()) ** 2
    return GeometryInvariants(complex(eta.real, 0.0), float(sigma))


def _pair_weight_eta(eta: float) -> float:
    e = complex(eta)
    ee = e * (e - 1.0)
    val = (
        -_PI_5SQRT3
        - 0.1 * e * specfun.hyp3f2_special(e)
        - 0.1 * cmath.log(ee)
        + _G23_G43 / 5.0 * ee ** (1.0 / 3.0) * specfun.hyp2f1(1.0, 2.0 / 3.0, 4.0 / 3.0, e)
    )
    return val.real


def _pair_weight_sigma(sigma: float) -> float:
    s = float(sigma)
    return -0.1 * (math.log(s) + ((1.0 - s) * specfun.hyp3f2_special(1.0 - s)).real)


def pair_weight_halfplane(p: HalfPlanePair, form: str = "sigma") -> float:
    """Weight of loops in H whose filled interior contains both points.

    ``form`` selects the sigma expression (default) or the equivalent eta
    expression; both are finite as the cutoff goes to zero.
    """
    g = geometry(p)
    if form == "sigma":
        return _pair_weight_sigma(g.sigma)
    if form == "eta":
        return _pair_weight_eta(g.eta.real)
    raise ValueError("form must be 'sigma' or 'eta'")


def _check_halfplane_cutoff(p: HalfPlanePair, c: CutoffConstants) -> None:
    lim = min(abs(p.z1 - p.z2), abs(p.z1 - p.z1.conjugate()) / 2.0)
    if c.delta > lim:
        raise CutoffError(f"delta={c.delta} exceeds min(|z1-z2|, Im z1) = {lim}")


def one_not_other_halfplane(p: HalfPlanePair, c: CutoffConstants) -> float:
    """alpha_H(z1|z2): loops in H around z1 but not z2, diameter > delta."""
    _check_halfplane_cutoff(p, c)
    return (
        -pair_weight_halfplane(p)
        + 0.2 * math.log(abs(p.z1 - p.z1.conjugate()))
        - 0.2 * math.log(2.0 * c.delta)
        + c.alpha_bar
    )


def thinness_sum_halfplane(p: HalfPlanePair, c: CutoffConstants) -> float:
    """alpha_H(z1|z2) + alpha_H(z2|z1) in the eta form."""
    _check_halfplane_cutoff(p, c)
    _check_halfplane_cutoff(HalfPlanePair(p.z2, p.z1), c)
    z1, z2 = p.z1, p.z2
    e = complex(geometry(p).eta.real, 0.0)
    ee = e * (e - 1.0)
    bracket = (
        -e * specfun.hyp3f2_special(e)
        + 2.0 * _G23_G43 * ee ** (1.0 / 3.0) * specfun.hyp2f1(1.0, 2.0 / 3.0, 4.0 / 3.0, e)
        - cmath.log(e * (z1 - z2.conjugate()) * (z2 - z1.conjugate()))
    )
    return (-0.2 * bracket).real + 2.0 * c.q


# ---------------------------------------------------------------------------
# Plane
# ---------------------------------------------------------------------------


def nacu_werner(z1: complex, z2: complex, c: CutoffConstants) -> float:
    """Plane thinness function alpha(z1|z2) = (1/5) log|z1 - z2| + Q."""
    d = abs(complex(z1) - complex(z2))
    if d == 0:
        raise GeometryError("points coincide")
    if d < c.delta:
        raise CutoffError(f"|z1-z2|={d} is below the cutoff delta={c.delta}")
    return 0.2 * math.log(d) + c.q


def cross_ratio(z1: complex, z2: complex, z3: complex, z4: complex) -> complex:
    """x = z12 z34 / (z13 z24)."""
    zs = [complex(z) for z in (z1, z2, z3, z4)]
    for a, b in combinations(range(4), 2):
        if zs[a] == zs[b]:
            raise GeometryError(f"points {a + 1} and {b + 1} coincide")
    z1, z2, z3, z4 = zs
    return (z1 - z2) * (z3 - z4) / ((z1 - z3) * (z2 - z4))


def a_of_x(x: complex, prefactor: float = A_PREFACTOR) -> float:
    """The real crossing-symmetric function A(x) of the cross-ratio.

    The two conjugate 3F2 terms are summed as ``Re(x F(x)) / 2``; this is
    also the correct limit for real ``x > 1``, where the terms sit on
    opposite sides of the cut.  ``A(0) = A(1) = 0``.  ``prefactor`` is the
    coefficient of the 2F1 term; any other value breaks crossing symmetry.
    """
    x = complex(x)
    if x == 0 or x == 1:
        return 0.0
    first = 0.5 * (x * specfun.hyp3f2_special(x)).real
    f = specfun.hyp2f1(2.0 / 3.0, 1.0, 4.0 / 3.0, x)
    second = prefactor * abs(x * (1.0 - x)) ** (2.0 / 3.0) * abs(f) ** 2
    return first - second


def _check_plane_cutoff(zs, c: CutoffConstants) -> None:
    for a, b in combinations(range(4), 2):
        d = abs(zs[a] - zs[b])
        if d == 0:
            raise GeometryError(f"points {a + 1} and {b + 1} coincide")
        if d < c.delta:
            raise CutoffError(f"|z{a + 1}-z{b + 1}|={d} is below delta={c.delta}")


def alpha_s_closed_form(z1, z2, z3, z4, c: CutoffConstants) -> AlphaSSet:
    """The seven paired weights from their closed-form solution (R = 0)."""
    zs = [complex(z) for z in (z1, z2, z3, z4)]
    _check_plane_cutoff(zs, c)
    z1, z2, z3, z4 = zs
    x = cross_ratio(z1, z2, z3, z4)
    A = a_of_x(x)
    q = c.q
    la = lambda w: math.log(abs(w))  # noqa: E731
    z12, z13, z14 = z1 - z2, z1 - z3, z1 - z4
    z23, z24, z34 = z2 - z3, z2 - z4, z3 - z4
    vals = {
        "1|234": 0.2 * (la(z12 * z14 / z24) + A) + q,
        "2|134": 0.2 * (la(z12 * z23 / z13) + A) + q,
        "3|124": 0.2 * (la(z23 * z34 / z24) + A) + q,
        "4|123": 0.2 * (la(z14 * z34 / z13) + A) + q,
        "12|34": -0.2 * (la(x) + A),
        "13|24": -0.2 * A,
        "14|23": -0.2 * (la(1.0 - x) + A),
    }
    return AlphaSSet(vals)


def permutation_equations(z1, z2, z3, z4, c: CutoffConstants):
    """The six pair equations as ``(M, rhs)`` with M of shape (6, 7).

    Row (i, j) states that the single-point weights of i and j plus the two
    2|2 weights separating i from j add up to ``(2/5) log|zi - zj| + 2Q``.
    """
    zs = [complex(z) for z in (z1, z2, z3, z4)]
    idx = {k: n for n, k in enumerate(PARTITIONS)}
    pairs2 = ("12|34", "13|24", "14|23")
    M = np.zeros((6, 7))
    rhs = np.zeros(6)
    for row, (i, j) in enumerate(combinations(range(1, 5), 2)):
        for k in (i, j):
            label = next(p for p in PARTITIONS[:4] if p.startswith(str(k)))
            M[row, idx[label]] = 1.0
        for p in pairs2:
            left, right = p.split("|")
            if (str(i) in left) != (str(j) in left):
                M[row, idx[p]] = 1.0
        rhs[row] = 0.4 * math.log(abs(zs[i - 1] - zs[j - 1])) + 2.0 * c.q
    return M, rhs


def alpha_s_linear_system(z1, z2, z3, z4, c: CutoffConstants) -> AlphaSSet:
    """Solve the six pair equations plus the four-point sum relation.

    The seventh row fixes the sum of the four single-point weights to
    ``(2/5)(log|x z23 z14| + 2 A(x)) + 4Q``.
    """
    zs = [complex(z) for z in (z1, z2, z3, z4)]
    _check_plane_cutoff(zs, c)
    M6, r6 = permutation_equations(*zs, c)
    z1, z2, z3, z4 = zs
    x = cross_ratio(z1, z2, z3, z4)
    row = np.array([1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0])
    r7 = 0.4 * (math.log(abs(x * (z2 - z3) * (z1 - z4))) + 2.0 * a_of_x(x)) + 4.0 * c.q
    M = np.vstack([M6, row])
    rhs = np.append(r6, r7)
    if abs(np.linalg.det(M)) < 1e-12:
        raise np.linalg.LinAlgError("weight system is singular")
    return AlphaSSet.from_array(np.linalg.solve(M, rhs))
