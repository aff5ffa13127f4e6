"""Closed-form correlation functions of layering vertex operators.

Half-plane one- and two-point functions (tilde normalization), plane two-,
three- and four-point functions (canonical normalization), the G functions
obtained by sending one point to infinity, and the free-field limit.
Distance powers are accumulated in log space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from . import specfun
from .weights import (
    CutoffConstants,
    GeometryError,
    HalfPlanePair,
    a_of_x,
    geometry,
    one_not_other_halfplane,
    pair_weight_halfplane,
)

__all__ = [
    "ChargeConservationError",
    "ChargeVector",
    "CorrelatorValue",
    "dims",
    "conserves_charge",
    "one_point_halfplane",
    "two_point_halfplane",
    "two_point_halfplane_unnormalized",
    "two_point_plane",
    "three_point_plane",
    "four_point_plane",
    "g_functions",
    "free_field_four_point",
    "CHARGE_TOL",
]

CHARGE_TOL = 1e-9
_TWO_PI = 2.0 * math.pi


class ChargeConservationError(ValueError):
    """Plane correlator requested with charges not summing to 0 mod 2 pi."""


@dataclass(frozen=True)
class ChargeVector:
    """Layering charges beta_i (radians) and the soup intensity lambda."""

    betas: tuple
    lam: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if not self.lam > 0:
            raise ValueError("intensity lambda must be positive")

    def __len__(self) -> int:
        return len(self.betas)

    def delta(self, *idx: int) -> float:
        """Dimension of the operator with charge sum over ``idx`` (0-based)."""
        b = sum(self.betas[i] for i in idx)
        return self.lam / 10.0 * (1.0 - math.cos(b))


@dataclass(frozen=True)
class CorrelatorValue:
    value: float
    normalization: str  # "half_plane_tilde" or "plane_canonical"


def dims(c: ChargeVector):
    """Single dimensions, the pair-dimension matrix, and Delta-tilde.

    Delta-tilde is only defined for four charges and is ``None`` otherwise.
    """
    n = len(c)
    d = [c.delta(i) for i in range(n)]
    dij = np.zeros((n, n))
    for i, j in combinations(range(n), 2):
        dij[i, j] = dij[j, i] = c.delta(i, j)
    dt = None
    if n == 4:
        dt = dij[0, 1] + dij[0, 2] + dij[0, 3] - sum(d)
    return d, dij, dt


def conserves_charge(betas: Sequence[float], tol: float = CHARGE_TOL) -> bool:
    s = math.fsum(betas)
    r = math.remainder(s, _TWO_PI)
    return abs(r) <= tol


def _require_conservation(c: ChargeVector) -> None:
    if not conserves_charge(c.betas):
        raise ChargeConservationError(
            f"charge conservation violated: sum(beta) = {math.fsum(c.betas):.12g} is not 0 mod 2pi"
        )


def _require_distinct(zs) -> None:
    for a, b in combinations(range(len(zs)), 2):
        if zs[a] == zs[b]:
            raise GeometryError(f"points {a + 1} and {b + 1} coincide")


def _lg(z) -> float:
    return math.log(abs(z))


# ---------------------------------------------------------------------------
# Half-plane
# ---------------------------------------------------------------------------


def one_point_halfplane(z: complex, beta: float, lam: float) -> float:
    """<O~(z)>_H = |z - zbar|^(-2 Delta)."""
    z = complex(z)
    if z.imag <= 0:
        raise GeometryError("point must lie in the open upper half-plane")
    d = lam / 10.0 * (1.0 - math.cos(beta))
    return math.exp(-2.0 * d * math.log(2.0 * z.imag))


def two_point_halfplane(p: HalfPlanePair, c: ChargeVector) -> float:
    """Tilde-normalized two-point function in the upper half-plane."""
    if len(c) != 2:
        raise ValueError("two charges required")
    z1, z2 = p.z1, p.z2
    d1, d2, d12 = c.delta(0), c.delta(1), c.delta(0, 1)
    s = d1 + d2 - d12
    sigma = geometry(p).sigma
    f = ((1.0 - sigma) * specfun.hyp3f2_special(1.0 - sigma)).real
    log_val = (
        -2.0 * s * _lg(z1 - z2)
        + 2.0 * s * _lg(z1 - z2.conjugate())
        - 2.0 * d1 * _lg(z1 - z1.conjugate())
        - 2.0 * d2 * _lg(z2 - z2.conjugate())
        - s * f
    )
    return math.exp(log_val)


def two_point_halfplane_unnormalized(
    p: HalfPlanePair, c: ChargeVector, cut: CutoffConstants
) -> float:
    """<e^{i b1 N(z1)} e^{i b2 N(z2)}>_H at finite cutoff, from the weights."""
    b1, b2 = c.betas
    lam = c.lam
    a12 = one_not_other_halfplane(p, cut)
    a21 = one_not_other_halfplane(HalfPlanePair(p.z2, p.z1), cut)
    pair = pair_weight_halfplane(p)
    return math.exp(
        -lam
        * (
            (1.0 - math.cos(b1)) * a12
            + (1.0 - math.cos(b2)) * a21
            + (1.0 - math.cos(b1 + b2)) * pair
        )
    )


# ---------------------------------------------------------------------------
# Plane
# ---------------------------------------------------------------------------


def two_point_plane(z1: complex, z2: complex, c: ChargeVector) -> float:
    """<O(z1) O(z2)> = |z12|^(-4 Delta_1)."""
    if len(c) != 2:
        raise ValueError("two charges required")
    _require_conservation(c)
    z1, z2 = complex(z1), complex(z2)
    _require_distinct([z1, z2])
    return math.exp(-4.0 * c.delta(0) * _lg(z1 - z2))


def three_point_plane(z1: complex, z2: complex, z3: complex, c: ChargeVector) -> float:
    """Plane three-point function; its structure constant is exactly 1."""
    if len(c) != 3:
        raise ValueError("three charges required")
    _require_conservation(c)
    z1, z2, z3 = complex(z1), complex(z2), complex(z3)
    _require_distinct([z1, z2, z3])
    d1, d2, d3 = c.delta(0), c.delta(1), c.delta(2)
    return math.exp(
        -2.0 * (d1 + d2 - d3) * _lg(z1 - z2)
        - 2.0 * (d1 + d3 - d2) * _lg(z1 - z3)
        - 2.0 * (d2 + d3 - d1) * _lg(z2 - z3)
    )


def _four_point_log(zs, d, dij, A) -> float:
    z1, z2, z3, z4 = zs
    z12, z13, z14 = z1 - z2, z1 - z3, z1 - z4
    z23, z24, z34 = z2 - z3, z2 - z4, z3 - z4
    coef = sum(d) - dij[0, 1] - dij[0, 2] - dij[0, 3]
    return (
        -2.0 * A * coef
        - 2.0 * dij[0, 1] * (_lg(z13) + _lg(z24) - _lg(z12) - _lg(z34))
        - 2.0 * dij[0, 3] * (_lg(z13) + _lg(z24) - _lg(z14) - _lg(z23))
        - 2.0 * d[0] * (_lg(z12) + _lg(z14) - _lg(z24))
        - 2.0 * d[1] * (_lg(z12) + _lg(z23) - _lg(z13))
        - 2.0 * d[2] * (_lg(z23) + _lg(z34) - _lg(z24))
        - 2.0 * d[3] * (_lg(z14) + _lg(z34) - _lg(z13))
    )


def four_point_plane(z1, z2, z3, z4, c: ChargeVector) -> float:
    """Canonically normalized four-point function in the plane."""
    if len(c) != 4:
        raise ValueError("four charges required")
    _require_conservation(c)
    zs = [complex(z) for z in (z1, z2, z3, z4)]
    _require_distinct(zs)
    d, dij, _ = dims(c)
    x = zs[0] - zs[1]
    x = (zs[0] - zs[1]) * (zs[2] - zs[3]) / ((zs[0] - zs[2]) * (zs[1] - zs[3]))
    return math.exp(_four_point_log(zs, d, dij, a_of_x(x)))


def g_functions(x: complex, c: ChargeVector, which: str = "g21_34", prefactor: float | None = None) -> float:
    """Four-point function with one operator sent to infinity.

    ``g21_34``: operator 1 at infinity, 2 at 1, 3 at x, 4 at 0.
    ``g41_32``: 1 at infinity, 4 at 1, 3 at x, 2 at 0.
    ``g24_31``: 4 at infinity, 2 at 1, 3 at x, 1 at 0.

    Exponents are those of the limit of :func:`four_point_plane`, so that
    the leading small-x power is ``|x|^(2(Delta_P - Delta_3 - Delta_k))``
    with ``Delta_P`` the dimension of the fused pair.  ``prefactor``
    overrides the coefficient inside A(x) (a sensitivity hook).
    """
    if len(c) != 4:
        raise ValueError("four charges required")
    _require_conservation(c)
    x = complex(x)
    if x == 0 or x == 1:
        raise GeometryError("cross-ratio must differ from 0 and 1")
    d, dij, dt = dims(c)
    D1, D2, D3, D4 = d
    D12, D13, D14 = dij[0, 1], dij[0, 2], dij[0, 3]
    if which == "g21_34":
        ex, e1 = D12 - D3 - D4, D14 - D2 - D3
    elif which == "g41_32":
        ex, e1 = D14 - D2 - D3, D12 - D3 - D4
    elif which == "g24_31":
        ex, e1 = D13 - D1 - D3, D14 - D2 - D3
    else:
        raise ValueError("which must be g21_34, g41_32 or g24_31")
    A = a_of_x(x) if prefactor is None else a_of_x(x, prefactor)
    return math.exp(2.0 * ex * _lg(x) + 2.0 * e1 * _lg(1.0 - x) + 2.0 * dt * A)


def free_field_four_point(zs, gammas) -> float:
    """prod_{i<j} |z_ij|^(4 gamma_i gamma_j)."""
    zs = [complex(z) for z in zs]
    s = 0.0
    for i, j in combinations(range(len(zs)), 2):
        s += 4.0 * gammas[i] * gammas[j] * _lg(zs[i] - zs[j])
    return math.exp(s)
