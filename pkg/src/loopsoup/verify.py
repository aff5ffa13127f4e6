"""Closed-form identity suite used by ``loopsoup verify`` and the tests.

Every check runs on a deterministic grid and reports its largest residual.
``mu_perturbation`` scales the coefficient of the 2F1 term inside A(x) by
``1 + mu_perturbation``; it exists only to show that the crossing and
inversion checks are sensitive to that constant.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from . import specfun
from .correlators import ChargeVector, four_point_plane, g_functions
from .series import A_PREFACTOR
from .weights import (
    CutoffConstants,
    HalfPlanePair,
    a_of_x,
    alpha_s_closed_form,
    alpha_s_linear_system,
    pair_weight_halfplane,
)

__all__ = ["run_identity_suite", "unit_limit_3f2", "SUITE_CHARGES"]

# charge-conserving test charges (sum = 0 or 2 pi)
SUITE_CHARGES = (
    (1.0, 2.0, -0.5, -2.5),
    (math.pi / 2, math.pi / 2, math.pi / 2, math.pi / 2),
    (0.7, -1.9, 2.3, -1.1),
)


def unit_limit_3f2(sigma0: float = 1e-6, terms: int = 5) -> float:
    """Limit of ``(1 - s) 3F2(1,1,4/3;2,5/3;1 - s)`` as ``s -> 0``.

    Near unit argument the function has the expansion
    ``L + sum a_k s^k + sum b_k s^(k + 1/3)``; sampling at ``s = sigma0 8^j``
    and eliminating the leading ``terms - 1`` powers gives ``L``.
    """
    powers = sorted({k + e for k in range(terms) for e in (0.0, 1.0 / 3.0)} - {0.0})[: terms - 1]
    s = sigma0 * 8.0 ** np.arange(terms)
    f = np.array([((1.0 - v) * specfun.hyp3f2_special(1.0 - v)).real for v in s])
    M = np.column_stack([np.ones(terms)] + [s**p for p in powers])
    return float(np.linalg.solve(M, f)[0])


def _record(name: str, residuals, tol: float) -> dict:
    r = float(np.max(residuals)) if len(residuals) else 0.0
    return {"name": name, "max_residual": r, "tolerance": tol, "n": len(residuals), "passed": bool(r < tol)}


def _offcut_points(rng, n: int) -> list:
    out = []
    while len(out) < n:
        x = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        if abs(x.imag) > 1e-3 and abs(x) > 0.05 and abs(1 - x) > 0.05:
            out.append(x)
    return out


def run_identity_suite(tol: float = 1e-9, mu_perturbation: float = 0.0, seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    kappa = A_PREFACTOR * (1.0 + mu_perturbation)
    checks = []

    # two closed forms of the half-plane pair weight
    res = []
    for _ in range(100):
        z1 = complex(rng.uniform(-2, 2), rng.uniform(0.1, 3))
        z2 = complex(rng.uniform(-2, 2), rng.uniform(0.1, 3))
        p = HalfPlanePair(z1, z2)
        res.append(abs(pair_weight_halfplane(p, "eta") - pair_weight_halfplane(p, "sigma")))
    checks.append(_record("pair-weight-two-forms", res, tol))

    # unit-argument limit of the 3F2
    L = unit_limit_3f2()
    checks.append(_record("3f2-unit-limit", [abs(L - 2.0 * math.pi / math.sqrt(3.0))], max(tol, 1e-9)))

    # inversion identity of A
    xs = _offcut_points(rng, 200)
    res = [abs(a_of_x(x, kappa) - a_of_x(1.0 / x, kappa) + math.log(abs(x))) for x in xs]
    checks.append(_record("A-inversion", res, tol))

    # crossing relations of the G functions
    r1, r2 = [], []
    xs = _offcut_points(rng, 50)
    for betas in SUITE_CHARGES:
        c = ChargeVector(betas, 1.0)
        d3 = c.delta(2)
        for x in xs:
            g = g_functions(x, c, "g21_34", kappa)
            r1.append(abs(g / g_functions(1.0 - x, c, "g41_32", kappa) - 1.0))
            other = abs(x) ** (-4.0 * d3) * g_functions(1.0 / x, c, "g24_31", kappa)
            r2.append(abs(g / other - 1.0))
    checks.append(_record("crossing-x-to-1-minus-x", r1, tol))
    checks.append(_record("crossing-x-to-1-over-x", r2, tol))

    # permutation invariance of the four-point function
    res = []
    zs0 = [0.3 + 0.1j, 1.7 - 0.4j, -0.8 + 1.2j, 0.5 + 2.0j]
    for betas in SUITE_CHARGES:
        c = ChargeVector(betas, 1.0)
        ref = four_point_plane(*zs0, c)
        for perm in itertools.permutations(range(4)):
            cp = ChargeVector(tuple(betas[i] for i in perm), 1.0)
            res.append(abs(four_point_plane(*[zs0[i] for i in perm], cp) / ref - 1.0))
    checks.append(_record("four-point-permutations", res, tol))

    # linear system for the sphere weights against the closed form
    res = []
    cut = CutoffConstants(0.01, 0.0)
    for _ in range(20):
        zs = [complex(*rng.uniform(-2, 2, 2)) for _ in range(4)]
        a = alpha_s_closed_form(*zs, cut).as_array()
        b = alpha_s_linear_system(*zs, cut).as_array()
        res.append(float(np.max(np.abs(a - b))))
    checks.append(_record("weights-linear-system", res, tol))

    return {"identities": checks, "passed": all(c["passed"] for c in checks), "mu_perturbation": mu_perturbation}
