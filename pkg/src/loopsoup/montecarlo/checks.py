"""Statistical checks of the Monte Carlo estimators against closed forms.

Each check has a default configuration sized for a desk-scale run; the
tolerance is ``max(3 stderr, 5% of the target)`` or ``3 stderr`` as listed
in :data:`CHECKS`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from ..correlators import ChargeVector, two_point_halfplane
from ..weights import HalfPlanePair, a_of_x, cross_ratio, pair_weight_halfplane
from .config import SoupConfig
from .estimators import (
    Estimate,
    estimate_alpha,
    estimate_correlator,
    estimate_correlator_ratio,
    estimate_weight_combination,
)

__all__ = ["CHECKS", "CheckResult", "default_config", "run_check"]

# name -> relative tolerance floor (None: 3 stderr only)
CHECKS = {
    "alpha-square": 0.05,
    "nacu-werner": None,
    "pair-halfplane": 0.05,
    "ratio-halfplane": 0.05,
    "imaginary-part": None,
}

SQUARE = (0j, 1 + 0j, 1 + 1j, 1j)
RATIO_BETAS = (2.5, -2.5)
RATIO_LAMBDA = 1.0
RATIO_POINTS = ((1j, 1j + 0.5), (1j, 1j + 1.0))


def _plane_weights_config(seed: int, replicas: int) -> SoupConfig:
    # durations 0.0125 .. 0.0125 * 2^20; strata are octaves
    t_min, strata = 0.0125, 20
    t_max = t_min * 2.0**strata
    w = 5.0 * math.sqrt(t_max) + 5.0
    return SoupConfig(
        intensity=1.0, domain="plane", t_min=t_min, t_max=t_max, strata=strata,
        window=(-w, w, -w, w), seed=seed, replicas=replicas, translations=64,
        tail_strata=4, max_step=0.03, max_steps_per_loop=16384,
    )


def default_config(name: str) -> SoupConfig:
    if name == "alpha-square":
        return _plane_weights_config(seed=101, replicas=40)
    if name == "nacu-werner":
        return _plane_weights_config(seed=102, replicas=25)
    if name == "pair-halfplane":
        t_min, strata = 0.0125, 14
        t_max = t_min * 2.0**strata
        w = 5.0 * math.sqrt(t_max) + 5.0
        return SoupConfig(
            intensity=1.0, domain="upper_half_plane", t_min=t_min, t_max=t_max, strata=strata,
            window=(-w, w, 0.0, w), seed=103, replicas=240, translations=64,
            max_step=0.005, max_steps_per_loop=131072,
        )
    if name in ("ratio-halfplane", "imaginary-part"):
        return SoupConfig(
            intensity=RATIO_LAMBDA, domain="upper_half_plane", t_min=0.02, t_max=50.0, strata=8,
            window=(-30.0, 30.0, 0.0, 30.0), seed=104 if name == "ratio-halfplane" else 105,
            replicas=4000, steps_per_loop=1024, richardson=False,
        )
    raise ValueError(f"unknown check {name!r}; choose from {sorted(CHECKS)}")


@dataclass
class CheckResult:
    name: str
    estimate: Estimate
    target: float
    tolerance: float
    passed: bool
    value: float

    def record(self) -> dict:
        d = self.estimate.record()
        d.update(
            {"check": self.name, "value": self.value, "target": self.target,
             "tolerance": self.tolerance, "passed": self.passed}
        )
        return d


def _tolerance(name: str, target: float, stderr: float) -> float:
    rel = CHECKS[name]
    tol = 3.0 * stderr
    return max(tol, rel * abs(target)) if rel is not None else tol


def run_check(name: str, cfg: SoupConfig | None = None, workers: int = 0) -> CheckResult:
    """Run one named check; ``cfg`` overrides the default budget."""
    if name not in CHECKS:
        raise ValueError(f"unknown check {name!r}; choose from {sorted(CHECKS)}")
    cfg = default_config(name) if cfg is None else cfg
    if workers:
        cfg = cfg.replace(workers=workers)
    if name == "alpha-square":
        est = estimate_weight_combination(
            cfg, SQUARE, [(1.0, (0, 2), (1, 3)), (1.0, (1, 3), (0, 2))], quantity="alpha_S(13|24)"
        )
        target = -a_of_x(cross_ratio(*SQUARE)) / 5.0
        value, se = est.mean, est.stderr
    elif name == "nacu-werner":
        # alpha(z1|z2) - alpha(z1|z3) = mu(z1,z3 not z2) - mu(z1,z2 not z3)
        pts = (0j, 1 + 0j, math.e * 1j)
        est = estimate_weight_combination(
            cfg, pts, [(1.0, (0, 2), (1,)), (-1.0, (0, 1), (2,))], quantity="nacu_werner_difference"
        )
        target = -0.2
        value, se = est.mean, est.stderr
    elif name == "pair-halfplane":
        est = estimate_alpha(cfg, [1j, 2j], [])
        target = pair_weight_halfplane(HalfPlanePair(1j, 2j))
        value, se = est.mean, est.stderr
    elif name == "ratio-halfplane":
        c = ChargeVector(RATIO_BETAS, cfg.intensity)
        (a1, a2), (b1, b2) = RATIO_POINTS
        est = estimate_correlator_ratio(cfg, [a1, a2], [b1, b2], c)
        target = two_point_halfplane(HalfPlanePair(a1, a2), c) / two_point_halfplane(HalfPlanePair(b1, b2), c)
        value, se = est.mean, est.stderr
    else:  # imaginary-part
        c = ChargeVector(RATIO_BETAS, cfg.intensity)
        est = estimate_correlator(cfg, list(RATIO_POINTS[0]), c)
        target = 0.0
        value, se = est.imag_mean, est.imag_stderr
    tol = _tolerance(name, target, se)
    return CheckResult(name, est, target, tol, bool(abs(value - target) <= tol), value)
