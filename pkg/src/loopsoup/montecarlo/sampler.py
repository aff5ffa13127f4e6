"""Poisson sampling of Brownian loops from the rooted loop measure.

Loops are drawn with density ``lambda (2 pi t^2)^-1 dt d^2z`` for roots in
the window and durations in ``[t_min, t_max]``; each loop is a Brownian
bridge of duration ``t`` built on a coarse grid and refined by midpoint
bisection.  Every replica owns a Philox stream seeded from
``SeedSequence([seed, replica])``, so results do not depend on how
replicas are scheduled.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import SoupConfig

__all__ = [
    "LoopSample",
    "replica_rng",
    "duration_strata",
    "expected_loop_count",
    "brownian_bridges",
    "refine",
    "hull_diameter",
    "sample_soup",
    "candidate_loops",
    "EXCURSION_SIGMAS",
    "stratum_steps",
]

# Bridges leave a box of half-width EXCURSION_SIGMAS * sqrt(duration) around
# their endpoints with probability below 2 exp(-2 * 16) per coordinate.
EXCURSION_SIGMAS = 4.0


def replica_rng(seed: int, replica: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(replica)])))


def duration_strata(cfg: SoupConfig) -> np.ndarray:
    return np.geomspace(cfg.t_min, cfg.t_max, cfg.strata + 1)


def _stratum_mean(lam: float, area: float, lo: float, hi: float) -> float:
    return lam * area / (2.0 * math.pi) * (1.0 / lo - 1.0 / hi)


def expected_loop_count(cfg: SoupConfig) -> float:
    """Poisson mean of the number of loops rooted in the window."""
    x0, x1, y0, y1 = cfg.window
    return _stratum_mean(cfg.intensity, (x1 - x0) * (y1 - y0), cfg.t_min, cfg.t_max)


def stratum_steps(cfg: SoupConfig, hi: float) -> int:
    """Steps per loop in a stratum with longest duration ``hi``.

    With ``cfg.max_step > 0`` the count is doubled from ``steps_per_loop``
    until the rms step ``sqrt(hi / n)`` is at most ``max_step`` (capped at
    ``max_steps_per_loop``), so the polyline resolves the same absolute
    length scale in every stratum.
    """
    n = cfg.steps_per_loop
    if cfg.max_step > 0:
        while n < cfg.max_steps_per_loop and math.sqrt(hi / n) > cfg.max_step:
            n *= 2
    return n


def _sample_durations(rng, lo: float, hi: float, k: int) -> np.ndarray:
    """Inverse-CDF draws from the density proportional to t^-2 on [lo, hi]."""
    u = rng.random(k)
    return 1.0 / (1.0 / lo - u * (1.0 / lo - 1.0 / hi))


def brownian_bridges(rng, durations: np.ndarray, steps: int) -> np.ndarray:
    """Complex array (k, steps + 1) of planar Brownian bridges from 0 to 0."""
    k = len(durations)
    dt = (np.asarray(durations) / steps)[:, None]
    inc = (rng.standard_normal((k, steps)) + 1j * rng.standard_normal((k, steps))) * np.sqrt(dt)
    w = np.concatenate([np.zeros((k, 1), complex), np.cumsum(inc, axis=1)], axis=1)
    s = np.linspace(0.0, 1.0, steps + 1)[None, :]
    return w - s * w[:, -1:]


def refine(rng, paths: np.ndarray, durations: np.ndarray) -> np.ndarray:
    """One level of midpoint bisection of Brownian-bridge paths."""
    k, m1 = paths.shape
    steps = m1 - 1
    tau = (np.asarray(durations) / steps)[:, None]
    noise = rng.standard_normal((k, steps)) + 1j * rng.standard_normal((k, steps))
    mid = 0.5 * (paths[:, :-1] + paths[:, 1:]) + noise * np.sqrt(tau / 4.0)
    out = np.empty((k, 2 * steps + 1), complex)
    out[:, 0::2] = paths
    out[:, 1::2] = mid
    return out


def hull_diameter(points) -> float:
    """Largest pairwise distance, computed over the convex hull."""
    p = np.unique(np.asarray(points, dtype=complex))
    if len(p) < 2:
        return 0.0
    order = np.lexsort((p.imag, p.real))
    p = p[order]

    def cross(o, a, b):
        return (a.real - o.real) * (b.imag - o.imag) - (a.imag - o.imag) * (b.real - o.real)

    lower, upper = [], []
    for z in p:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], z) <= 0:
            lower.pop()
        lower.append(z)
    for z in p[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], z) <= 0:
            upper.pop()
        upper.append(z)
    hull = np.array(lower[:-1] + upper[:-1])
    return float(np.max(np.abs(hull[:, None] - hull[None, :])))


@dataclass
class LoopSample:
    """One sampled loop; ``path`` is closed (first vertex equals last)."""

    root: complex
    duration: float
    path: np.ndarray
    sign: int
    _diameter: float | None = field(default=None, repr=False)

    @property
    def diameter(self) -> float:
        if self._diameter is None:
            self._diameter = hull_diameter(self.path)
        return self._diameter


def _region(cfg: SoupConfig, focus, reach: float):
    x0, x1, y0, y1 = cfg.window
    if focus is None:
        return x0, x1, y0, y1
    f = np.asarray(focus, dtype=complex)
    return (
        max(x0, f.real.min() - reach),
        min(x1, f.real.max() + reach),
        max(y0, f.imag.min() - reach),
        min(y1, f.imag.max() + reach),
    )


def _stratum_draw(cfg: SoupConfig, rng, lo: float, hi: float, focus):
    """Poisson number of loops, durations, roots and signs in one stratum."""
    reach = EXCURSION_SIGMAS * math.sqrt(hi)
    rx0, rx1, ry0, ry1 = _region(cfg, focus, reach)
    if rx1 <= rx0 or ry1 <= ry0 or cfg.intensity == 0:
        k = 0
    else:
        k = int(rng.poisson(_stratum_mean(cfg.intensity, (rx1 - rx0) * (ry1 - ry0), lo, hi)))
    t = _sample_durations(rng, lo, hi, k)
    roots = (rx0 + (rx1 - rx0) * rng.random(k)) + 1j * (ry0 + (ry1 - ry0) * rng.random(k))
    signs = np.where(rng.random(k) < 0.5, -1, 1).astype(np.int8)
    return t, roots, signs


def _to_fine(rng, coarse: np.ndarray, t: np.ndarray, steps: int) -> np.ndarray:
    p = coarse
    while p.shape[1] - 1 < steps:
        p = refine(rng, p, t)
    return p


def sample_soup(cfg: SoupConfig, replica: int = 0, focus=None) -> list:
    """All loops of one replica at full resolution.

    ``focus`` (optional points) restricts roots to the region from which a
    loop can reach those points; loops that cannot are never generated.
    In the upper-half-plane domain loops touching the real axis are removed.
    """
    rng = replica_rng(cfg.seed, replica)
    edges = duration_strata(cfg)
    out = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        t, roots, signs = _stratum_draw(cfg, rng, lo, hi, focus)
        if len(t) == 0:
            continue
        paths = _to_fine(rng, brownian_bridges(rng, t, cfg.coarse_steps), t, stratum_steps(cfg, hi))
        paths = paths + roots[:, None]
        for k in range(len(t)):
            if cfg.domain == "upper_half_plane" and paths[k].imag.min() <= 0:
                continue
            out.append(LoopSample(complex(roots[k]), float(t[k]), paths[k], int(signs[k])))
    return out


def candidate_loops(cfg: SoupConfig, replica: int, points, groups, min_diameter: float = 0.0,
                    translated: bool = False):
    """Loops of one replica that may fill every point of at least one group.

    A coarse bridge with ``cfg.coarse_steps`` steps is drawn first; a loop is
    refined to full resolution only if, for some group, all its points lie
    in the coarse bounding box widened by the excursion bound of the
    unresolved sub-bridges (and, when requested, its coarse diameter plus
    that margin reaches ``min_diameter``).  Rejections are exact up to
    probability ~exp(-32) per loop.

    With ``translated=True`` the root position is ignored by the filter
    (the caller averages over translations) and only the bounding-box
    extent has to cover a group.

    Returns ``(paths, signs, durations, strata)``: ``paths`` is a list of
    closed complex polylines (``stratum_steps`` + 1 vertices each) and
    ``strata`` the stratum index per loop.
    """
    pts = np.asarray(points, dtype=complex)
    rng = replica_rng(cfg.seed, replica)
    edges = duration_strata(cfg)
    keep_p, keep_s, keep_t, keep_k = [], [], [], []
    for si, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        t, roots, signs = _stratum_draw(cfg, rng, lo, hi, pts)
        if len(t) == 0:
            continue
        coarse = brownian_bridges(rng, t, cfg.coarse_steps) + roots[:, None]
        margin = EXCURSION_SIGMAS * np.sqrt(t / cfg.coarse_steps)
        bx0 = coarse.real.min(axis=1) - margin
        bx1 = coarse.real.max(axis=1) + margin
        by0 = coarse.imag.min(axis=1) - margin
        by1 = coarse.imag.max(axis=1) + margin
        ok = np.zeros(len(t), bool)
        for g in groups:
            gp = pts[list(g)]
            if translated:
                ok |= (bx1 - bx0 >= np.ptp(gp.real)) & (by1 - by0 >= np.ptp(gp.imag))
                if cfg.domain == "upper_half_plane":
                    ok &= (by0 <= gp.imag.min()) & (by1 >= gp.imag.max())
            else:
                ok |= (
                    (bx0 <= gp.real.min())
                    & (bx1 >= gp.real.max())
                    & (by0 <= gp.imag.min())
                    & (by1 >= gp.imag.max())
                )
        if cfg.domain == "upper_half_plane":
            ok &= coarse.imag.min(axis=1) > 0
        if min_diameter > 0:
            span = np.hypot(bx1 - bx0, by1 - by0)
            ok &= span >= min_diameter
        if ok.any():
            rel = coarse[ok] - roots[ok, None]
            n = stratum_steps(cfg, hi)
            tk, rk = t[ok], roots[ok]
            chunk = max(1, (1 << 21) // n)  # bound memory for long paths
            for c in range(0, len(tk), chunk):
                sl = slice(c, c + chunk)
                keep_p.extend(_to_fine(rng, rel[sl], tk[sl], n) + rk[sl, None])
            keep_s.append(signs[ok])
            keep_t.append(t[ok])
            keep_k.append(np.full(int(ok.sum()), si))
    if not keep_s:
        return [], np.zeros(0, np.int8), np.zeros(0), np.zeros(0, int)
    return keep_p, np.concatenate(keep_s), np.concatenate(keep_t), np.concatenate(keep_k)
