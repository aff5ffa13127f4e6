"""Monte Carlo estimators of coverage weights, correlators and alpha-bar.

Each replica is an independent Poisson soup.  Filled interiors are
evaluated on the full path (``n`` steps) and on its even-indexed vertices
(``n/2`` steps, the parent of the last bisection).  The polyline fill
undershoots the Brownian fill by an amount decaying like ``n^(-1/3)`` (the
frontier has dimension 4/3), so the coupled combination
``E_n + r (E_n - E_{n/2})`` with ``r = 1/(2^(1/3) - 1)`` removes the
leading discretization error.  Raw ``n``-step estimates are reported too.

Weights are accumulated per log-duration stratum.  Loops much larger than
the point configuration contribute only when their outer boundary passes
between the points, an event of probability ~ (size)^(-2/3); the weight
per unit of ``log t`` therefore decays like ``t^(-1/3)``, and the optional
tail correction extends the last ``tail_strata`` strata with that law.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..correlators import ChargeVector
from .config import SoupConfig
from .fill import default_cell, fill_contains_many
from .sampler import EXCURSION_SIGMAS, _region, candidate_loops, duration_strata, hull_diameter

__all__ = [
    "Estimate",
    "RICHARDSON_FACTOR",
    "TAIL_EXPONENT",
    "tail_factor",
    "replica_coverage",
    "estimate_alpha",
    "estimate_weight_combination",
    "estimate_correlator",
    "estimate_correlator_ratio",
    "estimate_alpha_bar",
    "translation_profile",
]

RICHARDSON_FACTOR = 1.0 / (2.0 ** (1.0 / 3.0) - 1.0)
TAIL_EXPONENT = 1.0 / 3.0


@dataclass
class Estimate:
    quantity: str
    mean: float
    stderr: float
    n_replicas: int
    raw_mean: float
    raw_stderr: float
    config_hash: str
    imag_mean: float | None = None
    imag_stderr: float | None = None

    def record(self) -> dict:
        d = {
            "quantity": self.quantity,
            "mean": self.mean,
            "stderr": self.stderr,
            "n_replicas": self.n_replicas,
            "raw_mean": self.raw_mean,
            "raw_stderr": self.raw_stderr,
            "config_hash": self.config_hash,
        }
        if self.imag_mean is not None:
            d["imag_mean"] = self.imag_mean
            d["imag_stderr"] = self.imag_stderr
        return d


@dataclass
class ReplicaCoverage:
    """Per-loop filled-interior membership at the two resolutions."""

    fine: np.ndarray  # (k, P) bool
    half: np.ndarray  # (k, P) bool
    signs: np.ndarray  # (k,)
    strata: np.ndarray | None = None  # (k,) stratum index
    diam_fine: np.ndarray | None = None
    diam_half: np.ndarray | None = None


def replica_coverage(cfg: SoupConfig, replica: int, points, groups, min_diameter: float = 0.0):
    """Coverage of ``points`` by the loops of one replica.

    In the upper-half-plane domain a loop counts at a given resolution only
    if that resolution of the path stays above the real axis; otherwise its
    row is all False at that resolution.
    """
    pts = np.asarray(points, dtype=complex)
    paths, signs, _, strata = candidate_loops(cfg, replica, pts, groups, min_diameter)
    k, P = len(paths), len(pts)
    fine = np.zeros((k, P), bool)
    half = np.zeros((k, P), bool)
    dfine = np.zeros(k) if min_diameter > 0 else None
    dhalf = np.zeros(k) if min_diameter > 0 else None
    for i in range(k):
        p = paths[i]
        ph = p[::2]
        cell = default_cell(p)
        if cfg.domain == "upper_half_plane":
            ok_f = p.imag.min() > 0
            ok_h = ph.imag.min() > 0
        else:
            ok_f = ok_h = True
        if ok_f:
            fine[i] = fill_contains_many(p, pts, cell)
        if ok_h:
            half[i] = fill_contains_many(ph, pts, 2.0 * cell)
        if min_diameter > 0:
            dfine[i] = hull_diameter(p) if fine[i].any() else 0.0
            dhalf[i] = hull_diameter(ph) if half[i].any() else 0.0
    return ReplicaCoverage(fine, half, signs.astype(float), strata, dfine, dhalf)


def _map_replicas(cfg: SoupConfig, fn, *args):
    reps = range(cfg.replicas)
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as ex:
            return list(ex.map(fn, [cfg] * cfg.replicas, reps, *[[a] * cfg.replicas for a in args]))
    return [fn(cfg, r, *args) for r in reps]


def _mean_se(x: np.ndarray):
    x = np.asarray(x, float)
    n = len(x)
    se = float(np.std(x, ddof=1) / math.sqrt(n)) if n > 1 else math.nan
    return float(np.mean(x)), se


def _extrapolate(fine, half, on: bool):
    return fine + RICHARDSON_FACTOR * (fine - half) if on else fine


def tail_factor(cfg: SoupConfig) -> float:
    """Ratio of the weight beyond ``t_max`` to that of the last
    ``cfg.tail_strata`` strata under the ``t^(-1/3)`` law."""
    k = cfg.tail_strata
    if k == 0:
        return 0.0
    rho = (cfg.t_max / cfg.t_min) ** (1.0 / cfg.strata)
    return 1.0 / (rho ** (k * TAIL_EXPONENT) - 1.0)


def _with_tail(cfg: SoupConfig, per_stratum: np.ndarray) -> np.ndarray:
    """Per-replica totals over strata (axis -1) plus the tail extension."""
    tot = per_stratum.sum(axis=-1)
    k = cfg.tail_strata
    if k:
        tot = tot + tail_factor(cfg) * per_stratum[..., -k:].sum(axis=-1)
    return tot


# ---------------------------------------------------------------------------
# Coverage weights
# ---------------------------------------------------------------------------


def _event(cov: np.ndarray, S, Sc) -> np.ndarray:
    ev = np.all(cov[:, list(S)], axis=1) if len(S) else np.ones(len(cov), bool)
    if len(Sc):
        ev &= ~np.any(cov[:, list(Sc)], axis=1)
    return ev


def _weights_replica(cfg, replica, points, terms):
    """Per-stratum weights ``(fine, half)`` of one replica."""
    if cfg.translations > 0:
        return translation_profile(cfg, replica, points, terms)
    groups = [tuple(S) for _, S, _ in terms]
    cov = replica_coverage(cfg, replica, points, groups)
    out = []
    for cv in (cov.fine, cov.half):
        ev = sum(c * _event(cv, S, Sc).astype(float) for c, S, Sc in terms)
        acc = np.bincount(cov.strata, weights=ev, minlength=cfg.strata) if len(ev) else np.zeros(cfg.strata)
        out.append(acc / cfg.intensity if cfg.intensity > 0 else acc)
    return out[0], out[1]


def _jitter(rng, box, m: int, vertical: bool) -> np.ndarray:
    """Stratified uniform points in ``box``: an m x m jittered grid, or m
    jittered abscissae at fixed height when ``vertical`` is False."""
    x0, x1, y0, y1 = box
    if not vertical:
        u = (np.arange(m) + rng.random(m)) / m
        return x0 + (x1 - x0) * u + 0j
    g = np.arange(m)
    u = (g[:, None] + rng.random((m, m))) / m
    v = (g[None, :] + rng.random((m, m))) / m
    return (x0 + (x1 - x0) * u + 1j * (y0 + (y1 - y0) * v)).ravel()


def translation_profile(cfg: SoupConfig, replica: int, points, terms, strides=(1, 2)):
    """Per-stratum weight of one replica, averaging each loop over roots.

    Every candidate loop is re-rooted at ``cfg.translations`` stratified
    positions of its stratum's root region (horizontal positions only in
    the upper half-plane, where vertical translations are not symmetries),
    restricted to the positions where its bounding box can cover a group.
    The average has the same expectation as the plain count and a much
    smaller variance.  Returns one array over strata per entry of
    ``strides`` (the path subsampled by that stride; default full and half
    resolution).
    """
    pts = np.asarray(points, dtype=complex)
    groups = [tuple(S) for _, S, _ in terms]
    paths, _, _, strata = candidate_loops(cfg, replica, pts, groups, translated=True)
    edges = duration_strata(cfg)
    out = np.zeros((len(strides), cfg.strata))
    if cfg.intensity == 0:
        return tuple(out)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(cfg.seed), int(replica), 1])))
    uhp = cfg.domain == "upper_half_plane"
    m = cfg.translations if uhp else max(1, int(round(math.sqrt(cfg.translations))))
    for i in range(len(paths)):
        k = int(strata[i])
        rx0, rx1, ry0, ry1 = _region(cfg, pts, EXCURSION_SIGMAS * math.sqrt(edges[k + 1]))
        root = paths[i][0]
        rel = paths[i] - root
        lx0, lx1, ly0, ly1 = rel.real.min(), rel.real.max(), rel.imag.min(), rel.imag.max()
        wx0 = wy0 = math.inf
        wx1 = wy1 = -math.inf
        for g in groups:
            gp = pts[list(g)]
            a, b = max(rx0, gp.real.max() - lx1), min(rx1, gp.real.min() - lx0)
            if uhp:
                c = d = root.imag
                hit = gp.imag.max() <= root.imag + ly1 and gp.imag.min() >= root.imag + ly0
            else:
                c, d = max(ry0, gp.imag.max() - ly1), min(ry1, gp.imag.min() - ly0)
                hit = d > c
            if b > a and hit:
                wx0, wx1 = min(wx0, a), max(wx1, b)
                wy0, wy1 = min(wy0, c), max(wy1, d)
        if not wx1 > wx0:
            continue
        if uhp:
            frac_area = (wx1 - wx0) / (rx1 - rx0)
        else:
            frac_area = (wx1 - wx0) * (wy1 - wy0) / ((rx1 - rx0) * (ry1 - ry0))
        w = _jitter(rng, (wx0, wx1, wy0, wy1), m, not uhp)
        if uhp:
            w = w.real + 1j * root.imag
        q = (pts[None, :] - w[:, None]).ravel()
        cell = default_cell(rel)
        for j, st in enumerate(strides):
            path = rel[::st]
            if uhp and (path + root).imag.min() <= 0:
                continue
            cov = fill_contains_many(path, q, st * cell).reshape(len(w), len(pts))
            val = sum(c * _event(cov, S, Sc).mean() for c, S, Sc in terms)
            out[j, k] += frac_area * val
    return tuple(out / cfg.intensity)


def estimate_weight_combination(cfg: SoupConfig, points, terms, quantity: str = "weights") -> Estimate:
    """Linear combination ``sum coef * alpha(S|Sc)`` estimated on one soup.

    ``terms`` is a list of ``(coef, S, Sc)`` with ``S``/``Sc`` index tuples
    into ``points``.  Each ``S`` must be nonempty.
    """
    for _, S, _ in terms:
        if not len(S):
            raise ValueError("each term needs a nonempty covered set S")
    pts = [complex(z) for z in points]
    terms = [(float(c), tuple(S), tuple(Sc)) for c, S, Sc in terms]
    res = np.array(_map_replicas(cfg, _weights_replica, pts, terms))  # (R, 2, strata)
    fine, half = res[:, 0], res[:, 1]
    m, se = _mean_se(_with_tail(cfg, _extrapolate(fine, half, cfg.richardson)))
    rm, rse = _mean_se(fine.sum(axis=1))
    return Estimate(quantity, m, se, cfg.replicas, rm, rse, cfg.hash())


def estimate_alpha(cfg: SoupConfig, S, Sc) -> Estimate:
    """Weight of loops filling every point of ``S`` and no point of ``Sc``."""
    S = [complex(z) for z in S]
    Sc = [complex(z) for z in Sc]
    if not S:
        raise ValueError("S must be nonempty")
    pts = S + Sc
    terms = [(1.0, tuple(range(len(S))), tuple(range(len(S), len(pts))))]
    return estimate_weight_combination(cfg, pts, terms, quantity="alpha")


# ---------------------------------------------------------------------------
# Correlators
# ---------------------------------------------------------------------------


def _corr_replica(cfg, replica, point_sets, betas):
    flat = [z for ps in point_sets for z in ps]
    groups = [(j,) for j in range(len(flat))]
    cov = replica_coverage(cfg, replica, flat, groups)
    out = []
    for cv in (cov.fine, cov.half):
        N = cov.signs @ cv if len(cov.signs) else np.zeros(len(flat))
        vals = []
        pos = 0
        for ps in point_sets:
            phase = sum(b * N[pos + j] for j, b in enumerate(betas))
            vals.append(complex(np.exp(1j * phase)))
            pos += len(ps)
        out.append(vals)
    return out  # [level][set]


def _corr_samples(cfg, point_sets, betas):
    ps = [[complex(z) for z in s] for s in point_sets]
    res = _map_replicas(cfg, _corr_replica, ps, list(betas))
    return np.array(res)  # (R, 2, nsets)


def _log_extrap_stats(vals_f: np.ndarray, vals_h: np.ndarray, signs: np.ndarray, on: bool):
    """Mean and delta-method stderr of sum_s signs[s] * log C_s (extrapolated)."""
    R = vals_f.shape[0]
    mf, mh = vals_f.mean(axis=0), vals_h.mean(axis=0)
    r = RICHARDSON_FACTOR if on else 0.0
    g_f = signs * (1.0 + r) / mf
    g_h = -signs * r / mh
    val = float(np.sum(signs * ((1.0 + r) * np.log(np.abs(mf)) - r * np.log(np.abs(mh)))))
    lin = vals_f @ g_f + vals_h @ g_h
    se = float(np.std(lin, ddof=1) / math.sqrt(R)) if R > 1 else math.nan
    return val, se


def estimate_correlator(cfg: SoupConfig, points, charges: ChargeVector) -> Estimate:
    """Layering correlator ``E[prod_j exp(i beta_j N(z_j))]``.

    The mean is the real part; the imaginary part is reported separately
    and should vanish.  The extrapolated value applies the two-level
    correction to ``log`` of the mean.
    """
    pts = [complex(z) for z in points]
    if len(pts) != len(charges):
        raise ValueError("one charge per point required")
    if all(b == 0 for b in charges.betas):
        h = cfg.hash()
        return Estimate("correlator", 1.0, 0.0, cfg.replicas, 1.0, 0.0, h, 0.0, 0.0)
    cfg = cfg.replace(intensity=charges.lam)
    s = _corr_samples(cfg, [pts], charges.betas)
    vf, vh = s[:, 0, 0], s[:, 1, 0]
    rm, rse = _mean_se(vf.real)
    im, ise = _mean_se(vf.imag)
    if cfg.richardson and rm > 0 and vh.real.mean() > 0:
        lv, lse = _log_extrap_stats(vf.real[:, None], vh.real[:, None], np.array([1.0]), True)
        m, se = math.exp(lv), math.exp(lv) * lse
    else:
        m, se = rm, rse
    return Estimate("correlator", m, se, cfg.replicas, rm, rse, cfg.hash(), im, ise)


def estimate_correlator_ratio(cfg: SoupConfig, points_a, points_b, charges: ChargeVector) -> Estimate:
    """Ratio of two correlators evaluated on the same soups."""
    cfg = cfg.replace(intensity=charges.lam)
    s = _corr_samples(cfg, [points_a, points_b], charges.betas).real
    sg = np.array([1.0, -1.0])
    lv, lse = _log_extrap_stats(s[:, 0, :], s[:, 1, :], sg, cfg.richardson)
    rv, rse = _log_extrap_stats(s[:, 0, :], s[:, 1, :], sg, False)
    return Estimate(
        "correlator_ratio", math.exp(lv), math.exp(lv) * lse, cfg.replicas,
        math.exp(rv), math.exp(rv) * rse, cfg.hash(),
    )


# ---------------------------------------------------------------------------
# alpha-bar
# ---------------------------------------------------------------------------


def _alpha_bar_replica(cfg, replica, z):
    cov = replica_coverage(cfg, replica, [z], [(0,)], min_diameter=1.0)
    if cfg.intensity == 0:
        return 0.0, 0.0
    f = np.sum(cov.fine[:, 0] & (cov.diam_fine >= 1.0)) / cfg.intensity
    h = np.sum(cov.half[:, 0] & (cov.diam_half >= 1.0)) / cfg.intensity
    return float(f), float(h)


def estimate_alpha_bar(cfg: SoupConfig) -> Estimate:
    """Weight of loops in H with diameter at least 1 whose fill contains i."""
    if cfg.domain != "upper_half_plane":
        raise ValueError("alpha-bar is defined in the upper half-plane")
    res = np.array(_map_replicas(cfg, _alpha_bar_replica, 1j))
    fine, half = res[:, 0], res[:, 1]
    m, se = _mean_se(_extrapolate(fine, half, cfg.richardson))
    rm, rse = _mean_se(fine)
    return Estimate("alpha_bar", m, se, cfg.replicas, rm, rse, cfg.hash())
