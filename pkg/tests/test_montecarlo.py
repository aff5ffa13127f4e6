import math
import textwrap

import numpy as np
import pytest

from loopsoup.correlators import ChargeVector
from loopsoup.montecarlo import (
    ConfigError,
    SoupConfig,
    estimate_alpha,
    estimate_alpha_bar,
    estimate_correlator,
    expected_loop_count,
    fill_contains,
    flood_fill_contains,
    load_config,
    outer_boundary,
    sample_soup,
)
from loopsoup.montecarlo import _pykernels, fill
from loopsoup.montecarlo.estimators import estimate_weight_combination, tail_factor
from loopsoup.montecarlo.fill import OnPathError, filled_area, winding_number
from loopsoup.montecarlo.sampler import brownian_bridges, hull_diameter, replica_rng, stratum_steps

try:
    from loopsoup.montecarlo import _kernels
except ImportError:  # pragma: no cover - compiled extension missing
    _kernels = None

SMALL = dict(t_min=0.05, t_max=2.0, strata=3, steps_per_loop=64, coarse_steps=8, window=(-2, 2, -2, 2))


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------


@pytest.mark.parametrize(
    "bad",
    [
        dict(intensity=-1.0),
        dict(domain="disk"),
        dict(t_min=1.0, t_max=0.5),
        dict(t_min=0.0),
        dict(steps_per_loop=32),
        dict(steps_per_loop=100),
        dict(coarse_steps=1024),
        dict(window=(1, 0, 0, 1)),
        dict(domain="upper_half_plane", window=(-1, 1, -1, 1)),
        dict(replicas=0),
        dict(max_steps_per_loop=512),
        dict(tail_strata=9),
        dict(translations=-1),
        dict(max_step=-0.1),
        dict(seed=-1),
    ],
)
def test_config_rejects_invalid(bad):
    with pytest.raises(ConfigError):
        SoupConfig(**bad)


def test_config_hash_and_replace():
    a = SoupConfig(seed=3)
    assert a.hash() == SoupConfig(seed=3).hash()
    assert a.hash() != a.replace(seed=4).hash()
    assert a.as_dict()["window"] == [-3.0, 3.0, -3.0, 3.0]


def test_load_config(tmp_path):
    p = tmp_path / "soup.ini"
    p.write_text(textwrap.dedent("""
        [soup]
        intensity = 0.5      # lambda
        domain = upper_half_plane
        t_min = 0.02
        t_max = 20
        window = -4, 4, 0, 6
        seed = 99
        replicas = 7
        richardson = no
        """))
    cfg = load_config(p)
    assert cfg.intensity == 0.5 and cfg.domain == "upper_half_plane"
    assert cfg.window == (-4.0, 4.0, 0.0, 6.0) and cfg.seed == 99 and cfg.richardson is False
    p.write_text("[soup]\nbogus = 1\n")
    with pytest.raises(ConfigError, match="unknown key"):
        load_config(p)
    p.write_text("[soup]\nreplicas = many\n")
    with pytest.raises(ConfigError, match="bad value"):
        load_config(p)
    p.write_text("[other]\nseed = 1\n")
    with pytest.raises(ConfigError):
        load_config(p)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.ini")


def test_stratum_steps():
    cfg = SoupConfig(steps_per_loop=64, max_step=0.1, max_steps_per_loop=1024)
    assert stratum_steps(cfg, 0.5) == 64
    assert stratum_steps(cfg, 2.0) == 256
    assert stratum_steps(cfg, 1e6) == 1024
    assert stratum_steps(cfg.replace(max_step=0.0), 1e6) == 64


# --------------------------------------------------------------------------
# sampling
# --------------------------------------------------------------------------


def test_zero_intensity_is_empty():
    cfg = SoupConfig(intensity=0.0, **SMALL)
    assert all(sample_soup(cfg, r) == [] for r in range(5))


def test_poisson_mean():
    cfg = SoupConfig(intensity=1.0, t_min=0.5, t_max=1.0, strata=1, steps_per_loop=64, coarse_steps=8,
                     window=(0, 2, 0, 2))
    mean = expected_loop_count(cfg)
    assert mean == pytest.approx(4 / (2 * math.pi) * (2 - 1))
    counts = np.array([len(sample_soup(cfg, r)) for r in range(10_000)])
    assert abs(counts.mean() - mean) < 4 * math.sqrt(mean / len(counts))
    assert counts.var() == pytest.approx(mean, rel=0.1)


def test_loop_sample_invariants():
    cfg = SoupConfig(seed=5, **SMALL)
    loops = sample_soup(cfg, 0)
    assert loops
    for lp in loops[:20]:
        assert lp.path[0] == lp.path[-1]
        assert lp.sign in (-1, 1)
        assert cfg.t_min <= lp.duration <= cfg.t_max
        brute = np.max(np.abs(lp.path[:, None] - lp.path[None, :]))
        assert lp.diameter == pytest.approx(brute, rel=1e-12)


def test_half_plane_soup_avoids_axis():
    cfg = SoupConfig(domain="upper_half_plane", seed=2, **{**SMALL, "window": (-2, 2, 0, 2)})
    loops = [lp for r in range(5) for lp in sample_soup(cfg, r)]
    assert loops and all(lp.path.imag.min() > 0 for lp in loops)


def test_determinism():
    cfg = SoupConfig(seed=11, **SMALL)
    a, b = sample_soup(cfg, 3), sample_soup(cfg, 3)
    assert len(a) == len(b) and all(np.array_equal(x.path, y.path) for x, y in zip(a, b))
    assert not np.array_equal(sample_soup(cfg, 4)[0].path, a[0].path)


def test_scale_invariance_of_diameters():
    stats = pytest.importorskip("scipy.stats")
    rng1, rng2 = replica_rng(1, 0), replica_rng(2, 0)
    t = np.full(2000, 1.0)
    d1 = [hull_diameter(p) for p in brownian_bridges(rng1, t, 128)]
    d2 = [hull_diameter(p) / 2 for p in brownian_bridges(rng2, 4 * t, 128)]
    assert stats.ks_2samp(d1, d2).pvalue > 0.01


def test_bridge_variance():
    rng = replica_rng(0, 0)
    p = brownian_bridges(rng, np.full(4000, 2.0), 64)
    assert np.all(p[:, 0] == 0) and np.all(p[:, -1] == 0)
    # bridge variance per coordinate at mid-time is t s (1 - s) = 0.5
    assert np.var(p[:, 32].real) == pytest.approx(0.5, rel=0.1)


# --------------------------------------------------------------------------
# filled interiors
# --------------------------------------------------------------------------


def circle(n=256, r=1.0):
    t = np.linspace(0, 2 * math.pi, n + 1)
    z = r * np.exp(1j * t)
    z[-1] = z[0]
    return z


def pocket_loop():
    """Big square counter-clockwise, then a small inner square clockwise.

    The connectors cross transversally, and the only part of the big square
    left out of the fill is the triangle (0, 0.2i, 0.56 + 0.76i) of area 0.056.
    """
    big = [0, 4, 4 + 4j, 4j, 0.2j]
    small = [1 + 1.2j, 1.1 + 3j, 3 + 3.1j, 3.05 + 1j, 0.7 + 0.95j]
    return np.array(big + small + [0], complex)


def test_fill_basic():
    c = circle()
    assert fill_contains(c, 0j)
    assert not fill_contains(c, 3 + 0j)
    assert not fill_contains(c, 0.9 + 0.9j)
    with pytest.raises(OnPathError):
        fill_contains(c, c[5])


def test_fill_pocket_with_zero_winding():
    p = pocket_loop()
    z = 2 + 2j
    assert winding_number(p, z) == 0
    assert fill_contains(p, z)
    assert flood_fill_contains(p, z, resolution=1024)
    assert not fill_contains(p, 5 + 2j)


def test_outer_boundary_and_area():
    b = outer_boundary(pocket_loop())
    assert filled_area(pocket_loop()) == pytest.approx(16.0 - 0.056, rel=1e-12)
    assert np.all(np.abs(b.real - 2) <= 2 + 1e-12)
    assert filled_area(circle(4096)) == pytest.approx(math.pi, rel=1e-5)


def test_fill_matches_flood_fill_on_brownian_loops():
    rng = replica_rng(7, 0)
    paths = brownian_bridges(rng, np.ones(5), 512)
    for p in paths:
        pts = rng.uniform(-0.8, 0.8, 40) + 1j * rng.uniform(-0.8, 0.8, 40)
        exact = fill.fill_contains_many(p, pts)
        flood = np.array([flood_fill_contains(p, z, resolution=2048) for z in pts])
        # rasterization can only close channels, never open them
        assert np.all(flood[exact])
        assert np.mean(exact != flood) <= 0.05


@pytest.mark.skipif(_kernels is None, reason="compiled extension not built")
def test_backends_agree():
    rng = replica_rng(3, 0)
    for p in brownian_bridges(rng, np.ones(4), 1024):
        xs, ys = np.ascontiguousarray(p.real), np.ascontiguousarray(p.imag)
        cell = fill.default_cell(p)
        bc = _kernels.outer_boundary(xs, ys, cell)
        bp = _pykernels.outer_boundary(xs, ys, cell)
        assert _kernels.polygon_area(*bc) == pytest.approx(_pykernels.polygon_area(*bp), rel=1e-12)
        px, py = rng.uniform(-1, 1, 300), rng.uniform(-1, 1, 300)
        a = np.asarray(_kernels.fill_contains_many(xs, ys, px, py, cell), bool)
        b = np.asarray(_pykernels.fill_contains_many(xs, ys, px, py, cell), bool)
        assert np.array_equal(a, b)
        assert len(_kernels.find_intersections(xs, ys, cell)[0]) == len(_pykernels.find_intersections(xs, ys)[0])
        for z in (0.1 + 0.2j, -0.5j):
            assert _kernels.winding_number(xs, ys, z.real, z.imag) == _pykernels.winding_number(xs, ys, z.real, z.imag)


# --------------------------------------------------------------------------
# estimators
# --------------------------------------------------------------------------

EST = dict(t_min=0.05, t_max=5.0, strata=4, steps_per_loop=128, coarse_steps=16, window=(-10, 10, -10, 10), replicas=6)


def test_zero_intensity_estimates_are_zero():
    cfg = SoupConfig(intensity=0.0, **EST)
    e = estimate_alpha(cfg, [0j, 1 + 0j], [])
    assert e.mean == 0.0 and e.stderr == 0.0 and e.raw_mean == 0.0


def test_trivial_correlator_is_one():
    e = estimate_correlator(SoupConfig(**EST), [0j, 1j], ChargeVector((0.0, 0.0), 1.0))
    assert e.mean == 1.0 and e.stderr == 0.0


def test_counting_identity_per_replica():
    """alpha(z1) = alpha(z1|z2) + alpha(z1, z2) holds exactly on every soup."""
    cfg = SoupConfig(seed=4, **EST)
    terms = [(1.0, (0,), ()), (-1.0, (0,), (1,)), (-1.0, (0, 1), ())]
    e = estimate_weight_combination(cfg, [0j, 0.5 + 0j], terms)
    assert e.mean == 0.0 and e.raw_mean == 0.0
    single = estimate_alpha(cfg, [0j], [])
    assert single.raw_mean > 0


def test_sign_symmetry():
    cfg = SoupConfig(seed=8, richardson=False, **EST)
    a = estimate_correlator(cfg, [0j, 1 + 0j], ChargeVector((1.2, -1.2), 1.0))
    b = estimate_correlator(cfg, [0j, 1 + 0j], ChargeVector((-1.2, 1.2), 1.0))
    assert a.mean == pytest.approx(b.mean, abs=1e-12)
    assert a.imag_mean == pytest.approx(-b.imag_mean, abs=1e-12)


def test_worker_count_does_not_change_results():
    cfg = SoupConfig(seed=21, **EST)
    a = estimate_alpha(cfg, [0j, 0.5j], [])
    b = estimate_alpha(cfg.replace(workers=2), [0j, 0.5j], [])
    assert a.mean == b.mean and a.stderr == b.stderr


def test_translation_averaging_is_consistent():
    base = dict(EST, replicas=200, t_min=0.2, t_max=3.2, strata=4, richardson=False)
    plain = estimate_alpha(SoupConfig(seed=1, **base), [0j, 0.5 + 0j], [])
    trans = estimate_alpha(SoupConfig(seed=1, translations=16, **base), [0j, 0.5 + 0j], [])
    se = math.hypot(plain.stderr, trans.stderr)
    assert abs(plain.mean - trans.mean) < 4 * se
    assert trans.stderr < plain.stderr


def test_tail_factor():
    cfg = SoupConfig(t_min=1.0, t_max=2.0**8, strata=8, tail_strata=2)
    assert tail_factor(cfg) == pytest.approx(1 / (2 ** (2 / 3) - 1))
    assert tail_factor(cfg.replace(tail_strata=0)) == 0.0


def test_alpha_bar_positive():
    cfg = SoupConfig(domain="upper_half_plane", t_min=0.2, t_max=20.0, strata=4, steps_per_loop=128,
                     coarse_steps=16, window=(-20, 20, 0, 20), replicas=150, seed=3,
                     richardson=False)
    e = estimate_alpha_bar(cfg)
    assert e.raw_mean > 0 and e.record()["quantity"] == "alpha_bar"
    with pytest.raises(ValueError):
        estimate_alpha_bar(SoupConfig(**EST))


def test_estimate_record_fields():
    e = estimate_alpha(SoupConfig(seed=2, **EST), [0j, 1j], [])
    rec = e.record()
    for key in ("quantity", "mean", "stderr", "n_replicas", "config_hash"):
        assert key in rec
    assert rec["n_replicas"] == EST["replicas"]
