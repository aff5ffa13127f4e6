import cmath
import math

import mpmath as mp
import numpy as np
import pytest

from loopsoup.weights import (
    PARTITIONS,
    CutoffConstants,
    CutoffError,
    GeometryError,
    HalfPlanePair,
    a_of_x,
    alpha_s_closed_form,
    alpha_s_linear_system,
    cross_ratio,
    geometry,
    nacu_werner,
    one_not_other_halfplane,
    pair_weight_halfplane,
    permutation_equations,
    thinness_sum_halfplane,
)

mp.mp.dps = 30
THIRD = mp.mpf(1) / 3


def f3(x):
    return mp.hyp3f2(1, 1, 4 * THIRD, 2, 5 * THIRD, x)


def mp_a(x):
    """A(x) evaluated independently in extended precision."""
    x = mp.mpc(x)
    kappa = 2 * mp.cbrt(2) * mp.pi**2 / (mp.sqrt(3) * mp.gamma(THIRD / 2) ** 2 * mp.gamma(4 * THIRD) ** 2)
    first = (x * f3(x) + mp.conj(x) * f3(mp.conj(x))) / 4
    second = kappa * abs(x * (1 - x)) ** (2 * THIRD) * abs(mp.hyp2f1(2 * THIRD, 1, 4 * THIRD, x)) ** 2
    return float(mp.re(first) - second)


def mp_pair_sigma(s):
    s = mp.mpf(s)
    return float(-(mp.log(s) + (1 - s) * f3(1 - s)) / 10)


def mp_pair_eta(e):
    e = mp.mpf(e)
    ee = e * (e - 1)
    val = (
        -mp.pi / (5 * mp.sqrt(3))
        - e * f3(e) / 10
        - mp.log(ee) / 10
        + mp.gamma(2 * THIRD) ** 2 / (5 * mp.gamma(4 * THIRD)) * mp.cbrt(ee) * mp.hyp2f1(1, 2 * THIRD, 4 * THIRD, e)
    )
    return float(val)


def random_pair(rng):
    return HalfPlanePair(complex(rng.uniform(-2, 2), rng.uniform(0.1, 3)), complex(rng.uniform(-2, 2), rng.uniform(0.1, 3)))


def test_geometry_pins():
    g = geometry(HalfPlanePair(1j, 2j))
    assert g.eta == pytest.approx(-1 / 8, abs=1e-15)
    assert g.sigma == pytest.approx(1 / 9, abs=1e-15)
    g = geometry(HalfPlanePair(1 + 1j, -1 + 1j))
    assert g.eta.real == pytest.approx(-1.0, abs=1e-15)  # |2|^2 / ((2i)(2i))
    assert g.sigma == pytest.approx(g.eta.real / (g.eta.real - 1), abs=1e-12)


def test_geometry_invariants_and_errors(rng):
    for _ in range(50):
        g = geometry(random_pair(rng))
        assert g.eta.real <= 0 and abs(g.eta.imag) == 0
        assert abs(g.sigma - g.eta.real / (g.eta.real - 1)) < 1e-12
    assert geometry(HalfPlanePair(1j, 1j + 1e-9)).sigma < 1e-15
    with pytest.raises(GeometryError):
        HalfPlanePair(1j, 1j)
    with pytest.raises(GeometryError):
        HalfPlanePair(1j, 1.0)


def test_pair_weight_against_mpmath():
    p = HalfPlanePair(1j, 2j)
    assert pair_weight_halfplane(p) == pytest.approx(mp_pair_sigma(1 / 9), rel=1e-12)
    assert pair_weight_halfplane(p, "eta") == pytest.approx(mp_pair_eta(-1 / 8), rel=1e-12)
    assert pair_weight_halfplane(p) == pytest.approx(0.04662054738141937, rel=1e-12)


def test_pair_weight_two_forms_agree(rng):
    for _ in range(20):
        p = random_pair(rng)
        assert abs(pair_weight_halfplane(p, "eta") - pair_weight_halfplane(p, "sigma")) < 1e-9
    with pytest.raises(ValueError):
        pair_weight_halfplane(HalfPlanePair(1j, 2j), "nope")


def test_pair_weight_positive_monotone_and_vanishing():
    ladder = [pair_weight_halfplane(HalfPlanePair(1j, 1j + d)) for d in (0.1, 0.3, 1.0, 3.0, 10.0, 30.0)]
    assert all(v > 0 for v in ladder)
    assert all(a > b for a, b in zip(ladder, ladder[1:]))
    assert pair_weight_halfplane(HalfPlanePair(1j, 1e4 + 1j)) < 1e-6  # sigma -> 1


def test_one_not_other_sum_rule_and_cutoff():
    p = HalfPlanePair(1j, 2j)
    c = CutoffConstants(0.1, 0.3)
    total = one_not_other_halfplane(p, c) + pair_weight_halfplane(p)
    assert total == pytest.approx(0.2 * math.log(2.0 / 0.2) + 0.3, abs=1e-14)
    half = one_not_other_halfplane(p, CutoffConstants(0.05, 0.3))
    assert half - one_not_other_halfplane(p, c) == pytest.approx(0.2 * math.log(2), abs=1e-14)
    # regression pin from the formula
    assert one_not_other_halfplane(p, CutoffConstants(0.1, 0.0)) == pytest.approx(
        -mp_pair_sigma(1 / 9) + 0.2 * math.log(2) - 0.2 * math.log(0.2), abs=1e-12
    )
    with pytest.raises(CutoffError):
        one_not_other_halfplane(p, CutoffConstants(1.5))
    with pytest.raises(CutoffError):
        CutoffConstants(0.0)


def test_thinness_sum(rng):
    c = CutoffConstants(0.01, 0.2)
    for _ in range(20):
        p = random_pair(rng)
        if min(abs(p.z1 - p.z2), p.z1.imag, p.z2.imag) < 0.01:
            continue
        pr = HalfPlanePair(p.z2, p.z1)
        assert abs(thinness_sum_halfplane(p, c) - one_not_other_halfplane(p, c) - one_not_other_halfplane(pr, c)) < 1e-10


def test_thinness_sum_bulk_limit():
    c = CutoffConstants(0.01, 0.0)
    res = []
    for t in (1e2, 1e3, 1e4):
        z1, z2 = 0.3j + 1j * t, 1.7 + 0.5j + 1j * t
        target = 0.4 * math.log(abs(z1 - z2)) + 2 * c.q
        res.append(abs(thinness_sum_halfplane(HalfPlanePair(z1, z2), c) - target))
    # the approach is slow (like sigma^(1/3), i.e. t^(-2/3) here)
    assert res[2] < 5e-3
    assert res[0] / res[1] > 3 and res[1] / res[2] > 3


def test_nacu_werner():
    c = CutoffConstants(1e-3, 0.4)
    z1 = 0.3 + 0.1j
    assert nacu_werner(z1, z1 + math.e, c) - nacu_werner(z1, z1 + 1.0, c) == pytest.approx(0.2, abs=1e-14)
    assert nacu_werner(z1, 2j, c) == nacu_werner(2j, z1, c)
    assert nacu_werner(0, 1j, c) == pytest.approx(c.q, abs=1e-15)
    assert c.q == pytest.approx(math.pi / (5 * math.sqrt(3)) - 0.2 * math.log(2e-3) + 0.4, abs=1e-14)
    with pytest.raises(CutoffError):
        nacu_werner(0, 1e-4, c)


def test_cross_ratio_and_mobius_invariance(rng):
    sq = (0, 1, 1 + 1j, 1j)
    x = cross_ratio(*sq)
    assert x == pytest.approx(((0 - 1) * (1 + 1j - 1j)) / ((0 - 1 - 1j) * (1 - 1j)), abs=1e-15)
    assert abs(x) > 0 and abs(1 - x) > 0
    for _ in range(20):
        z = [complex(*rng.normal(size=2)) for _ in range(4)]
        x = cross_ratio(*z)
        assert abs((1 - x) - (z[0] - z[3]) * (z[1] - z[2]) / ((z[0] - z[2]) * (z[1] - z[3]))) < 1e-12
        a, b, r = complex(*rng.normal(size=2)), complex(*rng.normal(size=2)), rng.normal()
        for f in (lambda w: a * w + b, lambda w: 1 / (w - r)):
            assert abs(cross_ratio(*[f(w) for w in z]) - x) < 1e-10 * max(1, abs(x))
    assert abs(cross_ratio(0, 1, 2j, 2j + 1e-9)) < 1e-8
    assert abs(cross_ratio(0, 1, 1 + 1e-9, 2j) - 1) < 1e-8
    with pytest.raises(GeometryError):
        cross_ratio(0, 1, 1, 2)


def test_a_of_x_against_mpmath(rng):
    for _ in range(40):
        x = complex(*rng.uniform(-3, 3, 2))
        assert a_of_x(x) == pytest.approx(mp_a(x), abs=1e-11)
        assert a_of_x(x) == pytest.approx(a_of_x(x.conjugate()), abs=1e-13)
    assert a_of_x(2.5) == pytest.approx(mp_a(2.5 + 1e-30j), abs=1e-11)


def test_a_of_x_limits_and_inversion(rng):
    assert a_of_x(0) == 0 and a_of_x(1) == 0
    assert abs(a_of_x(1e-6)) < 1e-4 and abs(a_of_x(1 - 1e-6)) < 1e-4
    for _ in range(50):
        x = complex(*rng.uniform(-3, 3, 2))
        assert abs(a_of_x(x) - a_of_x(1 / x) + math.log(abs(x))) < 1e-9


def mp_alpha_square(delta):
    z = [0, 1, 1 + 1j, 1j]
    x = cross_ratio(*z)
    A = mp_a(x)
    q = float(mp.pi / (5 * mp.sqrt(3)) - mp.log(2 * delta) / 5)
    la = lambda w: math.log(abs(w))  # noqa: E731
    z1, z2, z3, z4 = z
    return {
        "1|234": 0.2 * (la((z1 - z2) * (z1 - z4) / (z2 - z4)) + A) + q,
        "13|24": -0.2 * A,
        "12|34": -0.2 * (la(x) + A),
        "14|23": -0.2 * (la(1 - x) + A),
    }


def test_alpha_square_pins():
    s = alpha_s_closed_form(0, 1, 1 + 1j, 1j, CutoffConstants(0.05, 0.0))
    for k, v in mp_alpha_square(0.05).items():
        assert s[k] == pytest.approx(v, abs=1e-12)
    # square symmetry: the four single-point weights coincide
    singles = [s[k] for k in PARTITIONS[:4]]
    assert max(singles) - min(singles) < 1e-12
    assert s["13|24"] == pytest.approx(-a_of_x(cross_ratio(0, 1, 1 + 1j, 1j)) / 5, abs=1e-15)


def test_alpha_s_relations_and_degeneration(rng):
    c = CutoffConstants(1e-3, 0.1)
    for _ in range(20):
        z = [complex(*rng.uniform(-2, 2, 2)) for _ in range(4)]
        s = alpha_s_closed_form(*z, c)
        lhs = s["1|234"] + s["2|134"] + s["13|24"] + s["14|23"]
        assert lhs == pytest.approx(0.4 * math.log(abs(z[0] - z[1])) + 2 * c.q, abs=1e-10)
        M, rhs = permutation_equations(*z, c)
        assert np.max(np.abs(M @ s.as_array() - rhs)) < 1e-10
        sv = np.linalg.svd(M, compute_uv=False)
        assert np.linalg.matrix_rank(M) == 6 and sv[-1] > 1e-3
        lin = alpha_s_linear_system(*z, c)
        assert np.max(np.abs(lin.as_array() - s.as_array())) < 1e-9
    # rectangle collapsing pairwise (z4 -> z1, z3 -> z2): nothing passes between the pairs
    for eps in (1e-2, 1e-4):
        s = alpha_s_closed_form(0, 1, 1 + 1j * eps, 1j * eps, CutoffConstants(eps / 10))
        assert abs(s["13|24"]) < 5 * eps ** (2 / 3)


def test_two_vs_two_weights_are_mobius_invariant(rng):
    c = CutoffConstants(1e-4)
    z = [complex(*rng.uniform(-2, 2, 2)) for _ in range(4)]
    s = alpha_s_closed_form(*z, c)
    a = 1.7 * cmath.exp(0.4j)
    w = [a * v + (0.3 - 2j) for v in z]
    t = alpha_s_closed_form(*w, c)
    for k in ("12|34", "13|24", "14|23"):
        assert t[k] == pytest.approx(s[k], abs=1e-12)
    for k in PARTITIONS[:4]:
        assert t[k] - s[k] == pytest.approx(0.2 * math.log(abs(a)), abs=1e-12)
