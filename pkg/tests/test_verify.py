import math

import pytest

from loopsoup.verify import SUITE_CHARGES, run_identity_suite, unit_limit_3f2
from loopsoup.correlators import conserves_charge


def test_suite_charges_conserve():
    assert all(conserves_charge(b) for b in SUITE_CHARGES)


def test_unit_limit_extrapolation():
    target = 2 * math.pi / math.sqrt(3)
    assert abs(unit_limit_3f2() - target) < 1e-9
    # fewer elimination terms are less accurate but still converge
    assert abs(unit_limit_3f2(terms=3) - target) < 1e-4


def test_identity_suite_passes():
    rep = run_identity_suite()
    assert rep["passed"], [c for c in rep["identities"] if not c["passed"]]
    for c in rep["identities"]:
        assert c["max_residual"] < 1e-9 and c["n"] > 0


def test_identity_suite_deterministic():
    a, b = run_identity_suite(seed=0), run_identity_suite(seed=0)
    assert [c["max_residual"] for c in a["identities"]] == [c["max_residual"] for c in b["identities"]]


@pytest.mark.parametrize("eps", [1e-6, -1e-6, 1e-3])
def test_mu_perturbation_breaks_crossing(eps):
    rep = run_identity_suite(mu_perturbation=eps)
    by_name = {c["name"]: c for c in rep["identities"]}
    assert not rep["passed"]
    assert not by_name["crossing-x-to-1-minus-x"]["passed"]
    # identities that do not involve the constant are unaffected
    assert by_name["pair-weight-two-forms"]["passed"]
    assert by_name["weights-linear-system"]["passed"]
