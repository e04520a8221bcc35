import pytest

from confnodal.conformal import FamilySpec
from confnodal.verify import conformal_invariance_suite


@pytest.fixture(scope="module")
def tuned_report():
    return conformal_invariance_suite(8, 3, FamilySpec(0, 0.5, 3))


def test_tuned_suite_passes(tuned_report):
    r = tuned_report
    assert r["passed"] and r["failed"] == []
    assert {c["name"] for c in r["checks"]} == {"nu_invariant", "lambda1_sign_invariant",
                                               "kernel_dimension_invariant", "lp_invariant_constant",
                                               "nodal_signs_invariant"}
    assert all(m["nu"] == 1 and m["kernel_dimension"] == 1 for m in r["members"])
    assert len(r["members"]) == 3


def test_flat_suite_passes():
    r = conformal_invariance_suite(8, 3, FamilySpec(0, 0.5, 2), flat_base=True)
    assert r["passed"] and r["tuning"] is None
    assert all(m["nu"] == 0 and m["kernel_dimension"] == 1 for m in r["members"])


def test_injected_bug_is_caught():
    r = conformal_invariance_suite(8, 3, FamilySpec(0, 0.5, 2), inject_bug=True)
    assert not r["passed"]
    assert "nu_invariant" in r["failed"]
    # only the last member carries the bug
    assert r["members"][0]["nu"] == 1 and r["members"][-1]["nu"] != 1


def test_refinement_study():
    r = conformal_invariance_suite(8, 3, FamilySpec(0, 0.5, 1), refine=True)
    fits = r["covariance_refinement"]
    assert len(fits) == 1 and 2.5 <= fits[0]["ratio"] <= 6.0
    assert any(c["name"] == "covariance_order" for c in r["checks"])


def test_four_torus():
    r = conformal_invariance_suite(8, 4, FamilySpec(0, 0.4, 2), flat_base=True)
    assert r["passed"]
