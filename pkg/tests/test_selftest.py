from __future__ import annotations

import pytest

from double_aztec import __version__
from double_aztec.selftest import DEFAULT_SEED, CheckResult, SelfTest, format_report

BASE_CHECKS = [
    "scaling_constants",
    "m_exponent_identity",
    "rank_one_identities",
    "gap_vs_enumeration_2_0",
    "gap_vs_enumeration_4_1",
    "line_trace_8_2",
    "representations_8_2",
    "representations_12_3",
    "saddle_vs_em_8_2",
    "orthogonality_8_2",
    "norm_identity_8_2",
    "c_function_8_2",
    "toeplitz_borodin_okounkov",
    "airy_t_squared",
    "airy_resolvent_equation",
    "tacnode_forms",
    "tacnode_form_iii",
    "shuffle_chi_square_az2",
    "mcmc_vs_exact_2_0",
]


def test_check_order_is_fixed() -> None:
    assert [check.name for check in SelfTest().checks()] == BASE_CHECKS
    assert [check.name for check in SelfTest(full=True).checks()] == [*BASE_CHECKS, "convergence_trend"]


def test_p_value_checks_are_lower_bounds() -> None:
    bounds = {check.name: check.lower_bound for check in SelfTest(full=True).checks()}
    assert bounds["shuffle_chi_square_az2"]
    assert bounds["mcmc_vs_exact_2_0"]
    assert bounds["convergence_trend"]
    assert not bounds["rank_one_identities"]


@pytest.mark.parametrize("name", ["gap_vs_enumeration_2_0", "orthogonality_8_2", "norm_identity_8_2", "c_function_8_2"])
def test_exact_checks_pass(name: str) -> None:
    check = {check.name: check for check in SelfTest().checks()}[name]
    assert check.compute() <= check.tolerance


def test_format_report() -> None:
    results = [
        CheckResult("scaling_constants", 1.5e-12, 1e-10, True),
        CheckResult("shuffle_chi_square_az2", 0.42, 0.01, True),
        CheckResult("tacnode_forms", None, 1e-6, False, "NoDecay"),
    ]
    lines = format_report(results, 7).splitlines()
    assert lines[0] == f"double-aztec {__version__} selftest, seed 7"
    assert lines[1].startswith("PASS  scaling_constants ")
    assert lines[1].endswith("1.500e-12  tol 1.0e-10")
    assert lines[2].endswith("4.200e-01  tol 1.0e-02")
    assert lines[3].startswith("FAIL  tacnode_forms ")
    assert "NoDecay" in lines[3]
    assert lines[-1] == "2/3 checks passed"
    assert len({len(line) for line in lines[1:3]}) == 1


def test_format_report_has_no_timestamp() -> None:
    report = format_report([CheckResult("scaling_constants", 0.0, 1e-12, True)], DEFAULT_SEED)
    assert report == format_report([CheckResult("scaling_constants", 0.0, 1e-12, True)], DEFAULT_SEED)
    assert report.endswith("1/1 checks passed\n")


@pytest.mark.slow
def test_selftest_is_reproducible() -> None:
    first = SelfTest().run()
    second = SelfTest().run()
    assert all(result.passed for result in first)
    assert format_report(first, DEFAULT_SEED) == format_report(second, DEFAULT_SEED)
