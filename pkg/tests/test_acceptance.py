"""Acceptance suite at full scale.

Each criterion runs at its stated size and tolerance and prints one
pass/fail line (run with ``pytest tests/test_acceptance.py -v -s``).  The
whole module takes ~10-15 minutes on the compiled backend; the two heavy
shared fixtures (the stationary jump chain and the comparison table) are
built once.
"""

import pytest

from ratchet import validate
from ratchet.params import SimGrid
from ratchet.validate import FULL, _BASE_SEED


@pytest.fixture(scope="module")
def stationary_run():
    return validate._stationary_run(FULL, _BASE_SEED)


@pytest.fixture(scope="module")
def compare_table():
    from ratchet.estimation import compare_models
    grid = SimGrid(dt=FULL.dt, horizon=FULL.compare_horizon,
                   seed=_BASE_SEED + 7)
    return compare_models(0.5, FULL.compare_deltas, grid, FULL.compare_n)


def _report(res):
    print()
    print(res.line())
    for line in res.detail_lines():
        print(line)
    assert res.passed, res.line()


def test_criterion_01_golden_delta0_speed():
    _report(validate.criterion_1_golden(FULL))


def test_criterion_02_model2_terminal_vs_ode():
    _report(validate.criterion_2_model2_vs_ode(FULL))


def test_criterion_03_renewal_identities(stationary_run):
    _report(validate.criterion_3_renewal_identities(FULL,
                                                    _shared=stationary_run))


def test_criterion_04_stationary_density(stationary_run):
    _report(validate.criterion_4_stationary_density(FULL,
                                                    _shared=stationary_run))


def test_criterion_05_killed_bm_oracle():
    _report(validate.criterion_5_killed_bm(FULL))


def test_criterion_06_scaling_collapse():
    _report(validate.criterion_6_scaling(FULL))


def test_criterion_07_model_comparison(compare_table):
    _report(validate.criterion_7_compare(FULL, _shared=compare_table))


def test_criterion_08_pathwise_domination():
    _report(validate.criterion_8_domination(FULL))


def test_criterion_09_coupling():
    _report(validate.criterion_9_coupling(FULL))


def test_criterion_10_numerics_invariants():
    _report(validate.criterion_10_numerics(FULL))


def test_criterion_11_positive_speed(compare_table):
    _report(validate.criterion_11_positive_speed(FULL, _shared=compare_table))
