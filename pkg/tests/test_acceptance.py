"""Acceptance criteria, each at its stated tolerance.

Every test prints one ``[PASS]``/``[FAIL]`` line (visible even under output
capture) and then asserts. The coverage criteria share one 20 000-replication
Monte Carlo run, which dominates the wall time of this module.
"""

import pytest

from d2d_underlay import acceptance
from d2d_underlay.config import SweepConfig

RESULTS = {}


def _report(capsys, result):
    RESULTS[result.number] = result
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.detail


def test_criterion_1_mode_probability_vs_mc(capsys):
    _report(capsys, acceptance.mode_probability_agreement())


def test_criterion_2_mode_probability_anchor(capsys):
    _report(capsys, acceptance.mode_probability_anchor())


@pytest.mark.slow
def test_criterion_3_coverage_vs_mc(capsys):
    _report(capsys, acceptance.coverage_agreement())


@pytest.mark.slow
def test_criterion_4_d2d_coverage_flat(capsys):
    _report(capsys, acceptance.d2d_flatness())


@pytest.mark.slow
def test_criterion_5_optimal_beta(capsys):
    _report(capsys, acceptance.optimal_threshold(SweepConfig()))


def test_criterion_6_cf_inversion_oracles(capsys):
    _report(capsys, acceptance.cf_oracles())


def test_criterion_7_equivalent_distance_ks(capsys):
    _report(capsys, acceptance.equivalence_ks())


@pytest.mark.slow
def test_criterion_8_identities_and_determinism(capsys):
    _report(capsys, acceptance.identities(SweepConfig()))
