import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twisted_targets import independence as ind
from twisted_targets.errors import InvalidInput, Unsupported
from twisted_targets.independence import StripEvent
from twisted_targets.model import ConstantPsi, PolynomialSequence, PowerPsi, TablePsi

half_widths = st.floats(0.0, 0.5)


def test_overlap_examples():
    assert ind.overlap_function(0.1, 0.1, 0.0) == pytest.approx(0.2)
    assert ind.overlap_function(0.1, 0.1, 0.5) == 0.0
    assert ind.overlap_function(0.1, 0.05, 0.12) == pytest.approx(0.03)


@given(half_widths, half_widths, st.floats(0, 1, exclude_max=True))
def test_overlap_profile_matches_arc_algebra(r1, r2, d):
    assert ind.overlap_profile(r1, r2, d) == pytest.approx(ind.overlap_function(r1, r2, d), abs=1e-12)


def test_strip_examples():
    m, n = StripEvent(3, 9, 0.1), StripEvent(5, 25, 0.05)
    assert ind.strip_intersection_measure(m, n) == pytest.approx(0.02, abs=1e-15)
    assert ind.strip_intersection_measure(StripEvent(3, 9, 0.0), n) == 0.0
    big = ind.strip_intersection_measure(StripEvent(1, 1, 0.4), StripEvent(2, 4, 0.4))
    assert big == pytest.approx(0.64, abs=1e-15)


def test_strip_event_validation():
    with pytest.raises(InvalidInput):
        StripEvent(1, 1, 0.6)
    with pytest.raises(InvalidInput):
        StripEvent(1, 0, 0.1)
    assert StripEvent.of(1, 1, 3.0).half_width == 0.5
    with pytest.raises(Unsupported):
        ind.strip_intersection_measure(StripEvent(1, 4, 0.1), StripEvent(2, 4, 0.1))


@given(half_widths, half_widths)
def test_independence_exact(r1, r2):
    got = ind.strip_intersection_measure(StripEvent(1, 3, r1), StripEvent(2, 11, r2))
    assert abs(got - 4 * r1 * r2) <= 1e-12


@pytest.mark.parametrize("r1,r2,s1,s2", [(0.1, 0.05, 1, 4), (0.4, 0.4, 2, 9), (0.3, 0.02, 5, 17),
                                         (0.45, 0.2, 1, 21)])
def test_quadrature_cross_check(r1, r2, s1, s2):
    # smooth quadrature over alpha only resolves modest slope differences
    q = ind.strip_intersection_by_quadrature(StripEvent(1, s1, r1), StripEvent(2, s2, r2))
    assert q == pytest.approx(4 * r1 * r2, abs=1e-8)


def test_monte_carlo_cross_check():
    m, n = StripEvent(1, 1, 0.4), StripEvent(2, 4, 0.4)
    p, se = ind.strip_intersection_monte_carlo(m, n, 10**7, np.random.default_rng(2024))
    assert abs(p - 0.64) <= 3 * se


def test_stratified_monte_carlo_is_unbiased():
    m, n = StripEvent(1, 3, 0.2), StripEvent(2, 10, 0.3)
    p, se = ind.strip_intersection_monte_carlo(m, n, 10**6, np.random.default_rng(8), stratified=True)
    assert abs(p - 0.24) <= 3 * se


def test_report_examples():
    rep = ind.independence_report(PolynomialSequence(), PowerPsi(2), [(m, m + 7) for m in range(1, 60)])
    assert rep.max_deviation <= 1e-10 and not rep.degenerate
    rep = ind.independence_report(PolynomialSequence(), TablePsi((0.0, 0.3)), [(1, 2)])
    assert rep.rows[0].deviation == 0.0
    rep = ind.independence_report(PolynomialSequence(), ConstantPsi(0.2), [(3, 3), (1, 2)])
    assert rep.degenerate == [(3, 3)] and len(rep.rows) == 1


def test_report_csv(tmp_path):
    rep = ind.independence_report(PolynomialSequence(d=2), PowerPsi(1), [(1, 2), (2, 5)])
    rep.write_csv(tmp_path / "i.csv")
    assert (tmp_path / "i.csv").read_text().splitlines()[0] == "m,n,computed,expected,deviation"
