from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twisted_targets import orbit
from twisted_targets.errors import InvalidInput, PrecisionError
from twisted_targets.model import GeometricSequence, PolynomialSequence, TableSequence
from twisted_targets.orbit import FixedPointAlpha, RationalAlpha
from twisted_targets.torus_arcs import ArcSet

LINEAR = PolynomialSequence()
SQUARES = PolynomialSequence(d=2)


def frac_discrepancy(points):
    """Exact star discrepancy of rational points, brute force over candidate anchors."""
    xs = sorted(points)
    N = len(xs)
    best = Fraction(0)
    for i, x in enumerate(xs, 1):
        best = max(best, Fraction(i, N) - x, x - Fraction(i - 1, N))
    return best


def test_rational_cycle():
    s = orbit.orbit_points(RationalAlpha(1, 3), LINEAR, 1, 3)
    assert s.points.tolist() == [1 / 3, 2 / 3, 0.0]
    assert s.error_bound == 0.0


def test_zero_alpha():
    s = orbit.orbit_points(RationalAlpha(0, 1), SQUARES, 1, 50)
    assert not s.points.any()


def test_rational_alpha_validation():
    with pytest.raises(InvalidInput):
        RationalAlpha(2, 4)
    with pytest.raises(InvalidInput):
        RationalAlpha(3, 2)
    assert RationalAlpha.of(Fraction(7, 3)) == RationalAlpha(1, 3)


def test_sqrt2_orbit_certified_against_double_precision():
    a = orbit.constant_alpha("sqrt2-1", 256)
    s = orbit.orbit_points(a, SQUARES, 1, 10_000)
    assert s.error_bound <= 2.0**-64
    hi = orbit.orbit_points(orbit.constant_alpha("sqrt2-1", 512), SQUARES, 1, 10_000)
    idx = [0, 1, 99, 4_999, 9_999]
    # compare exact residues as fractions, not the float rendering
    for i in idx:
        lo_x = Fraction(s.residues[i], s.scale)
        hi_x = Fraction(hi.residues[i], hi.scale)
        d = abs(lo_x - hi_x)
        assert min(d, 1 - d) <= Fraction(1, 1 << 64)


def test_precision_error_names_bits():
    a = orbit.constant_alpha("sqrt2-1", 64)
    with pytest.raises(PrecisionError) as exc:
        orbit.orbit_points(a, SQUARES, 1, 10**6)
    assert exc.value.required_bits == orbit.required_bits(10**12)
    assert str(exc.value.required_bits) in str(exc.value)


def test_auto_precision_widens_named_constants():
    a = orbit.constant_alpha("golden", 64)
    b = orbit.auto_precision(a, SQUARES, 10**6)
    assert b.bits >= orbit.required_bits(10**12)
    assert orbit.orbit_points(b, SQUARES, 1, 10).error_bound <= 2.0**-64


def test_exact_dyadic_needs_no_guard_bits():
    a = FixedPointAlpha(bits=8, mantissa=3, exact=True)
    s = orbit.orbit_points(a, SQUARES, 1, 1000)
    assert s.error_bound == 0.0
    want = [(n * n * 3 % 256) / 256 for n in range(1, 1001)]
    assert s.points.tolist() == want


def test_parse_alpha_forms():
    assert orbit.parse_alpha("1/3") == RationalAlpha(1, 3)
    assert orbit.parse_alpha("0.25") == RationalAlpha(1, 4)
    assert orbit.parse_alpha("golden[512]").bits == 512
    assert float(orbit.parse_alpha("sqrt2-1")) == pytest.approx(2**0.5 - 1, abs=2e-16)
    assert float(orbit.parse_alpha("pi-3")) == pytest.approx(np.pi - 3, abs=1e-15)
    with pytest.raises(InvalidInput):
        orbit.parse_alpha("banana")


def test_star_discrepancy_examples():
    assert orbit.star_discrepancy([0, 0.25, 0.5, 0.75]) == 0.25
    assert orbit.star_discrepancy([0.0]) == 1.0
    with pytest.raises(InvalidInput):
        orbit.star_discrepancy([])


def test_sqrt2_linear_discrepancy():
    s = orbit.orbit_points(orbit.constant_alpha("sqrt2-1"), LINEAR, 1, 10_000)
    assert orbit.star_discrepancy(s.points) <= 0.01


def test_one_third_discrepancy_exact():
    s = orbit.orbit_points(RationalAlpha(1, 3), LINEAR, 1, 10_000)
    assert set(s.points.tolist()) == {0.0, 1 / 3, 2 / 3}
    want = frac_discrepancy([Fraction(n, 3) % 1 for n in range(1, 10_001)])
    assert want == Fraction(1, 3) + Fraction(1, 30_000)
    assert orbit.star_discrepancy(s.points) == pytest.approx(float(want), abs=1e-15)


@given(st.lists(st.fractions(0, 1).filter(lambda x: x < 1), min_size=1, max_size=40))
def test_star_discrepancy_matches_fraction_oracle(xs):
    got = orbit.star_discrepancy(np.array([float(x) for x in xs]))
    assert got == pytest.approx(float(frac_discrepancy(xs)), abs=1e-12)
    assert 1 / len(xs) / 2 <= got <= 1


def test_local_count_examples():
    pts = np.arange(1000) / 1000
    assert orbit.local_count(pts, ArcSet.full()) == 1000
    assert orbit.local_count(pts, ArcSet.empty()) == 0
    assert abs(orbit.local_count(pts, ArcSet.from_intervals([(0.15, 0.45)])) - 300) <= 1


def test_orbit_csv(tmp_path):
    s = orbit.orbit_points(RationalAlpha(1, 4), TableSequence((1, 2, 3)), 1, 3)
    s.write_csv(tmp_path / "o.csv")
    lines = (tmp_path / "o.csv").read_text().splitlines()
    assert lines[0] == "n,a_n,x_n" and len(lines) == 4


def test_huge_denominators_keep_certified_bound():
    a = GeometricSequence(1, 2)
    alpha = orbit.auto_precision(orbit.constant_alpha("golden"), a, 3000)
    s = orbit.orbit_points(alpha, a, 1, 3000)
    assert 0 < s.error_bound <= 2.0**-64
