import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twisted_targets import fourier
from twisted_targets.errors import InvalidInput
from twisted_targets.fourier import Atomic, Density, Lebesgue, SelfSimilar
from twisted_targets.orbit import FixedPointAlpha, RationalAlpha, star_discrepancy

CANTOR = SelfSimilar.middle_third()
SPECS = [
    Lebesgue(),
    Atomic((0.5,), (1.0,)),
    Atomic((0.1, 0.7, 0.9), (0.2, 0.3, 0.5)),
    Density.indicator(0.0, 0.5),
    Density(((0.0, 1.0, (0.0, 2.0)),)),
    Density(((0.0, 1.0, (0.0, 6.0, -6.0)),)),
    CANTOR,
    SelfSimilar(4, (0, 3)),
]


def quad_ft(pieces, xi, n=20_000):
    """Midpoint-rule oracle for piecewise-polynomial densities."""
    total = 0j
    for lo, hi, cs in pieces:
        x = lo + (np.arange(n) + 0.5) * (hi - lo) / n
        total += np.sum(np.polynomial.polynomial.polyval(x, cs) * np.exp(2j * np.pi * xi * x)) * (hi - lo) / n
    return total


def test_lebesgue_examples():
    assert fourier.fourier_transform(Lebesgue(), 5) == 0
    assert fourier.fourier_transform(Lebesgue(), 0) == 1


def test_atom_at_half():
    for xi in (1, 2, 3.5, -7.25, 1e6 + 0.5):
        v = fourier.fourier_transform(Atomic((0.5,), (1.0,)), xi)
        assert v == pytest.approx(cmath.exp(1j * math.pi * xi), abs=1e-9)
        assert abs(v) == pytest.approx(1.0)


@pytest.mark.parametrize("mu", SPECS, ids=lambda m: type(m).__name__)
def test_normalized_and_bounded(mu):
    assert fourier.fourier_transform(mu, 0) == pytest.approx(1.0, abs=1e-14)
    xis = np.random.default_rng(1).uniform(-5000, 5000, 1000)
    vals = np.abs(fourier.fourier_many(mu, xis))
    assert np.all(vals <= 1 + 1e-12)


@pytest.mark.parametrize("mu", [s for s in SPECS if isinstance(s, Density)], ids=str)
@pytest.mark.parametrize("xi", [0.3, 1, 2.5, 17, 123.4])
def test_density_against_quadrature(mu, xi):
    assert fourier.fourier_transform(mu, xi) == pytest.approx(quad_ft(mu.pieces, xi), abs=1e-6)


def test_cantor_self_similarity():
    base = abs(fourier.fourier_transform(CANTOR, 1))
    for k in range(13):
        assert abs(abs(fourier.fourier_transform(CANTOR, 3**k)) - base) <= 1e-9


@settings(max_examples=100)
@given(st.floats(-1e4, 1e4, allow_nan=False))
def test_cantor_refinement_identity(xi):
    lhs = fourier.fourier_transform(CANTOR, 3 * xi)
    rhs = 0.5 * (1 + cmath.exp(4j * math.pi * xi)) * fourier.fourier_transform(CANTOR, xi)
    assert abs(lhs - rhs) <= 1e-10


def test_vectorized_integer_path_matches_scalar():
    xis = np.arange(-300, 300, 7, dtype=np.int64)
    many = fourier.fourier_many(CANTOR, xis)
    one = np.array([fourier.fourier_transform(CANTOR, int(x)) for x in xis])
    np.testing.assert_allclose(many, one, atol=1e-13)


def test_error_bound_reported():
    assert fourier.fourier_error_bound(CANTOR, 1000.0) <= 1e-13
    assert fourier.fourier_error_bound(Lebesgue(), 3.3) == 0.0


def test_decay_examples():
    assert fourier.decay_exponent_estimate(Lebesgue(), 4096).infinite
    assert fourier.decay_exponent_estimate(Atomic((0.3,), (1.0,)), 4096).tau == pytest.approx(0, abs=0.05)
    assert fourier.decay_exponent_estimate(CANTOR, 3**12).tau == pytest.approx(0, abs=0.05)
    assert fourier.decay_exponent_estimate(Density.indicator(0, 0.5), 4096).tau == pytest.approx(1, abs=0.15)
    smooth = Density(((0.0, 1.0, (0.0, 6.0, -6.0)),))
    assert fourier.decay_exponent_estimate(smooth, 4096).tau == pytest.approx(2, abs=0.15)
    with pytest.raises(InvalidInput):
        fourier.decay_exponent_estimate(CANTOR, 8)


def test_sample_examples():
    assert np.all(fourier.sample(Atomic((0.5,), (1.0,)), 100, 3) == 0.5)
    x = fourier.sample(Lebesgue(), 10**6, 4)
    assert star_discrepancy(x) <= 0.005


def test_cantor_samples_have_no_middle_digit():
    for x in fourier.sample_exact(CANTOR, 50, 9, precision=40):
        for _ in range(40):
            x *= 3
            d = int(x)
            assert d != 1
            x -= d


def test_density_samples_follow_law():
    mu = Density(((0.0, 1.0, (0.0, 2.0)),))
    x = np.sort(fourier.sample(mu, 200_000, 5))
    # CDF x^2: Kolmogorov distance
    ecdf = np.arange(1, x.size + 1) / x.size
    assert np.max(np.abs(ecdf - x**2)) < 0.005


def test_sample_is_seeded():
    a = fourier.sample(CANTOR, 100, 42)
    b = fourier.sample(CANTOR, 100, 42)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, fourier.sample(CANTOR, 100, 43))


def test_sample_alphas_types():
    leb = fourier.sample_alphas(Lebesgue(), 3, 1, bits=256)
    assert all(isinstance(a, FixedPointAlpha) and a.exact and a.bits == 256 for a in leb)
    cant = fourier.sample_alphas(CANTOR, 3, 1)
    assert all(isinstance(a, RationalAlpha) for a in cant)


def test_invalid_measures():
    with pytest.raises(InvalidInput):
        Atomic((0.5,), (0.7,))
    with pytest.raises(InvalidInput):
        Density(((0.0, 1.0, (2.0,)),))
    with pytest.raises(InvalidInput):
        Density(((0.0, 1.0, (3.0, -4.0)),))
    with pytest.raises(InvalidInput):
        SelfSimilar(3, (0, 5))


def test_measure_from_dict():
    assert fourier.measure_from_dict({"kind": "cantor"}) == CANTOR
    for mu in SPECS:
        assert fourier.measure_from_dict(mu.to_dict()) == mu
