"""Tests for the Fourier representation layer."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steklovzeta.circle_fourier import (
    GridSampling,
    WeightFunction,
    antiderivative_mean_one,
    boundary_length,
    from_samples,
    load_weight,
    normalize,
    pointwise_map,
    samples_to_csv,
    save_weight,
    to_samples,
    trim,
)
from steklovzeta.errors import AliasingError, MeanNotOne, NonPositiveWeight

TWO_PI = 2.0 * math.pi


from conftest import seeded_weight

def grid(N):
    return TWO_PI * np.arange(N) / N


random_positive_weight = seeded_weight


# ---------------------------------------------------------------------------
# analysis / synthesis


def test_from_samples_constant():
    g = GridSampling(np.ones(8))
    a = from_samples(g)
    assert abs(a.coeff(0) - 1.0) < 1e-14
    assert all(abs(a.coeff(n)) < 1e-14 for n in range(1, a.M + 1))


def test_from_samples_cos2theta():
    g = GridSampling(np.cos(2 * grid(16)))
    a = from_samples(g)
    assert abs(a.coeff(2) - 0.5) < 1e-14
    assert abs(a.coeff(-2) - 0.5) < 1e-14
    assert abs(a.coeff(1)) < 1e-14


def test_from_samples_squared_cosine():
    # (1 + cos t)^2 = 3/2 + 2 cos t + (1/2) cos 2t, expanded by hand
    t = grid(32)
    a = from_samples(GridSampling((1 + np.cos(t)) ** 2))
    assert abs(a.coeff(0) - 1.5) < 1e-13
    assert abs(a.coeff(1) - 1.0) < 1e-13
    assert abs(a.coeff(-1) - 1.0) < 1e-13
    assert abs(a.coeff(2) - 0.25) < 1e-13
    assert abs(a.coeff(3)) < 1e-13


def test_to_samples_constant_and_cosine():
    ones = to_samples(WeightFunction.constant(1.0), 8)
    np.testing.assert_allclose(ones.values.real, 1.0, atol=1e-14)
    a = WeightFunction.from_modes({1: 0.5, -1: 0.5})
    vals = to_samples(a, 8)
    np.testing.assert_allclose(vals.values.real, np.cos(grid(8)), atol=1e-14)


def test_to_samples_aliasing_rejection():
    a = WeightFunction.from_modes({3: 0.1, -3: 0.1, 0: 1.0})
    with pytest.raises(AliasingError):
        to_samples(a, 8)  # needs >= 2*(2*3+1) = 14


def test_grid_must_be_power_of_two():
    with pytest.raises(ValueError):
        GridSampling(np.ones(12))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 6))
def test_round_trip_band_limited(seed, M):
    rng = np.random.default_rng(seed)
    coeffs = rng.standard_normal(2 * M + 1) + 1j * rng.standard_normal(2 * M + 1)
    a = WeightFunction(coeffs)
    N = 1 << (2 * (2 * M + 1) - 1).bit_length()
    back = from_samples(to_samples(a, N))
    for n in range(-back.M, back.M + 1):
        assert abs(back.coeff(n) - a.coeff(n)) < 1e-13


# ---------------------------------------------------------------------------
# pointwise maps


def test_sqrt_of_constant():
    a = pointwise_map(WeightFunction.constant(4.0), "sqrt")
    assert abs(a.coeff(0) - 2.0) < 1e-13
    assert a.min_value() > 1.99


def test_reciprocal_of_constant():
    a = pointwise_map(WeightFunction.constant(2.0), "reciprocal")
    assert abs(a.coeff(0) - 0.5) < 1e-13


def test_reciprocal_mean_against_quadrature():
    a = WeightFunction.from_modes({0: 1.0, 2: 0.25, -2: 0.25})  # 1 + cos(2t)/2
    r = pointwise_map(a, "reciprocal")
    # independent oracle: dense trapezoid quadrature of 1/(1 + cos(2t)/2)
    t = grid(1 << 14)
    oracle = np.mean(1.0 / (1.0 + 0.5 * np.cos(2 * t)))
    assert abs(r.coeff(0).real - oracle) < 1e-12
    assert abs(oracle - 2.0 / math.sqrt(3.0)) < 1e-12


def test_pointwise_power_matches_samples():
    a = random_positive_weight(5)
    b = pointwise_map(a, "power", exponent=3.0)
    t = grid(256)
    np.testing.assert_allclose(b(t).real, a(t).real ** 3, atol=1e-11)


def test_nonpositive_weight_rejected():
    bad = WeightFunction.from_modes({0: 1.0, 1: 0.8, -1: 0.8})  # 1 + 1.6 cos t
    with pytest.raises(NonPositiveWeight):
        pointwise_map(bad, "sqrt")
    with pytest.raises(NonPositiveWeight):
        boundary_length(bad)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_sqrt_squared_recovers_input(seed):
    a = random_positive_weight(seed)
    r = pointwise_map(a, "sqrt")
    t = grid(512)
    np.testing.assert_allclose(r(t).real ** 2, a(t).real, atol=1e-10)


# ---------------------------------------------------------------------------
# boundary length / normalization


def test_boundary_length_constants():
    assert abs(boundary_length(WeightFunction.constant(1.0)) - TWO_PI) < 1e-13
    assert abs(boundary_length(WeightFunction.constant(2.0)) - math.pi) < 1e-13


def test_boundary_length_of_moebius_weight():
    # 5/3 - (4/3) cos t is the disk-weight pullback along w = 1/2, so its
    # boundary length must be 2*pi; cross-checked against direct quadrature
    a = WeightFunction.from_modes({0: 5.0 / 3.0, 1: -2.0 / 3.0, -1: -2.0 / 3.0})
    L = boundary_length(a)
    t = grid(1 << 14)
    oracle = np.mean(1.0 / (5.0 / 3.0 - 4.0 / 3.0 * np.cos(t))) * TWO_PI
    assert abs(L - oracle) < 1e-12
    assert abs(L - TWO_PI) < 1e-10


def test_normalize_constant():
    a = normalize(WeightFunction.constant(2.0))
    assert abs(a.coeff(0) - 1.0) < 1e-13


def test_normalize_fixed_point():
    one = WeightFunction.constant(1.0)
    assert np.array_equal(normalize(one).coeffs, one.coeffs)


def test_normalize_perturbed_modulus_weight():
    # a = |1 + 0.2 e^{it}|^{-1}; the oracle for L is plain quadrature
    t = grid(1 << 12)
    vals = 1.0 / np.abs(1.0 + 0.2 * np.exp(1j * t))
    a = trim(from_samples(GridSampling(vals)))
    an = normalize(a)
    assert abs(boundary_length(an) - TWO_PI) < 1e-12
    assert "normalized" in an.meta


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_normalize_always_reaches_two_pi(seed):
    a = random_positive_weight(seed, scale=0.5)
    assert abs(boundary_length(normalize(a)) - TWO_PI) < 1e-12


# ---------------------------------------------------------------------------
# antiderivative


def test_antiderivative_of_one_is_identity():
    b = antiderivative_mean_one(WeightFunction.constant(1.0))
    t = grid(64)
    np.testing.assert_allclose(b(t), t, atol=1e-14)


def test_antiderivative_elementary():
    c = WeightFunction.from_modes({0: 1.0, 1: 0.5, -1: 0.5})  # 1 + cos t
    b = antiderivative_mean_one(c)
    t = grid(128)
    np.testing.assert_allclose(b(t), t + np.sin(t), atol=1e-13)
    assert abs(b(0.0)) == 0.0
    assert abs(b(TWO_PI) - TWO_PI) < 1e-12


def test_antiderivative_mean_must_be_one():
    with pytest.raises(MeanNotOne):
        antiderivative_mean_one(WeightFunction.constant(1.5))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_antiderivative_increasing_for_positive_density(seed):
    a = random_positive_weight(seed)
    c = pointwise_map(a, "reciprocal")
    c = WeightFunction(c.coeffs / c.coeff(0).real)
    b = antiderivative_mean_one(c)
    vals = b(grid(1024))
    assert np.all(np.diff(vals) > 0)


# ---------------------------------------------------------------------------
# metadata, persistence


def test_tail_ratio_and_min_value():
    a = WeightFunction.from_modes({0: 1.0, 3: 0.01, -3: 0.01})
    assert abs(a.tail_ratio - 0.01) < 1e-15
    assert abs(a.min_value() - 0.98) < 1e-12


def test_trim_drops_negligible_tail():
    c = np.zeros(21, dtype=complex)
    c[10] = 1.0
    c[12] = 0.3
    c[8] = 0.3
    c[20] = 1e-16
    c[0] = 1e-16
    a = trim(WeightFunction(c))
    assert a.M == 2


def test_weight_json_round_trip(tmp_path):
    a = random_positive_weight(11)
    path = tmp_path / "w.json"
    save_weight(a, path)
    b = load_weight(path)
    assert a == b
    blob = json.loads(path.read_text())
    assert all(n >= 0 for n, _, _ in blob["coeffs"])  # Hermitian completion implied


def test_samples_csv(tmp_path):
    g = to_samples(WeightFunction.constant(2.0), 8)
    path = tmp_path / "s.csv"
    samples_to_csv(g, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "theta,value"
    assert len(lines) == 9


def test_weights_are_immutable_and_hashable():
    a = random_positive_weight(3)
    with pytest.raises(ValueError):
        a.coeffs[0] = 1.0
    assert hash(a) == hash(WeightFunction(a.coeffs.copy()))
