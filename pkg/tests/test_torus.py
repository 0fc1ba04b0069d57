import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from schrodecay.errors import InvalidArgumentError, InvariantError
from schrodecay.torus import (ComplexTorusField, DiffusionSpec, TorusField, apply_shifted_generator,
                              evaluate_field, lyapunov_tau, parse_field, resolvent,
                              sample_brownian_path)


def tau_cos_closed_form(E):
    # |g_1|^2 = (1/4) / (1/4 + 4E) for each of the modes +-1, n^2 = 1
    return 2 * 0.25 / (0.25 + 4 * E) / (8 * E)


def test_tau_closed_form_matches_hand_sum():
    for E in (0.25, 1.0, 4.0):
        assert tau_cos_closed_form(E) == pytest.approx(1 / (4 * E * (1 + 16 * E)), rel=1e-14)
        assert lyapunov_tau(TorusField.cosine(), DiffusionSpec(), E) == pytest.approx(
            1 / (4 * E * (1 + 16 * E)), rel=1e-12, abs=0)


def test_tau_at_one_is_one_over_68():
    assert abs(lyapunov_tau(TorusField.cosine(), DiffusionSpec(), 1.0) - 1 / 68) < 1e-12


def test_tau_zero_field_and_decrease():
    spec = DiffusionSpec()
    assert lyapunov_tau(TorusField.zero(), spec, 1.0) == 0.0
    assert lyapunov_tau(TorusField.cosine(), spec, 100.0) < lyapunov_tau(TorusField.cosine(), spec, 1.0)


def test_tau_rejects_nonpositive_energy():
    with pytest.raises(InvalidArgumentError):
        lyapunov_tau(TorusField.cosine(), DiffusionSpec(), 0.0)


@given(st.floats(0.1, 10), st.floats(0.01, 50))
def test_tau_quadratic_homogeneity(c, E):
    spec = DiffusionSpec()
    base = lyapunov_tau(TorusField.cosine(), spec, E)
    assert lyapunov_tau(TorusField.cosine(c), spec, E) == pytest.approx(c * c * base, rel=1e-12)


def test_tau_by_quadrature_of_gradient():
    # independent: evaluate g on a grid, differentiate spectrally-free by finite
    # differences, and integrate |g'|^2 against normalized Haar measure
    F = parse_field("fourier:1=0.3-0.2j,2=0.25,3=0.1j")
    spec = DiffusionSpec(1.7)
    E = 0.8
    g = resolvent(F, spec, math.sqrt(E))
    x = np.linspace(0, 2 * math.pi, 4096, endpoint=False)
    dx = x[1] - x[0]
    gx = g(x)
    grad = (np.roll(gx, -1) - np.roll(gx, 1)) / (2 * dx)
    integral = np.mean(np.abs(grad) ** 2)
    assert lyapunov_tau(F, spec, E) == pytest.approx(integral / (8 * E), rel=1e-5)


def test_resolvent_cos_coefficients():
    g = resolvent(TorusField.cosine(), DiffusionSpec(), 1.0)
    expected = 0.5 / (-0.5 + 2j)
    assert abs(g[1] - expected) < 1e-15 and abs(g[-1] - expected) < 1e-15
    assert g[0] == 0


@given(st.dictionaries(st.integers(1, 6), st.complex_numbers(max_magnitude=5, allow_nan=False,
                                                           allow_infinity=False), min_size=1),
       st.floats(0.05, 20), st.floats(0.1, 4))
def test_resolvent_round_trip(coeffs, kappa, sigma2):
    F = TorusField.from_positive_modes(coeffs)
    spec = DiffusionSpec(sigma2)
    back = apply_shifted_generator(resolvent(F, spec, kappa), spec, kappa)
    scale = max(np.abs(F.coeffs).max(), 1e-300)
    assert np.max(np.abs(back.coeffs - F.coeffs)) <= 1e-14 * scale * 4


def test_resolvent_zero_field():
    g = resolvent(TorusField.zero(), DiffusionSpec(), 2.0)
    assert not np.any(g.coeffs)


def test_field_invariants_enforced():
    with pytest.raises(InvariantError):
        TorusField.from_modes({0: 1.0, 1: 0.5, -1: 0.5})
    with pytest.raises(InvariantError):
        TorusField.from_modes({1: 0.5, -1: 0.4})
    bad = ComplexTorusField(np.array([0.5, 0, 0.5j]), 1)
    with pytest.raises(InvariantError):
        TorusField(bad.coeffs, 1)


def test_evaluate_field_examples():
    F = TorusField.cosine()
    vals = evaluate_field(F, np.array([0.0, math.pi / 2]))
    assert vals[0] == pytest.approx(1.0, abs=1e-15)
    assert vals[1] == pytest.approx(0.0, abs=1e-15)
    assert not np.any(evaluate_field(TorusField.zero(), np.linspace(0, 6, 7)))


def test_parse_field_variants():
    x = np.linspace(0, 6, 13)
    assert np.allclose(evaluate_field(parse_field("sin"), x), np.sin(x), atol=1e-15)
    assert np.allclose(evaluate_field(parse_field("2.5*cos"), x), 2.5 * np.cos(x), atol=1e-14)
    f = parse_field("fourier:2=0.5")
    assert np.allclose(evaluate_field(f, x), np.cos(2 * x), atol=1e-14)
    with pytest.raises(InvalidArgumentError):
        parse_field("tan")


def test_path_start_length_and_determinism():
    p = sample_brownian_path(1.0, 1.0, DiffusionSpec(), seed=3)
    assert len(p.values) == 2 and p.values[0] == 0.0
    a = sample_brownian_path(10, 0.01, seed=42)
    b = sample_brownian_path(10, 0.01, seed=42)
    assert len(a.values) == 1001
    assert np.array_equal(a.values, b.values)
    assert np.all((a.values >= 0) & (a.values < 2 * math.pi))


def test_path_rejects_bad_arguments():
    for T, dt in ((0, 0.1), (1, 0), (1, 2)):
        with pytest.raises(InvalidArgumentError):
            sample_brownian_path(T, dt)


def test_increment_variance_and_kurtosis():
    sigma2, dt = 1.3, 0.01
    inc = np.concatenate([sample_brownian_path(1.0, dt, DiffusionSpec(sigma2), s).increments()
                          for s in range(1000)])
    assert inc.size == 100000
    var = inc.var()
    # SE of the sample variance of Gaussians: var * sqrt(2 / n)
    assert abs(var - sigma2 * dt) < 5 * sigma2 * dt * math.sqrt(2 / inc.size)
    kurt = np.mean((inc - inc.mean()) ** 4) / var ** 2
    assert abs(kurt - 3) < 5 * math.sqrt(24 / inc.size)
    assert abs(inc.mean()) < 5 * math.sqrt(sigma2 * dt / inc.size)
