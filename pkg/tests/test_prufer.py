import math

import numpy as np
import pytest
from scipy.integrate import simpson, solve_ivp

from schrodecay import kernels
from schrodecay.decay import DecayProfile
from schrodecay.errors import InvalidArgumentError, StepSizeError
from schrodecay.experiment import realization_seed
from schrodecay.fd import assemble, eigenvalues_in
from schrodecay.prufer import (final_phase, integrate, renormalized_rho, rho_tilde_ensemble,
                               sde_diagnostics, shoot_eigenvalues)
from schrodecay.torus import TorusField, sample_brownian_path


def run_constant(c, kappa, dt, N):
    qn = np.full((1, N + 1), c)
    qm = np.full((1, N), c)
    th, rh, _ = kernels.prufer_batch(qn, qm, dt, np.array([kappa]), np.arange(N + 1, dtype=np.intp))
    return th[0], rh[0]


def test_free_flow_is_linear():
    path = sample_brownian_path(20.0, 0.01, seed=1)
    tr = integrate(path, TorusField.zero(), DecayProfile(0.5), 1.3, 20.0)
    assert np.allclose(tr.theta, 1.3 * tr.times, rtol=1e-12, atol=1e-12)
    assert not np.any(tr.rho)


def test_constant_potential_against_reference_ode():
    c, kappa, dt, N = 0.2, 2.0, 0.01, 500

    def rhs(t, y):
        s, co = math.sin(y[0]), math.cos(y[0])
        return [kappa - c / kappa * s * s, c * s * co / kappa]

    ref = solve_ivp(rhs, (0, N * dt), [0.0, 0.0], rtol=1e-12, atol=1e-13,
                    t_eval=dt * np.arange(N + 1))
    th, rh = run_constant(c, kappa, dt, N)
    assert np.max(np.abs(th - ref.y[0])) < 1e-8
    assert np.max(np.abs(rh - ref.y[1])) < 1e-8
    # leading-order small-coupling form
    t = dt * N
    approx = kappa * t - c / kappa * (t / 2 - math.sin(2 * kappa * t) / (4 * kappa))
    assert abs(th[-1] - approx) < 5 * (c / kappa) ** 2 * t


def test_rho_equals_quadrature_of_theta():
    # smooth potential so the quadrature error is far below the tolerance
    dt, N, kappa = 1e-3, 20000, 1.0
    t = dt * np.arange(N + 1)
    q = 0.5 * np.cos(0.3 * t)
    qm = 0.5 * np.cos(0.3 * (t[:-1] + dt / 2))
    th, rh, _ = kernels.prufer_batch(q[None, :], qm[None, :], dt, np.array([kappa]),
                                     np.arange(N + 1, dtype=np.intp))
    quad = simpson(q * np.sin(2 * th[0]), x=t) / (2 * kappa)
    assert abs(rh[0, -1] - quad) < 1e-10


def test_step_size_guard():
    path = sample_brownian_path(10.0, 0.5, seed=0)
    with pytest.raises(StepSizeError):
        integrate(path, TorusField.cosine(), DecayProfile(0.5), 1.0, 10.0)


def test_theta_monotone_in_kappa():
    path = sample_brownian_path(100.0, 0.01, seed=3)
    ks = np.linspace(0.3, 2.0, 60)
    th = final_phase(path, TorusField.cosine(), DecayProfile(0.5), ks, 100.0)
    assert np.all(np.diff(th) > 0)


def test_shooting_free_case_exact():
    L = 10.0
    path = sample_brownian_path(L + 1e-3, 1e-3, seed=0)
    sp = shoot_eigenvalues(path, TorusField.zero(), DecayProfile(0.5), L, (0.05, 4.5))
    k = np.sqrt(sp.energies)
    assert np.max(np.abs(k - np.arange(1, 7) * math.pi / L)) < 1e-10
    assert sp.first_index == 0


def test_shooting_count_is_phase_difference():
    L = 100.0
    path = sample_brownian_path(L + 0.01, 0.01, seed=8)
    F, D = TorusField.cosine(), DecayProfile(0.5)
    J = (0.6, 2.2)
    th = final_phase(path, F, D, np.sqrt(J), L)
    sp = shoot_eigenvalues(path, F, D, L, J)
    assert len(sp) == math.floor(th[1] / math.pi) - math.floor(th[0] / math.pi)


def test_shooting_matches_finite_differences():
    # 20 independent realizations, matched by eigenvalue index
    L, h = 200.0, 1e-3
    F, D = TorusField.cosine(), DecayProfile(0.5)
    worst = 0.0
    for i in range(20):
        path = sample_brownian_path(L + h, h, seed=realization_seed(99, i))
        fd = eigenvalues_in(assemble(path, F, D, L, h), (0.9, 1.1))
        sh = shoot_eigenvalues(path, F, D, L, (0.9, 1.1))
        assert fd.first_index == sh.first_index and len(fd) == len(sh)
        worst = max(worst, float(np.max(np.abs(fd.energies - sh.energies))))
    assert worst < 1e-6


def test_rho_tilde_zero_field():
    path = sample_brownian_path(100.0, 0.05, seed=2)
    r = renormalized_rho(path, TorusField.zero(), DecayProfile(0.5), 100.0, 1.0, 0.0, [0.25, 1.0])
    assert not np.any(r.samples) and r.tau == 0.0


def test_sde_zero_field_gives_zero_moments():
    seeds = [realization_seed(1, i) for i in range(10)]
    ens = rho_tilde_ensemble(TorusField.zero(), DecayProfile(0.5), 200.0, 1.0, 0.0, [0.25, 1.0],
                             10, seeds)
    d = sde_diagnostics(ens, 0.25, 1.0)
    assert (d.drift, d.qv) == (0.0, 0.0)


def test_t_grid_validation():
    path = sample_brownian_path(100.0, 0.05, seed=2)
    with pytest.raises(InvalidArgumentError):
        renormalized_rho(path, TorusField.cosine(), DecayProfile(0.5), 100.0, 1.0, 0.0, [0.5, 0.25])


def _ensemble(n, lam, k=300, master=11, grid=(0.25, 0.5, 1.0)):
    seeds = [realization_seed(master, i) for i in range(k)]
    return rho_tilde_ensemble(TorusField.cosine(), DecayProfile(0.5), n, 1.0, lam, list(grid), k, seeds)


@pytest.mark.xfail(strict=True, reason="the centering misses an O(1) offset from the "
                   "strong-coupling start-up; the t=1 mean stays near 0.32 for every n")
def test_rho_tilde_mean_at_one_small():
    ens = _ensemble(2000.0, 0.0, k=500)
    x = np.array([r.at(1.0) for r in ens])
    assert abs(x.mean()) < 3 * x.std(ddof=1) / math.sqrt(x.size) + 0.05


def test_rho_tilde_mean_bounded_in_n():
    means = []
    for n in (100.0, 500.0, 2000.0):
        x = np.array([r.at(1.0) for r in _ensemble(n, 0.0, k=200)])
        means.append((x.mean(), x.std(ddof=1) / math.sqrt(x.size)))
    (m0, s0), (m2, s2) = means[0], means[-1]
    assert abs(m2 - m0) < 4 * math.hypot(s0, s2)
    assert all(abs(m) < 1.0 for m, _ in means)


def test_lambda_shift_bounded():
    sups = []
    for n in (500.0, 2000.0):
        a, b = _ensemble(n, 0.0, k=100), _ensemble(n, 1.0, k=100)
        sups.append(np.mean([np.max(np.abs(x.samples - y.samples)) for x, y in zip(a, b)]))
    assert sups[1] < 2 * sups[0] + 0.05


def test_variance_additivity():
    ens = _ensemble(500.0, 0.0, k=400)
    whole = sde_diagnostics(ens, 0.25, 1.0)
    p1 = sde_diagnostics(ens, 0.25, 0.5)
    p2 = sde_diagnostics(ens, 0.5, 1.0)
    se = math.sqrt(whole.se_qv ** 2 + p1.se_qv ** 2 + p2.se_qv ** 2)
    assert abs(whole.qv - (p1.qv + p2.qv)) < 3 * se
