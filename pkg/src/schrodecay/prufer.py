"""Prufer phase/log-radius integration, shooting eigenvalues and SDE moments.

For ``-x'' + q x = kappa^2 x`` write ``x = r sin(theta)``,
``x'/kappa = r cos(theta)`` and ``rho = log r``:

    theta' = kappa - (q / kappa) sin(theta)^2
    rho'   = q sin(2 theta) / (2 kappa)

with ``theta_0 = 0`` (Dirichlet at the left end) and ``rho_0 = 0``.
Between path samples the potential is interpolated linearly.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .decay import DecayProfile, evaluate_a, integral_a_squared
from .errors import InvalidArgumentError, NumericalError, StepSizeError
from .fd import SpectrumWindow
from .torus import (DiffusionSpec, DisorderPath, TorusField, evaluate_field,
                    lyapunov_tau, sample_brownian_path)

MAX_STEP_FRACTION = 0.1
JUMP_GUARD = math.pi / 2


@dataclass(frozen=True, eq=False)
class PruferTrajectory:
    dt: float
    kappa: float
    theta: np.ndarray
    rho: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(len(self.theta))


@dataclass(frozen=True, eq=False)
class RenormalizedRho:
    n: float
    kappa0: float
    lam: float
    t_grid: np.ndarray
    samples: np.ndarray
    tau: float
    centering: float

    @property
    def kappa(self) -> float:
        return self.kappa0 + self.lam / self.n

    def at(self, t: float) -> float:
        i = np.flatnonzero(np.isclose(self.t_grid, t, rtol=0, atol=1e-12))
        if i.size == 0:
            raise InvalidArgumentError(f"t={t} is not on the recorded grid")
        return float(self.samples[i[0]])


def _check_step(dt, kappa_max):
    if dt > MAX_STEP_FRACTION / kappa_max * (1 + 1e-12):
        raise StepSizeError(
            f"dt={dt:g} too large for kappa={kappa_max:g}; use dt <= {MAX_STEP_FRACTION / kappa_max:g}")


def potential_samples(path: DisorderPath, field: TorusField, profile: DecayProfile,
                      T: float, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """``q = a F(X)`` at ``k*dt`` (k = 0..N) and at the step midpoints."""
    N = int(round(T / dt))
    if N < 1 or abs(N * dt - T) > 1e-9 * max(1.0, T):
        raise InvalidArgumentError("T must be an integer multiple of dt")
    if path.duration < T * (1 - 1e-12):
        raise InvalidArgumentError("disorder path shorter than the integration time")
    tp = path.times
    last = min(len(tp), int(math.ceil(T / path.dt)) + 2)
    qp = evaluate_a(profile, tp[:last]) * evaluate_field(field, path.values[:last])
    t_nodes = dt * np.arange(N + 1)
    if abs(dt - path.dt) <= 1e-12 * path.dt:
        qn = qp[:N + 1].copy()
    else:
        qn = np.interp(t_nodes, tp[:last], qp)
    qm = np.interp(t_nodes[:-1] + 0.5 * dt, tp[:last], qp)
    return qn, qm


def _run(qn, qm, dt, kappas, record):
    qn = np.atleast_2d(np.ascontiguousarray(qn, dtype=np.float64))
    qm = np.atleast_2d(np.ascontiguousarray(qm, dtype=np.float64))
    kappas = np.ascontiguousarray(kappas, dtype=np.float64)
    record = np.ascontiguousarray(record, dtype=np.intp)
    theta, rho, max_step = kernels.prufer_batch(qn, qm, float(dt), kappas, record)
    if max_step > JUMP_GUARD:
        raise StepSizeError(f"phase jumped by {max_step:.3f} in one step; reduce dt")
    return theta, rho


def integrate(path: DisorderPath, field: TorusField, profile: DecayProfile,
              kappa: float, T: float, dt: float | None = None) -> PruferTrajectory:
    """Fixed-step RK4 trajectory of (theta, rho) on ``[0, T]``."""
    if not kappa > 0:
        raise InvalidArgumentError("kappa must be positive")
    dt = path.dt if dt is None else dt
    _check_step(dt, kappa)
    qn, qm = potential_samples(path, field, profile, T, dt)
    N = len(qm)
    theta, rho = _run(qn, qm, dt, [kappa], np.arange(N + 1))
    return PruferTrajectory(dt=dt, kappa=kappa, theta=theta[0], rho=rho[0])


def final_phase(path, field, profile, kappas, L, dt=None) -> np.ndarray:
    """``theta_L(kappa)`` for each kappa, sharing one potential sample."""
    dt = path.dt if dt is None else dt
    kappas = np.atleast_1d(np.asarray(kappas, dtype=np.float64))
    _check_step(dt, float(kappas.max()))
    qn, qm = potential_samples(path, field, profile, L, dt)
    theta, _ = _run(qn, qm, dt, kappas, [len(qm)])
    return theta[:, 0]


def shoot_eigenvalues(path: DisorderPath, field: TorusField, profile: DecayProfile,
                      L: float, J, dt: float | None = None, ktol: float = 1e-10) -> SpectrumWindow:
    """Dirichlet eigenvalues in ``J`` from ``theta_L(kappa) = (k + 1) pi``.

    Eigenvalue number ``k`` (counting from 0) is where the phase at ``L``
    crosses ``(k + 1) pi``; kappa is bisected until the bracket is at most
    ``ktol``.
    """
    a, b = map(float, J)
    if not 0 < a <= b:
        raise InvalidArgumentError("J must lie in (0, inf)")
    dt = path.dt if dt is None else dt
    ka, kb = math.sqrt(a), math.sqrt(b)
    _check_step(dt, kb)
    qn, qm = potential_samples(path, field, profile, L, dt)
    end = [len(qm)]

    def phase(ks):
        return _run(qn, qm, dt, ks, end)[0][:, 0]

    th_a, th_b = phase(np.array([ka, kb]))
    if th_b < th_a:
        raise NumericalError("theta_L decreased in kappa; reduce dt", diagnostic=th_b - th_a)
    lo_count = int(math.floor(th_a / math.pi))
    hi_count = int(math.floor(th_b / math.pi))
    targets = np.arange(lo_count, hi_count)
    n = targets.size
    left = np.full(n, ka)
    right = np.full(n, kb)
    th_left = np.full(n, th_a)
    th_right = np.full(n, th_b)
    goal = (targets + 1) * math.pi
    f_left = th_left - goal
    f_right = th_right - goal
    side = np.zeros(n, dtype=np.int8)
    kappa = 0.5 * (left + right)
    active = np.ones(n, dtype=bool)
    slack = 1e-9 * max(1.0, th_b)
    for it in range(400):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        l, r, fl, fr = left[idx], right[idx], f_left[idx], f_right[idx]
        # Illinois false position, with a bisection step every fourth pass
        # so the bracket always shrinks geometrically.
        mid = l - fl * (r - l) / (fr - fl)
        bad = ~np.isfinite(mid) | (mid <= l) | (mid >= r) | (it % 4 == 3)
        mid = np.where(bad, 0.5 * (l + r), mid)
        th = phase(mid)
        if np.any(th < th_left[idx] - slack) or np.any(th > th_right[idx] + slack):
            raise NumericalError("theta_L not monotone in kappa; reduce dt")
        f = th - goal[idx]
        slope = (fr - fl) / (r - l)
        up = f >= 0
        iu, idn = idx[up], idx[~up]
        right[iu], th_right[iu], f_right[iu] = mid[up], th[up], f[up]
        left[idn], th_left[idn], f_left[idn] = mid[~up], th[~up], f[~up]
        # halve the stale endpoint's residual when the same side moves twice
        stale_l = iu[side[iu] == 1]
        stale_r = idn[side[idn] == -1]
        f_left[stale_l] *= 0.5
        f_right[stale_r] *= 0.5
        side[iu] = 1
        side[idn] = -1
        kappa[idx] = mid
        width = right[idx] - left[idx]
        done = (width <= ktol) | (np.abs(f) <= 0.5 * ktol * slope) | (mid <= l) | (mid >= r)
        kappa[idx[width <= ktol]] = 0.5 * (left[idx[width <= ktol]] + right[idx[width <= ktol]])
        active[idx[done]] = False
    else:
        raise NumericalError("shooting did not converge")
    kappa = np.sort(kappa)
    return SpectrumWindow(window=(a, b), energies=kappa ** 2, first_index=lo_count)


def renormalized_rho(path: DisorderPath, field: TorusField, profile: DecayProfile,
                     n: float, kappa0: float, lam: float, t_grid, dt: float | None = None,
                     spec: DiffusionSpec | None = None) -> RenormalizedRho:
    """``rho_{nt}(kappa0 + lam/n) - tau(kappa0^2) * int_0^n a^2`` on ``t_grid``."""
    return rho_tilde_batch([path], field, profile, n, kappa0, lam, t_grid, dt, spec)[0]


def _record_steps(n, t_grid, dt):
    t_grid = np.asarray(t_grid, dtype=np.float64)
    if np.any(t_grid <= 0) or np.any(t_grid > 1) or np.any(np.diff(t_grid) <= 0):
        raise InvalidArgumentError("t_grid must be increasing inside (0, 1]")
    steps = np.rint(n * t_grid / dt).astype(np.intp)
    if np.any(np.abs(steps * dt - n * t_grid) > 1e-9 * n):
        raise InvalidArgumentError("n * t must be a multiple of dt on the whole grid")
    return t_grid, steps


def rho_tilde_batch(paths, field, profile, n, kappa0, lam, t_grid, dt=None, spec=None):
    """:func:`renormalized_rho` for several paths in one kernel call."""
    spec = spec or DiffusionSpec(paths[0].sigma2)
    dt = paths[0].dt if dt is None else dt
    kappa = kappa0 + lam / n
    if not kappa > 0:
        raise InvalidArgumentError("kappa0 + lam/n must be positive")
    _check_step(dt, kappa)
    t_grid, steps = _record_steps(n, t_grid, dt)
    T = steps[-1] * dt
    tau = 0.0 if field.is_zero else lyapunov_tau(field, spec, kappa0 ** 2)
    centering = tau * integral_a_squared(profile, 0.0, n)
    qn, qm = zip(*(potential_samples(p, field, profile, T, dt) for p in paths))
    _, rho = _run(np.vstack(qn), np.vstack(qm), dt, np.full(len(paths), kappa), steps)
    return [RenormalizedRho(n=n, kappa0=kappa0, lam=lam, t_grid=t_grid,
                            samples=r - centering, tau=tau, centering=centering) for r in rho]


def rho_tilde_ensemble(field: TorusField, profile: DecayProfile, n: float, kappa0: float,
                       lam: float, t_grid, n_paths: int, seeds, dt: float = 0.05,
                       spec: DiffusionSpec = DiffusionSpec(), chunk: int = 32) -> list[RenormalizedRho]:
    """Sample ``n_paths`` disorder paths (one seed each) and renormalize rho on each."""
    seeds = list(seeds)[:n_paths]
    if len(seeds) < n_paths:
        raise InvalidArgumentError("not enough seeds for the ensemble")
    t_grid = np.asarray(t_grid, dtype=np.float64)
    T = n * float(t_grid[-1])
    out = []
    for start in range(0, n_paths, chunk):
        paths = [sample_brownian_path(T, dt, spec, s) for s in seeds[start:start + chunk]]
        out.extend(rho_tilde_batch(paths, field, profile, n, kappa0, lam, t_grid, dt, spec))
    return out


@dataclass(frozen=True)
class SDEDiagnostics:
    n: float
    E0: float
    lam: float
    s: float
    t: float
    drift: float
    qv: float
    se_drift: float
    se_qv: float
    n_paths: int
    tau_log_ratio: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=False)


def _pairwise_sum(x: np.ndarray) -> float:
    # Fixed reduction tree, independent of how the ensemble was produced.
    x = np.asarray(x, dtype=np.float64)
    while x.size > 1:
        if x.size % 2:
            x = np.append(x, 0.0)
        x = x[0::2] + x[1::2]
    return float(x[0]) if x.size else 0.0


def sde_diagnostics(ensemble, s: float, t: float) -> SDEDiagnostics:
    """Sample mean and variance of ``rho~_t - rho~_s`` with standard errors.

    Both are predicted to approach ``tau(E0) * log(t/s)``.
    """
    if len(ensemble) < 2:
        raise InvalidArgumentError("need at least two trajectories")
    if not 0 < s < t <= 1:
        raise InvalidArgumentError("need 0 < s < t <= 1")
    first = ensemble[0]
    for r in ensemble:
        if (r.n, r.kappa0, r.lam) != (first.n, first.kappa0, first.lam):
            raise InvalidArgumentError("ensemble mixes (n, kappa0, lambda)")
    inc = np.array([r.at(t) - r.at(s) for r in ensemble])
    k = inc.size
    mean = _pairwise_sum(inc) / k
    dev = inc - mean
    m2 = _pairwise_sum(dev ** 2) / k
    m4 = _pairwise_sum(dev ** 4) / k
    var = m2 * k / (k - 1)
    se_mean = math.sqrt(var / k)
    se_var = math.sqrt(max(m4 - m2 * m2 * (k - 3) / (k - 1), 0.0) / k)
    return SDEDiagnostics(n=first.n, E0=first.kappa0 ** 2, lam=first.lam, s=s, t=t, drift=mean, qv=var,
                          se_drift=se_mean, se_qv=se_var, n_paths=k,
                          tau_log_ratio=first.tau * math.log(t / s))

