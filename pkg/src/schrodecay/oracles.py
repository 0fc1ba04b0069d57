"""Reference samplers for the limiting objects.

Point processes: clock ``{n pi + theta}``, Poisson with intensity ``1/pi``
and an approximate Sine_beta from the tridiagonal Gaussian beta-ensemble.
Measures: the exponential-Brownian density
``exp(2 Z_{tau k(t,U)} - 2 tau |k(t,U)|)`` with ``k = log(t/U)`` or
``k = t - U``, ``U`` uniform and ``Z`` a two-sided Brownian motion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .errors import InvalidArgumentError
from .fd import PointSample
from .measure import DEFAULT_CELLS, EigenfunctionMeasure

KINDS = ("clock", "poisson", "sine_beta", "exp_bm")
KERNELS = ("log_ratio", "abs_diff")
DEFAULT_WINDOW = (-20 * math.pi, 20 * math.pi)


@dataclass(frozen=True)
class OracleConfig:
    kind: str
    beta: float | None = None
    tau: float | None = None
    kernel: str = "log_ratio"
    window: tuple[float, float] = DEFAULT_WINDOW
    cells: int = DEFAULT_CELLS
    seed: int = 0
    size: int = 400
    band: float = 0.1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgumentError(f"unknown oracle kind {self.kind!r}")
        if self.kind == "sine_beta" and not (self.beta and self.beta > 0):
            raise InvalidArgumentError("sine_beta needs beta > 0")
        if self.kind == "exp_bm" and not (self.tau and self.tau > 0):
            raise InvalidArgumentError("exp_bm needs tau > 0")
        if self.kernel not in KERNELS:
            raise InvalidArgumentError(f"unknown kernel {self.kernel!r}")
        if not self.window[0] < self.window[1]:
            raise InvalidArgumentError("window must be non-empty")


def _window(window):
    lo, hi = map(float, window)
    if lo > hi:
        raise InvalidArgumentError("window must be non-empty")
    return lo, hi


def clock_sample(window=DEFAULT_WINDOW, seed: int = 0) -> PointSample:
    """``{n pi + theta}`` with ``theta ~ U[0, pi)``, restricted to the window."""
    lo, hi = _window(window)
    theta = np.random.default_rng(seed).uniform(0.0, math.pi)
    n = np.arange(math.ceil((lo - theta) / math.pi), math.floor((hi - theta) / math.pi) + 1)
    pts = n * math.pi + theta
    pts = pts[(pts >= lo) & (pts <= hi)]
    return PointSample(window=(lo, hi), points=pts, origin="clock")


def clock_phase(seed: int) -> float:
    return float(np.random.default_rng(seed).uniform(0.0, math.pi))


def poisson_sample(window=DEFAULT_WINDOW, seed: int = 0) -> PointSample:
    """Homogeneous Poisson process of intensity ``1/pi`` from exponential gaps."""
    lo, hi = _window(window)
    rng = np.random.default_rng(seed)
    pts = []
    x = lo
    while True:
        # Draw gaps in blocks; the expected count is (hi - lo) / pi.
        block = rng.exponential(math.pi, size=max(16, int((hi - x) / math.pi * 1.2) + 8))
        cand = x + np.cumsum(block)
        inside = cand[cand <= hi]
        pts.append(inside)
        if inside.size < cand.size:
            break
        x = cand[-1]
    pts = np.concatenate(pts) if pts else np.empty(0)
    return PointSample(window=(lo, hi), points=pts, origin="poisson")


def beta_hermite_eigenvalues(N: int, beta: float, rng) -> np.ndarray:
    """Eigenvalues of the Dumitriu-Edelman tridiagonal model divided by ``sqrt(beta)``.

    Diagonal ``N(0, 2)/sqrt(2 beta)``, off-diagonal ``chi_{beta k}/sqrt(2 beta)``
    for ``k = N-1, ..., 1``; the spectrum fills the semicircle of radius
    ``sqrt(2 N)``.
    """
    diag = rng.normal(0.0, math.sqrt(2.0), size=N) / math.sqrt(2.0 * beta)
    dof = beta * np.arange(N - 1, 0, -1)
    off = np.sqrt(rng.chisquare(dof)) / math.sqrt(2.0 * beta)
    return eigvalsh_tridiagonal(diag, off)


def semicircle_unfold(x: np.ndarray, N: int) -> np.ndarray:
    """``N * F(x)`` with ``F`` the semicircle CDF on ``[-sqrt(2N), sqrt(2N)]``."""
    R = math.sqrt(2.0 * N)
    u = np.clip(x / R, -1.0, 1.0)
    F = 0.5 + (u * np.sqrt(1.0 - u * u) + np.arcsin(u)) / math.pi
    return N * F


def _central_unfolded(beta, N, band, rng):
    lam = beta_hermite_eigenvalues(N, beta, rng)
    u = semicircle_unfold(lam, N) - 0.5 * N
    half = 0.5 * band * N
    return u[np.abs(u) <= half]


def sine_beta_sample(beta: float, window=DEFAULT_WINDOW, seed: int = 0,
                     N: int = 400, band: float = 0.1) -> PointSample:
    """Approximate Sine_beta: bulk of an ``N x N`` beta-ensemble with mean gap ``pi``.

    The central ``band`` fraction of eigenvalues is unfolded with the
    semicircle law (unit mean spacing) and multiplied by ``pi``.  Biased at
    ``O(1/N)``, below 1% in the mean gap for ``N = 400``; the usable span is
    about ``band * N * pi``.
    """
    if not beta > 0:
        raise InvalidArgumentError("beta must be positive")
    lo, hi = _window(window)
    u = _central_unfolded(beta, N, band, np.random.default_rng(seed))
    pts = math.pi * u
    pts = pts[(pts >= lo) & (pts <= hi)]
    return PointSample(window=(lo, hi), points=pts, origin="sine_beta")


def _kernel(t, U, kernel):
    if kernel == "log_ratio":
        with np.errstate(divide="ignore"):
            return np.log(t / U)
    return t - U


def envelope_cell_integrals(tau: float, U: float, kernel: str, cells: int) -> np.ndarray:
    """Exact ``int_cell exp(-2 tau |k(t, U)|) dt`` for every cell."""
    edges = np.linspace(0.0, 1.0, cells + 1)
    a, b = edges[:-1], edges[1:]
    c = 2.0 * tau

    def below(x0, x1):  # t <= U
        if kernel == "log_ratio":
            # (t/U)^c integrates to t^(1+c) / ((1+c) U^c)
            return (x1 ** (1 + c) - x0 ** (1 + c)) / ((1 + c) * U ** c)
        return (np.exp(-c * (U - x1)) - np.exp(-c * (U - x0))) / c

    def above(x0, x1):  # t >= U
        if kernel == "log_ratio":
            if abs(1 - c) < 1e-12:
                return U * (np.log(x1) - np.log(x0))
            return U ** c * (x1 ** (1 - c) - x0 ** (1 - c)) / (1 - c)
        return (np.exp(-c * (x0 - U)) - np.exp(-c * (x1 - U))) / c

    lo_part = below(np.minimum(a, U), np.minimum(b, U))
    hi_part = above(np.maximum(a, U), np.maximum(b, U))
    return lo_part + hi_part


def two_sided_bm(s: np.ndarray, rng) -> np.ndarray:
    """Two-sided Brownian motion with ``Z_0 = 0`` evaluated at the points ``s``.

    Each side is built from sequential Gaussian increments over its sorted
    index set, which is the exact finite-dimensional law.
    """
    s = np.asarray(s, dtype=np.float64)
    z = np.zeros(s.shape)
    for side in (s > 0, s < 0):
        idx = np.flatnonzero(side)
        if idx.size == 0:
            continue
        order = idx[np.argsort(np.abs(s[idx]), kind="stable")]
        r = np.abs(s[order])
        steps = np.sqrt(np.diff(np.concatenate(([0.0], r))))
        z[order] = np.cumsum(steps * rng.standard_normal(order.size))
    return z


def expbm_measure_sample(tau: float, kernel: str = "log_ratio", cells: int = DEFAULT_CELLS,
                         seed: int = 0, zero_noise: bool = False
                         ) -> tuple[EigenfunctionMeasure, float]:
    """One exponential-Brownian measure and its centre ``U``.

    Cell mass = ``exp(2 Z_{tau k(t_c, U)})`` at the cell centre ``t_c`` times
    the exact cell integral of the envelope ``exp(-2 tau |k|)``.
    ``zero_noise=True`` sets ``Z = 0``.
    """
    if not tau > 0:
        raise InvalidArgumentError("tau must be positive")
    if kernel not in KERNELS:
        raise InvalidArgumentError(f"unknown kernel {kernel!r}")
    rng = np.random.default_rng(seed)
    U = float(rng.uniform(0.0, 1.0))
    envelope = envelope_cell_integrals(tau, U, kernel, cells)
    if zero_noise:
        log_w = np.zeros(cells)
    else:
        t = (np.arange(cells) + 0.5) / cells
        z = two_sided_bm(tau * _kernel(t, U, kernel), rng)
        log_w = 2.0 * z
    log_w -= log_w.max()
    masses = envelope * np.exp(log_w)
    return EigenfunctionMeasure.from_masses(masses), U


def sample_oracle(config: OracleConfig, index: int = 0):
    """Sample number ``index`` of an oracle ensemble (seed split by index)."""
    seed = int(np.random.SeedSequence(config.seed, spawn_key=(index,)).generate_state(1, np.uint64)[0])
    if config.kind == "clock":
        return clock_sample(config.window, seed)
    if config.kind == "poisson":
        return poisson_sample(config.window, seed)
    if config.kind == "sine_beta":
        return sine_beta_sample(config.beta, config.window, seed, config.size, config.band)
    return expbm_measure_sample(config.tau, config.kernel, config.cells, seed)
