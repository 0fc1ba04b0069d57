"""Dirichlet finite-difference Hamiltonian on ``[0, L]``.

Eigenvalues come from Sturm-count bisection, eigenvectors from inverse
iteration.  The matrix is ``tridiag(-1/h^2, 2/h^2 + q_i, -1/h^2)`` on the
interior nodes ``t_i = i*h``, ``i = 1..m``, with ``(m + 1) h = L``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from . import kernels
from .decay import DecayProfile, evaluate_a
from .errors import InvalidArgumentError, NumericalError
from .torus import DisorderPath, TorusField, evaluate_field


@dataclass(frozen=True, eq=False)
class GridHamiltonian:
    L: float
    h: float
    potential: np.ndarray

    def __post_init__(self):
        if self.m < 2:
            raise InvalidArgumentError("need at least two interior nodes")

    @property
    def m(self) -> int:
        return len(self.potential)

    @property
    def nodes(self) -> np.ndarray:
        return self.h * np.arange(1, self.m + 1)

    @property
    def diagonal(self) -> np.ndarray:
        return 2.0 / self.h ** 2 + self.potential

    @property
    def off_diagonal(self) -> float:
        return -1.0 / self.h ** 2

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.diagonal * x
        y[1:] += self.off_diagonal * x[:-1]
        y[:-1] += self.off_diagonal * x[1:]
        return y

    def residual(self, x: np.ndarray, E: float) -> np.ndarray:
        """``(H - E) x`` formed from second differences, avoiding ``2/h^2 - E``."""
        d2 = 2.0 * x
        d2[1:] -= x[:-1]
        d2[:-1] -= x[1:]
        return d2 / self.h ** 2 + (self.potential - E) * x

    def gershgorin(self) -> tuple[float, float]:
        d = self.diagonal
        r = 2.0 / self.h ** 2
        return float(d.min() - r), float(d.max() + r)

    @classmethod
    def free(cls, L: float, h: float) -> "GridHamiltonian":
        m = int(round(L / h)) - 1
        return cls(L=L, h=L / (m + 1), potential=np.zeros(m))


@dataclass(frozen=True, eq=False)
class EigenPair:
    """Eigenvalue with eigenvector normalized so ``h * sum(psi**2) == 1``.

    ``index`` is the number of eigenvalues below ``energy`` (equivalently
    the number of sign changes of ``psi``).
    """

    energy: float
    vector: np.ndarray
    index: int
    h: float
    residual: float = 0.0


@dataclass(frozen=True, eq=False)
class SpectrumWindow:
    window: tuple[float, float]
    energies: np.ndarray
    first_index: int
    pairs: list = field(default_factory=list)

    def __len__(self):
        return len(self.energies)

    @property
    def indices(self) -> np.ndarray:
        return self.first_index + np.arange(len(self.energies))


@dataclass(frozen=True, eq=False)
class PointSample:
    window: tuple[float, float]
    points: np.ndarray
    origin: str = "simulation"

    def __post_init__(self):
        pts = np.sort(np.asarray(self.points, dtype=np.float64))
        object.__setattr__(self, "points", pts)
        lo, hi = self.window
        if lo > hi:
            raise InvalidArgumentError("empty window")
        if pts.size and (pts[0] < lo or pts[-1] > hi):
            raise InvalidArgumentError("points outside window")

    def __len__(self):
        return len(self.points)


def interior_grid(L: float, h: float) -> tuple[int, float]:
    """Number of interior nodes and the exact step ``L / (m + 1)``."""
    m = int(round(L / h)) - 1
    if m < 2:
        raise InvalidArgumentError("grid too coarse for the box")
    return m, L / (m + 1)


def assemble(path: DisorderPath, field: TorusField, profile: DecayProfile,
             L: float, h: float) -> GridHamiltonian:
    """Sample ``a(t) F(X_t)`` at the interior nodes (nearest path time)."""
    m, h = interior_grid(L, h)
    if path.duration < L * (1 - 1e-12):
        raise InvalidArgumentError("disorder path shorter than the box")
    if path.dt > h * (1 + 1e-9):
        raise InvalidArgumentError("path resolution coarser than the grid step")
    t = h * np.arange(1, m + 1)
    idx = np.rint(t / path.dt).astype(np.int64)
    np.minimum(idx, len(path.values) - 1, out=idx)
    q = evaluate_a(profile, t) * evaluate_field(field, path.values[idx])
    return GridHamiltonian(L=L, h=h, potential=q)


def count_below(H: GridHamiltonian, E):
    """Number of eigenvalues strictly below ``E`` (scalar or array)."""
    scalar = np.ndim(E) == 0
    energies = np.atleast_1d(np.asarray(E, dtype=np.float64))
    counts = kernels.sturm_count(np.ascontiguousarray(H.potential), H.h,
                                 np.ascontiguousarray(energies))
    return int(counts[0]) if scalar else counts


def _bisect_indices(H, targets, lo, hi, atol, max_iter=200):
    """Locate eigenvalue number ``k`` for each ``k`` in ``targets`` inside ``(lo, hi)``."""
    targets = np.asarray(targets, dtype=np.int64)
    left = np.full(targets.size, float(lo))
    right = np.full(targets.size, float(hi))
    active = np.ones(targets.size, dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        mid = 0.5 * (left[idx] + right[idx])
        stuck = (mid <= left[idx]) | (mid >= right[idx])
        counts = count_below(H, mid)
        above = counts > targets[idx]
        right[idx[above]] = mid[above]
        left[idx[~above]] = mid[~above]
        done = stuck | (right[idx] - left[idx] <= atol)
        active[idx[done]] = False
    return 0.5 * (left + right)


def eigenvalues_in(H: GridHamiltonian, J, atol: float | None = None,
                   with_vectors: bool = False) -> SpectrumWindow:
    """All eigenvalues in ``J = [a, b]`` by bisection on :func:`count_below`.

    ``atol`` defaults to ``1e-10 * max(1, b)``; ``atol=0`` bisects to the
    last representable midpoint.
    """
    a, b = map(float, J)
    if a > b:
        raise InvalidArgumentError("window lower end above upper end")
    if atol is None:
        atol = 1e-10 * max(1.0, abs(b))
    lo, hi = count_below(H, np.array([a, b]))
    targets = np.arange(lo, hi)
    energies = _bisect_indices(H, targets, a, b, atol) if targets.size else np.empty(0)
    energies = np.sort(energies)
    if np.any(np.diff(energies) <= 0):
        raise NumericalError("eigenvalues not separated at the bisection tolerance")
    pairs = ([eigenvector(H, E, index=int(lo) + i) for i, E in enumerate(energies)]
             if with_vectors else [])
    return SpectrumWindow(window=(a, b), energies=energies, first_index=int(lo), pairs=pairs)


def eigenvalue_by_index(H: GridHamiltonian, k: int, J, atol: float | None = None) -> float:
    a, b = map(float, J)
    if atol is None:
        atol = 1e-10 * max(1.0, abs(b))
    return float(_bisect_indices(H, [k], a, b, atol)[0])


def _pivoted_solve(H, shift, x):
    ab = np.empty((3, H.m))
    ab[0, :] = -1.0
    ab[2, :] = -1.0
    ab[1, :] = 2.0 + H.h ** 2 * (H.potential - shift)
    return solve_banded((1, 1), ab, x, check_finite=False)


def sign_changes(x: np.ndarray) -> int:
    """Sign changes of ``x`` ignoring exact zeros."""
    s = np.sign(x[x != 0])
    return int(np.count_nonzero(s[1:] != s[:-1]))


def eigenvector(H: GridHamiltonian, E: float, max_iter: int = 50, rtol: float = 1e-8,
                index: int | None = None) -> EigenPair:
    """Inverse iteration at shift ``E``.

    Solves use the pivot-offset LDL^T of :func:`kernels.shifted_solve`; a
    pivoted LAPACK solve takes over if that produces non-finite values.
    ``index`` defaults to the number of sign changes of the vector.
    """
    q = np.ascontiguousarray(H.potential)
    x = np.random.default_rng(12345).standard_normal(H.m)
    x /= np.linalg.norm(x)
    residual = np.inf
    for _ in range(max_iter):
        y = kernels.shifted_solve(q, H.h, E, x)
        norm = np.linalg.norm(y)
        if not np.isfinite(norm) or norm == 0:
            try:
                y = _pivoted_solve(H, E, x)
            except LinAlgError:
                y = _pivoted_solve(H, E * (1 + 1e-14) + 1e-300, x)
            norm = np.linalg.norm(y)
            if not np.isfinite(norm) or norm == 0:
                raise NumericalError("inverse iteration broke down", diagnostic=residual)
        x = y / norm
        r = H.residual(x, E)
        residual = np.linalg.norm(r) / max(np.linalg.norm(r + E * x), np.finfo(float).tiny)
        if residual <= rtol:
            break
    else:
        raise NumericalError(f"inverse iteration did not converge (residual {residual:.2e})",
                             diagnostic=residual)
    nz = np.flatnonzero(x)
    if x[nz[0]] < 0:
        x = -x
    x = x / math.sqrt(H.h * np.dot(x, x))
    if index is None:
        index = sign_changes(x)
    return EigenPair(energy=float(E), vector=x, index=index, h=H.h, residual=float(residual))


def central_derivative(psi: np.ndarray, h: float) -> np.ndarray:
    """``psi'`` on the nodes ``0..m+1`` including the Dirichlet zeros.

    Central differences inside, one-sided at the two boundary nodes.
    """
    full = np.concatenate(([0.0], psi, [0.0]))
    d = np.empty_like(full)
    d[1:-1] = (full[2:] - full[:-2]) / (2 * h)
    d[0] = (full[1] - full[0]) / h
    d[-1] = (full[-1] - full[-2]) / h
    return d


def rescaled_process(spectrum: SpectrumWindow, L: float, E0: float) -> PointSample:
    """Points ``L (sqrt(E_j) - sqrt(E0))`` with the window induced by ``J``."""
    if not E0 > 0:
        raise InvalidArgumentError("E0 must be positive")
    k0 = math.sqrt(E0)
    a, b = spectrum.window
    lo = L * (math.sqrt(max(a, 0.0)) - k0)
    hi = L * (math.sqrt(max(b, 0.0)) - k0)
    pts = L * (np.sqrt(spectrum.energies) - k0)
    return PointSample(window=(lo, hi), points=np.clip(pts, lo, hi), origin="simulation")


def free_discrete_eigenvalues(L: float, h: float, j) -> np.ndarray:
    """Closed-form Dirichlet eigenvalues ``(4/h^2) sin^2(j pi h / 2L)`` of the free grid."""
    m, h = interior_grid(L, h)
    j = np.asarray(j, dtype=np.float64)
    return 4.0 / h ** 2 * np.sin(j * math.pi * h / (2 * L)) ** 2


def write_spectra_csv(path, rows):
    """Rows of ``(realization_seed, j, E_j, rescaled_point)``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["realization_seed", "j", "E_j", "rescaled_point"])
        for seed, j, E, x in rows:
            w.writerow([int(seed), int(j), repr(float(E)), repr(float(x))])
