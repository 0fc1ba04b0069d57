"""Eigenfunction measures on ``[0, 1]`` and distances between them.

A measure is stored as a piecewise-constant density on ``cells`` uniform
cells, so its CDF is piecewise linear and every statistic below is exact
for that representation.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .fd import EigenPair

DEFAULT_CELLS = 512


@dataclass(frozen=True, eq=False)
class EigenfunctionMeasure:
    density: np.ndarray
    energy: float = float("nan")

    def __post_init__(self):
        d = np.asarray(self.density, dtype=np.float64)
        if d.ndim != 1 or d.size == 0:
            raise InvalidArgumentError("density must be a non-empty 1-d array")
        if np.any(d < 0) or not np.all(np.isfinite(d)):
            raise InvalidArgumentError("density must be finite and non-negative")
        object.__setattr__(self, "density", d)

    @property
    def cells(self) -> int:
        return self.density.size

    @property
    def width(self) -> float:
        return 1.0 / self.cells

    @property
    def centers(self) -> np.ndarray:
        return (np.arange(self.cells) + 0.5) / self.cells

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.cells + 1)

    @property
    def masses(self) -> np.ndarray:
        return self.density * self.width

    @property
    def mass(self) -> float:
        return float(self.masses.sum())

    def cdf(self) -> np.ndarray:
        """CDF at the cell edges."""
        return np.concatenate(([0.0], np.cumsum(self.masses)))

    def to_json(self) -> str:
        return json.dumps({"energy": self.energy, "cells": self.cells,
                           "density": [float(x) for x in self.density]})

    @classmethod
    def from_masses(cls, masses, energy=float("nan")) -> "EigenfunctionMeasure":
        masses = np.asarray(masses, dtype=np.float64)
        total = masses.sum()
        if not total > 0:
            raise InvalidArgumentError("measure has no mass")
        return cls(density=masses / total * masses.size, energy=energy)


def uniform(cells: int = DEFAULT_CELLS) -> EigenfunctionMeasure:
    return EigenfunctionMeasure(np.ones(cells))


def point_mass(t: float, cells: int = DEFAULT_CELLS) -> EigenfunctionMeasure:
    """Grid approximation of a Dirac mass: all mass in the cell containing ``t``."""
    masses = np.zeros(cells)
    masses[min(int(t * cells), cells - 1)] = 1.0
    return EigenfunctionMeasure.from_masses(masses)


def _box_density(pair: EigenPair, E: float, derivative: str):
    psi = np.concatenate(([0.0], pair.vector, [0.0]))
    h = pair.h
    if derivative == "staggered":
        # One value per grid interval [s_i, s_{i+1}]: psi_i psi_{i+1} + (D+ psi)^2 / E.
        # For discrete free eigenvectors this is exactly constant.
        dpsi = np.diff(psi) / h
        return psi[:-1] * psi[1:] + dpsi * dpsi / E, "interval"
    if derivative == "central":
        full = psi
        d = np.empty_like(full)
        d[1:-1] = (full[2:] - full[:-2]) / (2 * h)
        d[0] = (full[1] - full[0]) / h
        d[-1] = (full[-1] - full[-2]) / h
        return full * full + d * d / E, "node"
    raise InvalidArgumentError(f"unknown derivative scheme {derivative!r}")


def build_measure(pair: EigenPair, L: float, E: float | None = None,
                  cells: int = DEFAULT_CELLS, derivative: str = "staggered") -> EigenfunctionMeasure:
    """Measure with density proportional to ``psi^2 + psi'^2 / E`` at ``s = L t``.

    ``psi'`` is taken in the box coordinate.  ``derivative="staggered"`` uses
    forward differences on each grid interval (exactly flat in the free
    case); ``"central"`` uses node-centred differences.
    """
    E = pair.energy if E is None else E
    if not E > 0:
        raise InvalidArgumentError("E must be positive")
    if not np.any(pair.vector):
        raise InvalidArgumentError("eigenvector is identically zero")
    values, kind = _box_density(pair, E, derivative)
    values = np.maximum(values, 0.0)
    n_int = len(pair.vector) + 1
    if kind == "interval":
        # Piecewise-constant density on the n_int grid intervals.
        grid_cdf = np.concatenate(([0.0], np.cumsum(values)))
    else:
        # Trapezoid between nodes, i.e. piecewise-linear density.
        grid_cdf = np.concatenate(([0.0], np.cumsum(0.5 * (values[:-1] + values[1:]))))
    edges_in_steps = np.linspace(0.0, n_int, cells + 1)
    cdf = np.interp(edges_in_steps, np.arange(n_int + 1), grid_cdf)
    masses = np.diff(cdf)
    return EigenfunctionMeasure.from_masses(masses, energy=float(E))


def coarsen(mu: EigenfunctionMeasure, factor: int) -> EigenfunctionMeasure:
    """Merge groups of ``factor`` cells; total mass is preserved exactly."""
    if mu.cells % factor:
        raise InvalidArgumentError("factor must divide the number of cells")
    masses = mu.masses.reshape(-1, factor).sum(axis=1)
    return EigenfunctionMeasure(density=masses * (mu.cells // factor), energy=mu.energy)


def quantile(mu: EigenfunctionMeasure, p: float) -> float:
    cdf = mu.cdf() / mu.mass
    edges = mu.edges
    k = int(np.searchsorted(cdf, p, side="left"))
    if k == 0:
        return 0.0
    if k > mu.cells:
        return 1.0
    lo, hi = cdf[k - 1], cdf[k]
    frac = 0.0 if hi == lo else (p - lo) / (hi - lo)
    return float(edges[k - 1] + frac * (edges[k] - edges[k - 1]))


def localization_center(mu: EigenfunctionMeasure) -> float:
    """Median of the measure."""
    return quantile(mu, 0.5)


def _check_same_grid(mu, nu):
    if mu.cells != nu.cells:
        raise InvalidArgumentError(f"grid mismatch: {mu.cells} vs {nu.cells} cells")


def wasserstein1(mu: EigenfunctionMeasure, nu: EigenfunctionMeasure) -> float:
    """``int_0^1 |F_mu - F_nu| dt`` with piecewise-linear CDFs, integrated exactly."""
    _check_same_grid(mu, nu)
    diff = mu.cdf() / mu.mass - nu.cdf() / nu.mass
    a, b = diff[:-1], diff[1:]
    same = a * b >= 0
    abs_a, abs_b = np.abs(a), np.abs(b)
    piece = np.where(same, 0.5 * (abs_a + abs_b),
                     0.5 * (a * a + b * b) / np.where(same, 1.0, abs_a + abs_b))
    return float(piece.sum() * mu.width)


def w1_to_point(mu: EigenfunctionMeasure, c: float) -> float:
    """``W1(mu, delta_c) = int |t - c| dmu(t)``, exact for the cell density."""
    edges = mu.edges
    lo, hi = edges[:-1], edges[1:]
    # int_lo^hi |t - c| dt on each cell
    left = np.clip(c, lo, hi)
    part = 0.5 * ((left - lo) * (2 * c - left - lo)) + 0.5 * ((hi - left) * (hi + left - 2 * c))
    return float(np.sum(mu.density * part) / mu.mass)


def total_variation(mu: EigenfunctionMeasure, nu: EigenfunctionMeasure) -> float:
    _check_same_grid(mu, nu)
    return float(0.5 * np.sum(np.abs(mu.masses / mu.mass - nu.masses / nu.mass)))


def write_measure_csv(path, measures, labels=None):
    """Long-format CSV ``(j, cell_center, density)``; ``j`` labels each measure."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["j", "cell_center", "density"])
        for k, mu in enumerate(measures):
            j = k if labels is None else labels[k]
            for c, d in zip(mu.centers, mu.density):
                w.writerow([int(j), repr(float(c)), repr(float(d))])


def read_measure_csv(path) -> list[EigenfunctionMeasure]:
    groups: dict[int, list[float]] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            groups.setdefault(int(row["j"]), []).append(float(row["density"]))
    return [EigenfunctionMeasure(np.array(v)) for _, v in sorted(groups.items())]


def measure_to_density_csv(path, mu: EigenfunctionMeasure):
    """Single-measure CSV with columns ``(cell_center, density)``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cell_center", "density"])
        for c, d in zip(mu.centers, mu.density):
            w.writerow([repr(float(c)), repr(float(d))])
