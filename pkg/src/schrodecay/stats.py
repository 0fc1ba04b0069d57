"""Ensemble statistics: gaps, two-sample distances with bootstrap CIs,
uniform energy-pair sampling and the energy-averaged kernel sum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps
from scipy.integrate import trapezoid

from .errors import InvalidArgumentError, StatisticalPreconditionError
from .fd import PointSample
from .measure import EigenfunctionMeasure, localization_center, uniform, wasserstein1

STATISTICS = ("gap_w1", "gap_ks", "center_ks_uniform", "measure_w1_mean")
N_BOOTSTRAP = 1000


@dataclass(frozen=True, eq=False)
class PairSample:
    """An eigenvalue, its measure and optionally its rescaled position."""

    energy: float
    measure: EigenfunctionMeasure
    position: float | None = None
    realization: int = 0
    j: int = 0


@dataclass(frozen=True, eq=False)
class GapSummary:
    gaps: np.ndarray
    mean: float
    sd: float

    def ecdf(self, x):
        return np.searchsorted(self.gaps, x, side="right") / self.gaps.size


def gap_statistics(points: PointSample) -> GapSummary:
    """Sorted consecutive gaps of a point sample with their mean and SD."""
    if len(points) < 2:
        raise InvalidArgumentError("need at least two points for gap statistics")
    gaps = np.sort(np.diff(points.points))
    return GapSummary(gaps=gaps, mean=float(gaps.mean()), sd=float(gaps.std()))


def pooled_gaps(samples) -> np.ndarray:
    """Gaps of every sample with at least two points, concatenated in order."""
    parts = [np.diff(s.points) for s in samples if len(s) >= 2]
    return np.concatenate(parts) if parts else np.empty(0)


@dataclass(frozen=True, eq=False)
class Ensemble:
    """A merged ensemble: per-realization point samples and/or measures.

    ``measures[i]`` lists the measures of realization ``i``; resampling for
    the bootstrap is done over realizations.
    """

    points: list = field(default_factory=list)
    measures: list = field(default_factory=list)
    origin: str = "simulation"

    @property
    def flat_measures(self) -> list:
        return [mu for group in self.measures for mu in group]

    def centers(self) -> np.ndarray:
        return np.array([localization_center(mu) for mu in self.flat_measures])


@dataclass(frozen=True)
class Comparison:
    statistic: str
    distance: float
    ci_low: float
    ci_high: float
    n_a: int
    n_b: int
    n_bootstrap: int = N_BOOTSTRAP

    def to_dict(self) -> dict:
        return {"statistic": self.statistic, "distance": self.distance,
                "ci95": [self.ci_low, self.ci_high], "n_a": self.n_a,
                "n_b": self.n_b, "n_bootstrap": self.n_bootstrap}


def _gap_w1(a, b):
    return float(sps.wasserstein_distance(a, b))


def _gap_ks(a, b):
    return float(sps.ks_2samp(a, b).statistic)


def _center_ks(a, _b):
    return float(sps.kstest(a, "uniform").statistic)


def _w1_to_uniform(groups):
    ref = {}
    out = []
    for group in groups:
        for mu in group:
            if mu.cells not in ref:
                ref[mu.cells] = uniform(mu.cells)
            out.append(wasserstein1(mu, ref[mu.cells]))
    return np.array(out)


def _units(ens: Ensemble, statistic: str):
    """Per-realization arrays that the bootstrap resamples."""
    if statistic in ("gap_w1", "gap_ks"):
        if not ens.points:
            raise InvalidArgumentError(f"{statistic} needs point samples")
        return [np.diff(s.points) for s in ens.points]
    if not ens.measures:
        raise InvalidArgumentError(f"{statistic} needs measures")
    if statistic == "center_ks_uniform":
        return [np.array([localization_center(mu) for mu in g]) for g in ens.measures]
    return [_w1_to_uniform([g]) for g in ens.measures]


_DISTANCES = {"gap_w1": _gap_w1, "gap_ks": _gap_ks,
              "center_ks_uniform": _center_ks, "measure_w1_mean": _gap_w1}


def _pool(units, idx=None):
    chosen = units if idx is None else [units[i] for i in idx]
    return np.concatenate(chosen) if chosen else np.empty(0)


def compare(a: Ensemble, b: Ensemble | None, statistic: str, seed: int = 0,
            n_bootstrap: int = N_BOOTSTRAP) -> Comparison:
    """Two-sample distance with a basic-bootstrap 95% CI (clipped at 0).

    ``gap_w1`` / ``gap_ks``: W1 / KS between pooled gap distributions.
    ``center_ks_uniform``: KS of ``a``'s localization centers against
    U[0, 1]; ``b`` is not used.  ``measure_w1_mean``: W1 between the two
    distributions of per-measure W1-to-uniform (against an ensemble of
    uniform measures this is the mean W1 to uniform).
    """
    if statistic not in STATISTICS:
        raise InvalidArgumentError(f"unknown statistic {statistic!r}")
    one_sample = statistic == "center_ks_uniform"
    if b is None and not one_sample:
        raise InvalidArgumentError(f"{statistic} needs two ensembles")
    ua = _units(a, statistic)
    ub = ua if one_sample else _units(b, statistic)
    pa, pb = _pool(ua), _pool(ub)
    if pa.size == 0 or pb.size == 0:
        raise StatisticalPreconditionError("empty ensemble for comparison")
    dist = _DISTANCES[statistic]
    d = dist(pa, pb)
    rng = np.random.default_rng(seed)
    boot = np.empty(n_bootstrap)
    for r in range(n_bootstrap):
        xa = _pool(ua, rng.integers(0, len(ua), len(ua)))
        xb = xa if one_sample else _pool(ub, rng.integers(0, len(ub), len(ub)))
        if xa.size == 0 or xb.size == 0:
            boot[r] = d
            continue
        boot[r] = dist(xa, xb)
    q_lo, q_hi = np.quantile(boot, [0.025, 0.975])
    lo, hi = max(0.0, 2 * d - q_hi), max(0.0, 2 * d - q_lo)
    return Comparison(statistic=statistic, distance=d, ci_low=float(lo), ci_high=float(hi),
                      n_a=int(pa.size), n_b=int(pb.size), n_bootstrap=n_bootstrap)


def sample_energy_pair(realizations, J, seed) -> PairSample:
    """Pick a realization uniformly, then one of its pairs with energy in ``J``.

    Realizations without eigenvalues in ``J`` are skipped (drawn without
    replacement); if every one is empty, raise.
    """
    a, b = map(float, J)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(realizations))
    for i in order:
        inside = [p for p in realizations[i] if a <= p.energy <= b]
        if inside:
            return inside[int(rng.integers(len(inside)))]
    raise StatisticalPreconditionError("no eigenvalue in J in any realization")


def g1(x):
    """Triangular kernel ``(1 - |x|) 1(|x| <= 1)``."""
    x = np.abs(np.asarray(x, dtype=np.float64))
    return np.where(x <= 1.0, 1.0 - x, 0.0)


@dataclass(frozen=True)
class KernelAverage:
    direct: float
    identity: float

    @property
    def relative_gap(self) -> float:
        scale = max(abs(self.direct), abs(self.identity))
        return 0.0 if scale == 0 else abs(self.direct - self.identity) / scale


def kernel_average(realizations, J, L: float, g2=None, n_grid: int | None = None) -> KernelAverage:
    """Energy-averaged kernel sum, evaluated two ways.

    ``direct``: ``N(J)^-1 int_J dN(E0) sum_j g1(L(sqrt(E_j) - sqrt(E0))) g2_j``
    with ``dN = dE / (2 pi sqrt(E))`` i.e. ``d sqrt(E) / pi``, by the
    trapezoid rule on a uniform ``sqrt(E0)`` grid.  ``identity``:
    ``(pi L N(J))^-1 sum_j g2_j``.  Both are averaged over realizations.
    ``realizations`` is a list of lists of :class:`PairSample`.
    """
    a, b = map(float, J)
    if not 0 < a < b:
        raise InvalidArgumentError("need 0 < a < b")
    if g2 is None:
        def g2(pair):
            return 1.0
    ka, kb = math.sqrt(a), math.sqrt(b)
    width = kb - ka
    if n_grid is None:
        n_grid = max(2001, int(math.ceil(40 * L * width)) + 1)
    k0 = np.linspace(ka, kb, n_grid)
    direct = np.zeros(len(realizations))
    ident = np.zeros(len(realizations))
    for r, pairs in enumerate(realizations):
        inside = [p for p in pairs if a <= p.energy <= b]
        if not inside:
            continue
        kj = np.sqrt(np.array([p.energy for p in inside]))
        w = np.array([g2(p) for p in inside], dtype=np.float64)
        integrand = g1(L * (kj[None, :] - k0[:, None])) @ w
        direct[r] = trapezoid(integrand, k0) / width
        ident[r] = w.sum() / (L * width)
    if not len(realizations):
        return KernelAverage(0.0, 0.0)
    return KernelAverage(direct=float(direct.mean()), identity=float(ident.mean()))
