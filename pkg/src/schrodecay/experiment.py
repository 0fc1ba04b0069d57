"""Monte Carlo driver: configuration, one realization, whole ensembles and
the on-disk layout shared by simulations and oracle ensembles.

Directory layout::

    spectra.csv       realization_seed, j, E_j, rescaled_point
    points.csv        realization, realization_seed, point
    measures/rNNNNN.csv   j, cell_center, density (one file per realization)
    summary.json      config echo, versions, counts (deterministic)
    timing.json       wall-times (not deterministic)
"""
from __future__ import annotations

import csv
import json
import math
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import scipy

from . import __version__, kernels
from .decay import DecayProfile
from .errors import ConfigError, InvalidArgumentError, SchrodecayError
from .fd import (PointSample, assemble, eigenvalues_in, eigenvector, interior_grid, rescaled_process,
                 write_spectra_csv)
from .measure import DEFAULT_CELLS, build_measure, read_measure_csv, write_measure_csv
from .stats import Ensemble, PairSample
from .torus import DiffusionSpec, parse_field, sample_brownian_path


def realization_seed(master_seed: int, index: int) -> int:
    """Counter-based split of the master seed; no state is shared between realizations."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, np.uint64)[0])


def _pair(text):
    parts = [float(x) for x in str(text).replace(" ", "").strip("[]()").split(",")]
    if len(parts) != 2:
        raise ValueError(f"expected two numbers, got {text!r}")
    return tuple(parts)


def _floats(text):
    return tuple(float(x) for x in str(text).replace(" ", "").strip("[]()").split(",") if x)


_PARSERS = {
    "alpha": float, "E0": float, "J": _pair, "window": _pair, "L": float, "n": float,
    "h": float, "dt": float, "sigma2": float, "n_realizations": int, "master_seed": int,
    "field": str, "oracle": str, "out_dir": str, "pairs_per_realization": int,
    "measure_cells": int, "lam": float, "t_grid": _floats,
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Experiment parameters; keys of the config file are exactly these fields.

    Either ``J`` or ``window`` (rescaled units around ``E0``) fixes the
    energy window.  ``pairs_per_realization = 0`` keeps every eigenpair.
    """

    alpha: float
    E0: float | None = None
    J: tuple | None = None
    window: tuple | None = None
    L: float | None = None
    n: float | None = None
    h: float = 0.01
    dt: float | None = None
    sigma2: float = 1.0
    n_realizations: int = 1
    master_seed: int = 0
    field: str = "cos"
    oracle: str = ""
    out_dir: str = "out"
    pairs_per_realization: int = 0
    measure_cells: int = DEFAULT_CELLS
    lam: float = 0.0
    t_grid: tuple = (0.25, 1.0)

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigError("alpha must be positive")
        if self.n_realizations < 1:
            raise ConfigError("n_realizations must be at least 1")
        if not self.h > 0 or not self.sigma2 > 0:
            raise ConfigError("h and sigma2 must be positive")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError("dt must be positive")
        if self.E0 is not None and not self.E0 > 0:
            raise ConfigError("E0 must be positive")
        if self.J is not None and not 0 < self.J[0] < self.J[1]:
            raise ConfigError("J must satisfy 0 < a < b")
        if self.window is not None:
            if not self.window[0] < self.window[1]:
                raise ConfigError("window must be non-empty")
            if self.E0 is None:
                raise ConfigError("window needs E0")
        if self.L is not None and not self.L > 0:
            raise ConfigError("L must be positive")
        if self.n is not None and not self.n > 0:
            raise ConfigError("n must be positive")
        if self.pairs_per_realization < 0 or self.measure_cells < 1:
            raise ConfigError("pairs_per_realization >= 0 and measure_cells >= 1 required")
        try:
            parse_field(self.field)
        except InvalidArgumentError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_mapping(cls, values: dict) -> "ExperimentConfig":
        unknown = set(values) - set(_PARSERS)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        parsed = {}
        for key, raw in values.items():
            try:
                parsed[key] = _PARSERS[key](raw) if isinstance(raw, str) else raw
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key}: {raw!r}") from exc
        if "alpha" not in parsed:
            raise ConfigError("missing required key: alpha")
        try:
            return cls(**parsed)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        values = {}
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            if key in values:
                raise ConfigError(f"line {lineno}: duplicate key {key}")
            values[key] = value
        return cls.from_mapping(values)

    def to_dict(self) -> dict:
        out = asdict(self)
        for k in ("J", "window", "t_grid"):
            if out[k] is not None:
                out[k] = list(out[k])
        return out

    # derived quantities

    @property
    def energy_window(self) -> tuple[float, float]:
        if self.J is not None:
            return tuple(self.J)
        if self.window is not None:
            k0 = math.sqrt(self.E0)
            L = self.box_length
            lo, hi = k0 + self.window[0] / L, k0 + self.window[1] / L
            if lo <= 0:
                raise ConfigError("window reaches non-positive energies")
            return (lo * lo, hi * hi)
        raise ConfigError("config needs J or window")

    @property
    def reference_energy(self) -> float:
        if self.E0 is not None:
            return self.E0
        a, b = self.energy_window
        return (0.5 * (math.sqrt(a) + math.sqrt(b))) ** 2

    @property
    def box_length(self) -> float:
        if self.L is None:
            raise ConfigError("config needs L")
        return self.L

    @property
    def path_dt(self) -> float:
        # Defaults to the effective grid step L / (m + 1), which is <= h.
        if self.dt is not None:
            return self.dt
        if self.L is None:
            return self.h
        return interior_grid(self.L, self.h)[1]


@dataclass(frozen=True, eq=False)
class RealizationResult:
    index: int
    seed: int
    energies: np.ndarray
    first_index: int
    pairs: list
    points: PointSample


def _with_index(exc: Exception, index: int) -> Exception:
    msg = f"realization {index}: {exc}"
    if isinstance(exc, SchrodecayError):
        new = type(exc).__new__(type(exc))
        Exception.__init__(new, msg)
        new.__dict__.update(exc.__dict__)
        return new
    return RuntimeError(msg)


def run_realization(config: ExperimentConfig, index: int) -> RealizationResult:
    """One disorder path, its spectrum in ``J``, measures and rescaled points."""
    seed = realization_seed(config.master_seed, index)
    try:
        L = config.box_length
        J = config.energy_window
        field = parse_field(config.field)
        dt = config.path_dt
        # one spare step so the path covers [0, L] when dt does not divide L
        path = sample_brownian_path(L + dt, dt, DiffusionSpec(config.sigma2), seed)
        H = assemble(path, field, DecayProfile(config.alpha), L, config.h)
        spectrum = eigenvalues_in(H, J)
        k = len(spectrum)
        chosen = np.arange(k)
        if 0 < config.pairs_per_realization < k:
            rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1,)))
            chosen = np.sort(rng.choice(k, size=config.pairs_per_realization, replace=False))
        points = rescaled_process(spectrum, L, config.reference_energy)
        if config.window is not None:
            lo, hi = config.window
            sel = (points.points >= lo) & (points.points <= hi)
            points = PointSample(window=(lo, hi), points=points.points[sel])
        k0 = math.sqrt(config.reference_energy)
        pairs = []
        for i in chosen:
            E = float(spectrum.energies[i])
            ep = eigenvector(H, E, index=int(spectrum.first_index + i))
            mu = build_measure(ep, L, E, cells=config.measure_cells)
            pairs.append(PairSample(energy=E, measure=mu, position=L * (math.sqrt(E) - k0),
                                    realization=index, j=int(spectrum.first_index + i)))
    except Exception as exc:
        raise _with_index(exc, index) from exc
    return RealizationResult(index=index, seed=seed, energies=spectrum.energies,
                             first_index=spectrum.first_index, pairs=pairs, points=points)


def _run_indexed(args):
    config, index = args
    t0 = time.perf_counter()
    res = run_realization(config, index)
    return res, time.perf_counter() - t0


def run_ensemble(config: ExperimentConfig, workers: int = 1) -> tuple[list, list]:
    """All realizations, merged in index order regardless of ``workers``."""
    if workers < 1:
        raise InvalidArgumentError("workers must be at least 1")
    jobs = [(config, i) for i in range(config.n_realizations)]
    if workers == 1:
        out = [_run_indexed(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(_run_indexed, jobs))
    out.sort(key=lambda r: r[0].index)
    return [r for r, _ in out], [t for _, t in out]


def versions() -> dict:
    return {"schrodecay": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version(), "backend": kernels.BACKEND}


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_points_csv(path, samples, seeds):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["realization", "realization_seed", "point"])
        for i, (s, seed) in enumerate(zip(samples, seeds)):
            for x in s.points:
                w.writerow([i, int(seed), repr(float(x))])


def write_ensemble_dir(out, samples=None, measure_groups=None, seeds=None, summary=None,
                       measure_labels=None):
    """Write points/measures/summary in the shared layout; returns the path."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    n = len(samples) if samples is not None else len(measure_groups)
    seeds = list(seeds) if seeds is not None else list(range(n))
    if samples is not None:
        write_points_csv(out / "points.csv", samples, seeds)
    if measure_groups is not None:
        mdir = out / "measures"
        mdir.mkdir(exist_ok=True)
        for i, group in enumerate(measure_groups):
            labels = None if measure_labels is None else measure_labels[i]
            write_measure_csv(mdir / f"r{i:05d}.csv", group, labels)
    if summary is not None:
        _write_json(out / "summary.json", summary)
    return out


def simulate(config: ExperimentConfig, out_dir=None, workers: int = 1) -> dict:
    """Run the ensemble and write the output directory; returns the summary."""
    t0 = time.perf_counter()
    results, times = run_ensemble(config, workers)
    out = Path(out_dir or config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    L = config.box_length
    k0 = math.sqrt(config.reference_energy)
    rows = []
    for r in results:
        for i, E in enumerate(r.energies):
            rows.append((r.seed, r.first_index + i, E, L * (math.sqrt(E) - k0)))
    write_spectra_csv(out / "spectra.csv", rows)
    window = results[0].points.window
    summary = {
        "origin": "simulation",
        "config": config.to_dict(),
        "versions": versions(),
        "energy_window": list(config.energy_window),
        "reference_energy": config.reference_energy,
        "point_window": [float(window[0]), float(window[1])],
        "realization_seeds": [r.seed for r in results],
        "eigenvalue_counts": [len(r.energies) for r in results],
        "pair_counts": [len(r.pairs) for r in results],
    }
    write_ensemble_dir(out, [r.points for r in results],
                       [[p.measure for p in r.pairs] for r in results],
                       [r.seed for r in results], summary,
                       [[p.j for p in r.pairs] for r in results])
    _write_json(out / "timing.json", {"total_seconds": time.perf_counter() - t0,
                                      "realization_seconds": times, "workers": workers,
                                      "cpu_count": os.cpu_count()})
    return summary


def load_ensemble(directory) -> Ensemble:
    """Read a simulation or oracle directory into an :class:`Ensemble`."""
    d = Path(directory)
    if not d.is_dir():
        raise InvalidArgumentError(f"not a directory: {d}")
    summary = {}
    if (d / "summary.json").exists():
        summary = json.loads((d / "summary.json").read_text())
    samples = []
    if (d / "points.csv").exists():
        n = len(summary.get("realization_seeds", [])) or None
        groups: dict[int, list[float]] = {}
        with open(d / "points.csv", newline="") as fh:
            for row in csv.DictReader(fh):
                groups.setdefault(int(row["realization"]), []).append(float(row["point"]))
        n = n or (max(groups) + 1 if groups else 0)
        window = summary.get("point_window")
        for i in range(n):
            pts = np.array(groups.get(i, []))
            win = tuple(window) if window else ((pts.min(), pts.max()) if pts.size else (0.0, 0.0))
            samples.append(PointSample(window=win, points=pts,
                                       origin=summary.get("origin", "simulation")))
    measures = []
    mdir = d / "measures"
    if mdir.is_dir():
        for f in sorted(mdir.glob("r*.csv")):
            measures.append(read_measure_csv(f))
    if not samples and not measures:
        raise InvalidArgumentError(f"no points.csv or measures/ in {d}")
    return Ensemble(points=samples, measures=measures, origin=summary.get("origin", "simulation"))
