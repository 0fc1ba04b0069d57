"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line (printed in the terminal summary by
``conftest.py``).  Master seeds are fixed constants chosen before any run:
criterion ``N`` uses seed ``N``.
"""
import filecmp
import math
import time

import numpy as np
import pytest
from scipy import stats

from schrodecay.cli import main
from schrodecay.decay import DecayProfile
from schrodecay.experiment import ExperimentConfig, realization_seed, run_ensemble
from schrodecay.fd import GridHamiltonian, eigenvalues_in, free_discrete_eigenvalues
from schrodecay.measure import build_measure, localization_center, total_variation, uniform, w1_to_point
from schrodecay.oracles import (OracleConfig, clock_sample, envelope_cell_integrals,
                                expbm_measure_sample, poisson_sample, sample_oracle,
                                sine_beta_sample)
from schrodecay.prufer import rho_tilde_ensemble, sde_diagnostics, shoot_eigenvalues
from schrodecay.stats import Ensemble, PairSample, compare, kernel_average, pooled_gaps
from schrodecay.torus import DiffusionSpec, TorusField, lyapunov_tau, sample_brownian_path

pytestmark = pytest.mark.acceptance

RESULTS = []
WINDOW = (-20 * math.pi, 20 * math.pi)


def record(criterion, ok, detail):
    RESULTS.append(f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}")
    print(RESULTS[-1])
    assert ok, detail


def test_criterion_01_free_spectrum_exact():
    t0 = time.perf_counter()
    L, h = 10.0, 1e-3
    H = GridHamiltonian.free(L, h)
    j = np.arange(1, 21)
    top = 0.5 * ((20 * math.pi / L) ** 2 + (21 * math.pi / L) ** 2)
    sp = eigenvalues_in(H, (1e-3, top), atol=0.0)
    fd_closed = np.max(np.abs(sp.energies / free_discrete_eigenvalues(L, h, j) - 1))
    fd_cont = np.max(np.abs(sp.energies / (j * math.pi / L) ** 2 - 1))
    path = sample_brownian_path(L + h, h, seed=1)
    sh = shoot_eigenvalues(path, TorusField.zero(), DecayProfile(0.5), L, (1e-3, top))
    shoot_err = np.max(np.abs(np.sqrt(sh.energies) - j * math.pi / L))
    elapsed = time.perf_counter() - t0
    ok = (len(sp) == 20 and len(sh) == 20 and fd_closed < 1e-12 and fd_cont < 5e-6
          and shoot_err < 1e-10 and elapsed < 10)
    record(1, ok, f"closed-form rel {fd_closed:.2e} (<1e-12), continuum rel {fd_cont:.2e} (<5e-6), "
                  f"shooting abs {shoot_err:.2e} (<1e-10), {elapsed:.1f}s (<10s)")


def test_criterion_02_free_measure_flatness():
    t0 = time.perf_counter()
    L, h = 10.0, 1e-3
    top = 0.5 * ((20 * math.pi / L) ** 2 + (21 * math.pi / L) ** 2)
    sp = eigenvalues_in(GridHamiltonian.free(L, h), (1e-3, top), atol=0.0, with_vectors=True)
    u = uniform()
    tv = max(total_variation(build_measure(p, L), u) for p in sp.pairs)
    elapsed = time.perf_counter() - t0
    record(2, len(sp) == 20 and tv < 1e-6 and elapsed < 10,
           f"max TV to uniform over {len(sp)} free measures {tv:.2e} (<1e-6), {elapsed:.1f}s (<10s)")


def test_criterion_03_tau_closed_form():
    t0 = time.perf_counter()
    worst = 0.0
    for E in (0.25, 1.0, 4.0):
        # hand sum over modes n = +-1: n^2 |(1/2) / (-1/2 + 2i sqrt(E))|^2 / (8E)
        hand = sum(abs(0.5 / (-0.5 + 2j * math.sqrt(E))) ** 2 for _ in (1, -1)) / (8 * E)
        closed = 1 / (4 * E * (1 + 16 * E))
        got = lyapunov_tau(TorusField.cosine(), DiffusionSpec(), E)
        worst = max(worst, abs(got - closed), abs(hand - closed))
    elapsed = time.perf_counter() - t0
    record(3, worst < 1e-12 and elapsed < 1, f"max |tau - 1/(4E(1+16E))| {worst:.1e} (<1e-12), "
                                             f"{elapsed:.3f}s (<1s)")


def test_criterion_04_sde_moments():
    seeds = [realization_seed(4, i) for i in range(500)]
    ens = rho_tilde_ensemble(TorusField.cosine(), DecayProfile(0.5), 2000.0, 1.0, 0.0,
                             [0.25, 1.0], 500, seeds, dt=0.05)
    d = sde_diagnostics(ens, 0.25, 1.0)
    target = math.log(4) / 68
    zm = (d.drift - target) / d.se_drift
    zv = (d.qv - target) / d.se_qv
    record(4, abs(zm) < 3 and abs(zv) < 3,
           f"mean {d.drift:.5f} (SE {d.se_drift:.5f}, z={zm:+.2f}), variance {d.qv:.5f} "
           f"(SE {d.se_qv:.5f}, z={zv:+.2f}) vs {target:.5f}, |z|<3")


def _ensemble(seed, **kw):
    cfg = ExperimentConfig(master_seed=seed, **kw)
    results, _ = run_ensemble(cfg)
    return results


def test_criterion_05_clock_regime():
    sds = {}
    for L in (500.0, 2000.0):
        res = _ensemble(5, alpha=1.0, E0=1.0, window=WINDOW, L=L, h=0.0175, n_realizations=100,
                        pairs_per_realization=1, measure_cells=8)
        gaps = pooled_gaps([r.points for r in res])
        sds[L] = float(gaps.std())
    ok = sds[2000.0] < sds[500.0] and sds[2000.0] < 0.15 * math.pi
    record(5, ok, f"gap SD L=500: {sds[500.0] / math.pi:.4f} pi, L=2000: {sds[2000.0] / math.pi:.4f} pi "
                  f"(decreasing, <0.15 pi)")


def test_criterion_06_localization():
    # One pair per realization keeps the 500 centres independent.
    res = _ensemble(6, alpha=0.25, J=(0.2, 0.3), L=2000.0, h=0.05, n_realizations=500,
                    pairs_per_realization=1)
    pairs = [p for r in res for p in r.pairs]
    centers = np.array([localization_center(p.measure) for p in pairs])
    ks = stats.kstest(centers, "uniform").statistic
    w1 = float(np.mean([w1_to_point(p.measure, c) for p, c in zip(pairs, centers)]))
    record(6, len(pairs) == 500 and ks < 0.05 and w1 < 0.1,
           f"{len(pairs)} pairs: center KS vs uniform {ks:.4f} (<0.05), mean W1 to own center "
           f"{w1:.4f} (<0.1)")


def test_criterion_07_critical_regime():
    n = 300
    res = _ensemble(7, alpha=0.5, E0=1.0, window=WINDOW, L=2000.0, h=0.0175, n_realizations=n,
                    pairs_per_realization=2)
    sim = Ensemble(points=[r.points for r in res], measures=[[p.measure for p in r.pairs] for r in res])
    tau = lyapunov_tau(TorusField.cosine(), DiffusionSpec(), 1.0)
    oracles = {k: Ensemble(points=[sample_oracle(OracleConfig(k, beta=1 / tau, seed=7), i)
                                   for i in range(n)], origin=k)
               for k in ("sine_beta", "clock", "poisson")}
    d = {k: compare(sim, e, "gap_w1", seed=7) for k, e in oracles.items()}
    s, c, p = d["sine_beta"], d["clock"], d["poisson"]
    ivs = sorted((x.ci_low, x.ci_high) for x in (s, c, p))
    disjoint = all(ivs[i][1] < ivs[i + 1][0] for i in range(2))
    gap_ok = s.distance < c.distance and s.distance < p.distance and disjoint
    xbm = Ensemble(measures=[[sample_oracle(OracleConfig("exp_bm", tau=tau, seed=7), i)[0]]
                             for i in range(2 * n)], origin="exp_bm")
    unif = Ensemble(measures=[[uniform()]])
    mx = compare(sim, xbm, "measure_w1_mean", seed=7)
    mu = compare(sim, unif, "measure_w1_mean", seed=7)
    meas_ok = mx.distance < mu.distance
    record(7, gap_ok and meas_ok,
           f"gap W1 sine_68 {s.distance:.4f} [{s.ci_low:.4f}, {s.ci_high:.4f}], clock {c.distance:.4f} "
           f"[{c.ci_low:.4f}, {c.ci_high:.4f}], poisson {p.distance:.4f} [{p.ci_low:.4f}, {p.ci_high:.4f}]; "
           f"measure W1 to exp_bm {mx.distance:.4f} vs uniform {mu.distance:.4f}")


def test_criterion_08_kernel_average_identity():
    L, J = 500.0, (1.0, 2.0)
    sp = eigenvalues_in(GridHamiltonian.free(L, 0.01), J)
    pairs = [PairSample(float(E), uniform(8)) for E in sp.energies]
    r = kernel_average([pairs], J, L)
    record(8, r.relative_gap < 0.02, f"direct {r.direct:.5f} vs identity {r.identity:.5f}, "
                                     f"relative gap {r.relative_gap:.4f} (<0.02)")


def test_criterion_09_oracle_self_tests():
    clock_dev = max(np.max(np.abs(np.diff(clock_sample(WINDOW, k).points) - math.pi)) for k in range(20))
    gaps = np.diff(poisson_sample((0.0, 10200 * math.pi), seed=9).points)
    ks = stats.kstest(gaps, "expon", args=(0, math.pi)).statistic
    env_err = 0.0
    for kernel in ("log_ratio", "abs_diff"):
        mu, U = expbm_measure_sample(3.0, kernel, seed=9, zero_noise=True)
        env = envelope_cell_integrals(3.0, U, kernel, mu.cells)
        env_err = max(env_err, float(np.max(np.abs(mu.density - env / env.sum() * mu.cells))))
    mean_gap = np.concatenate([np.diff(sine_beta_sample(2.0, seed=k).points) for k in range(200)]).mean()
    ok = clock_dev < 1e-12 and gaps.size >= 10000 and ks < 0.02 and env_err < 1e-10 \
        and abs(mean_gap / math.pi - 1) < 0.02
    record(9, ok, f"clock gap dev {clock_dev:.1e}, Poisson KS {ks:.4f} on {gaps.size} gaps (<0.02), "
                  f"exp_bm envelope err {env_err:.1e} (<1e-10), Sine_2 mean gap {mean_gap / math.pi:.4f} pi")


def test_criterion_10_determinism(tmp_path):
    cfg = tmp_path / "det.cfg"
    cfg.write_text("alpha = 0.5\nE0 = 1\nwindow = -31.4,31.4\nL = 300\nh = 0.02\n"
                   "n_realizations = 4\nmaster_seed = 10\npairs_per_realization = 2\nmeasure_cells = 128\n")
    runs = {}
    for tag, w in (("a", 1), ("b", 1), ("c", 2)):
        out = tmp_path / tag
        assert main(["simulate", "--config", str(cfg), "--out", str(out), "--workers", str(w)]) == 0
        runs[tag] = out
    files = ["spectra.csv", "points.csv", "summary.json"] + \
        [f"measures/{p.name}" for p in sorted((runs["a"] / "measures").glob("*.csv"))]
    same = [filecmp.cmp(runs["a"] / f, runs[t] / f, shallow=False) for f in files for t in ("b", "c")]
    record(10, all(same), f"{sum(same)}/{len(same)} file comparisons byte-identical "
                          f"(repeat run, and 1 vs 2 workers)")
