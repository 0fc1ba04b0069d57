"""Command-line interface.

Exit codes: 0 success, 2 invalid arguments or config, 3 numerical failure,
4 statistical precondition unmet.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .decay import DecayProfile
from .errors import InvalidArgumentError, SchrodecayError, StatisticalPreconditionError
from .experiment import (ExperimentConfig, load_ensemble, realization_seed,
                         simulate, versions, write_ensemble_dir)
from .measure import localization_center
from .oracles import DEFAULT_WINDOW, KERNELS, KINDS, OracleConfig, sample_oracle
from .prufer import rho_tilde_ensemble, sde_diagnostics
from .stats import STATISTICS, compare, pooled_gaps
from .torus import DiffusionSpec, lyapunov_tau, parse_field


def cmd_tau(args):
    field = parse_field(args.field)
    tau = 0.0 if field.is_zero else lyapunov_tau(field, DiffusionSpec(args.sigma2), args.energy)
    out = {"alpha": args.alpha, "energy": args.energy, "field": args.field,
           "tau": tau, "beta": (1.0 / tau) if tau > 0 else None}
    print(json.dumps(out))
    return 0


def cmd_simulate(args):
    config = ExperimentConfig.from_file(args.config)
    summary = simulate(config, args.out, workers=args.workers)
    out = args.out or config.out_dir
    print(json.dumps({"out_dir": str(out),
                      "eigenvalues": int(sum(summary["eigenvalue_counts"])),
                      "pairs": int(sum(summary["pair_counts"]))}))
    return 0


def cmd_oracle(args):
    if args.samples < 1:
        raise InvalidArgumentError("--samples must be at least 1")
    param = {}
    if args.kind == "sine_beta":
        param["beta"] = args.param
    elif args.kind == "exp_bm":
        param["tau"] = args.param
    cfg = OracleConfig(kind=args.kind, kernel=args.kernel, window=tuple(args.window),
                       cells=args.cells, seed=args.seed, size=args.size, **param)
    draws = [sample_oracle(cfg, i) for i in range(args.samples)]
    seeds = [realization_seed(args.seed, i) for i in range(args.samples)]
    summary = {"origin": args.kind, "oracle": {k: v for k, v in vars(cfg).items()},
               "samples": args.samples, "versions": versions()}
    summary["oracle"]["window"] = list(cfg.window)
    if args.kind == "exp_bm":
        write_ensemble_dir(args.out, measure_groups=[[mu] for mu, _ in draws], seeds=seeds,
                           summary=summary)
        with open(Path(args.out) / "centers.csv", "w") as fh:
            fh.write("sample,U,median\n")
            for i, (mu, U) in enumerate(draws):
                fh.write(f"{i},{U!r},{localization_center(mu)!r}\n")
    else:
        summary["point_window"] = list(cfg.window)
        write_ensemble_dir(args.out, samples=draws, seeds=seeds, summary=summary)
    print(json.dumps({"out_dir": str(args.out), "kind": args.kind, "samples": args.samples}))
    return 0


def cmd_compare(args):
    a = load_ensemble(args.a)
    b = load_ensemble(args.b) if args.b else None
    result = compare(a, b, args.statistic, seed=args.seed, n_bootstrap=args.bootstrap)
    print(json.dumps(result.to_dict()))
    return 0


def cmd_sde_check(args):
    config = ExperimentConfig.from_file(args.config)
    if config.n is None or config.E0 is None:
        raise InvalidArgumentError("sde-check needs n and E0 in the config")
    if config.n_realizations < 2:
        raise StatisticalPreconditionError("sde-check needs at least two realizations")
    dt = config.path_dt
    seeds = [realization_seed(config.master_seed, i) for i in range(config.n_realizations)]
    ens = rho_tilde_ensemble(parse_field(config.field), DecayProfile(config.alpha), config.n,
                             math.sqrt(config.E0), config.lam, [args.s, args.t],
                             config.n_realizations, seeds, dt=dt,
                             spec=DiffusionSpec(config.sigma2))
    diag = sde_diagnostics(ens, args.s, args.t)
    text = diag.to_json()
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return 0


_GAP_SCRIPT = """\
# gap histogram of {name}
set terminal pngcairo size 800,600
set output '{name}_gaps.png'
binwidth = {bw}
bin(x) = binwidth * floor(x / binwidth) + binwidth / 2
set xlabel 'gap'
set ylabel 'density'
plot '{data}' using (bin($1)):(1.0 / ({n} * binwidth)) smooth frequency with boxes title 'gaps', \\
     exp(-x / pi) / pi title 'Exp(1/pi)'
"""

_MEASURE_SCRIPT = """\
# first measures of {name}
set terminal pngcairo size 800,600
set output '{name}_measures.png'
set datafile separator ','
set xlabel 't'
set ylabel 'density'
plot {plots}
"""


def cmd_plot(args):
    src = Path(args.input)
    ens = load_ensemble(src)
    out = Path(args.output or src)
    out.mkdir(parents=True, exist_ok=True)
    name = src.name or "ensemble"
    written = []
    if ens.points:
        gaps = pooled_gaps(ens.points)
        if gaps.size:
            data = out / "gaps.dat"
            np.savetxt(data, gaps, fmt="%.17g")
            script = out / "gaps.gp"
            script.write_text(_GAP_SCRIPT.format(name=name, data=data.name, n=gaps.size,
                                                 bw=max(gaps.mean() / 10, 1e-12)))
            written += [str(data), str(script)]
    files = sorted((src / "measures").glob("r*.csv")) if (src / "measures").is_dir() else []
    if files:
        plots = ", \\\n     ".join(
            f"'{f.resolve()}' every ::1 using 2:3 with lines title '{f.stem}'" for f in files[:4])
        script = out / "measures.gp"
        script.write_text(_MEASURE_SCRIPT.format(name=name, plots=plots))
        written.append(str(script))
    if not written:
        raise StatisticalPreconditionError("nothing to plot")
    print(json.dumps({"written": written}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="schrodecay", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("tau", help="Lyapunov exponent tau(E) and beta = 1/tau")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--energy", type=float, required=True)
    s.add_argument("--field", default="cos")
    s.add_argument("--sigma2", type=float, default=1.0)
    s.set_defaults(func=cmd_tau)

    s = sub.add_parser("simulate", help="run an ensemble from a key=value config")
    s.add_argument("--config", required=True)
    s.add_argument("--out", default=None, help="overrides out_dir from the config")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("oracle", help="sample a reference ensemble")
    s.add_argument("--kind", choices=KINDS, required=True)
    s.add_argument("--param", type=float, default=None, help="beta (sine_beta) or tau (exp_bm)")
    s.add_argument("--samples", type=int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--kernel", choices=KERNELS, default="log_ratio")
    s.add_argument("--window", type=float, nargs=2, default=list(DEFAULT_WINDOW))
    s.add_argument("--cells", type=int, default=512)
    s.add_argument("--size", type=int, default=400, help="matrix size for sine_beta")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("compare", help="distance between two ensemble directories")
    s.add_argument("--a", required=True)
    s.add_argument("--b", default=None)
    s.add_argument("--statistic", choices=STATISTICS, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--bootstrap", type=int, default=1000)
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("sde-check", help="moments of rho~_t - rho~_s")
    s.add_argument("--config", required=True)
    s.add_argument("--s", type=float, required=True)
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_sde_check)

    s = sub.add_parser("plot", help="write gnuplot scripts for an ensemble directory")
    s.add_argument("--input", required=True)
    s.add_argument("--output", default=None)
    s.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SchrodecayError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
