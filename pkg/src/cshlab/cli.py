"""Command-line front end.

Subcommands: simulate, null-check, bilinear-scan, knapp-scan, lie-info.
Every run resolves its configuration (JSON config file merged with flags,
flags winning), executes, writes data artifacts plus a manifest echoing the
resolved configuration, and returns 0 on success, 1 on usage errors and 2
when a run-time invariant fails.  Data outputs are byte-stable for a fixed
seed; wall-clock timestamps live only in the manifest.
"""

import argparse
import json
import os
import sys
import time
import warnings

import numpy as np

from . import __version__
from .evolution import (
    BlowUpError,
    ConstraintError,
    EvolutionConfig,
    SmallnessError,
    evolve,
    make_abelian_pair_data,
    make_initial_state,
    monitor,
)
from .grid import Grid2D
from .knapp import (
    RESONANT_4,
    amplitude_scan,
    necessary_condition_report,
    omega_scan,
)
from .lie import LieDimensionError, PhysicsParams, build_su_n_basis, invariant_report
from .nullforms import (
    GaugePreconditionError,
    make_lorenz_snapshot,
    make_matter_snapshot,
    null_symbol_bound_scan,
    verify_null_decomposition,
)
from .snapshots import save_snapshot
from .xsb import (
    DyadicBlock,
    bilinear_scaling_scan,
    fit_loglog,
    measure_bilinear_constant,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class CsvFormatError(ValueError):
    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")
        self.line = line


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[h]) for h in header) + "\n")


def write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, DyadicBlock):
        return {"sign": obj.sign, "N": obj.N, "L": obj.L}
    raise TypeError(f"not JSON serializable: {type(obj)}")


def write_manifest(outdir, subcommand, config):
    payload = {
        "subcommand": subcommand,
        "config": config,
        "version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    write_json(os.path.join(outdir, "manifest.json"), payload)


def emit_plot_script(csv_path, kind, out_path=None):
    """Standalone gnuplot script for a log-log scaling figure.

    kind selects the (x, y) columns: 'knapp' plots lambda against the
    amplitude, 'bilinear' plots N against the empirical constant.  The
    output is byte-stable for identical input CSVs.
    """
    columns = {"knapp": ("lambda", "amplitude"), "bilinear": ("N", "empirical")}
    if kind not in columns:
        raise ValueError(f"unknown plot kind {kind!r}")
    xcol, ycol = columns[kind]
    with open(csv_path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or not lines[0].strip():
        raise CsvFormatError(csv_path, 1, "empty CSV")
    header = lines[0].split(",")
    if xcol not in header or ycol not in header:
        raise CsvFormatError(csv_path, 1, f"missing columns {xcol!r}/{ycol!r}")
    xi, yi = header.index(xcol) + 1, header.index(ycol) + 1
    ncol = len(header)
    for i, ln in enumerate(lines[1:], start=2):
        if not ln.strip():
            continue
        parts = ln.split(",")
        if len(parts) != ncol:
            raise CsvFormatError(csv_path, i, f"expected {ncol} fields, got {len(parts)}")
        try:
            float(parts[xi - 1]), float(parts[yi - 1])
        except ValueError:
            raise CsvFormatError(csv_path, i, "non-numeric scaling data")
    if len([ln for ln in lines[1:] if ln.strip()]) == 0:
        raise CsvFormatError(csv_path, 2, "no data rows")
    out_path = out_path or csv_path + ".gp"
    name = os.path.basename(csv_path)
    script = "\n".join([
        "# log-log scaling figure (gnuplot)",
        f"set datafile separator ','",
        "set logscale xy",
        f"set xlabel '{xcol}'",
        f"set ylabel '{ycol}'",
        "set key left top",
        "f(x) = a + b*x",
        f"fit f(x) '{name}' every ::1 using (log(column({xi}))):(log(column({yi}))) via a, b",
        f"plot '{name}' every ::1 using {xi}:{yi} with points pt 7 title 'measured', \\",
        "     exp(a)*x**b with lines title sprintf('slope %.3f', b)",
        "",
    ])
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(script)
    return out_path


# -- subcommand bodies ---------------------------------------------------------------


def _outdir(args):
    out = args.output_dir or os.environ.get("CSHLAB_OUTPUT_DIR") or "."
    os.makedirs(out, exist_ok=True)
    return out


def cmd_lie_info(args):
    g = build_su_n_basis(args.n)
    rep = invariant_report(g)
    ia, ib, ic, fv = g.f_sparse()
    rep["structure_constants"] = [
        {"a": int(a) + 1, "b": int(b) + 1, "c": int(c) + 1, "value": float(v)}
        for a, b, c, v in zip(ia, ib, ic, fv)
    ]
    for key in ("hermiticity", "tracelessness", "trace_normalization",
                "commutator_consistency", "jacobi", "casimir_commutation"):
        assert rep[key] <= 1e-12, f"lie invariant {key} violated: {rep[key]:.3e}"
    out = _outdir(args)
    write_json(os.path.join(out, "lie_info.json"), rep)
    write_manifest(out, "lie-info", {"n": args.n, "seed": args.seed})
    print(json.dumps(rep, sort_keys=True, default=_json_default))
    return 0


def cmd_null_check(args):
    grid = Grid2D(args.grid_size)
    g = build_su_n_basis(args.n)
    seeds = [args.seed + i for i in range(args.samples)]
    reports = []
    for s in seeds:
        snap = make_lorenz_snapshot(s, grid, g, band=args.band)
        matter = make_matter_snapshot(s + 10 ** 6, grid, g, band=args.band)
        rep = verify_null_decomposition(snap, matter, g)
        reports.append({"seed": s, "matter_identity_residual": rep["matter_identity_residual"],
                        "gauge_identity_residuals": rep["gauge_identity_residuals"],
                        "gauge_residual": rep["gauge_residual"]})
    payload = {
        "grid_size": args.grid_size,
        "band": args.band,
        "n": args.n,
        "snapshots": reports,
        "max_residual": max(max([r["matter_identity_residual"]] + r["gauge_identity_residuals"])
                            for r in reports),
        "symbol_scan": null_symbol_bound_scan(args.symbol_samples, seed=args.seed),
    }
    out = _outdir(args)
    write_json(os.path.join(out, "null_check.json"), payload)
    write_manifest(out, "null-check", vars_config(args, ["grid_size", "band", "n",
                                                         "samples", "symbol_samples",
                                                         "seed"]))
    print(f"max identity residual over {args.samples} snapshots: "
          f"{payload['max_residual']:.3e}")
    assert payload["max_residual"] <= 1e-8, "null decomposition residual too large"
    return 0


def _dyadics_upto(n):
    out = [1]
    while out[-1] * 2 <= n:
        out.append(out[-1] * 2)
    return out


def cmd_bilinear_scan(args):
    rng = np.random.default_rng(args.seed)
    out = _outdir(args)
    rows = []
    if args.mode == "grid":
        triples = []
        for n0 in _dyadics_upto(args.n_max):
            for n1 in _dyadics_upto(args.n_max):
                for n2 in _dyadics_upto(args.n_max):
                    for l0 in _dyadics_upto(args.l_max):
                        for l1 in _dyadics_upto(args.l_max):
                            for l2 in _dyadics_upto(args.l_max):
                                triples.append((n0, l0, n1, l1, n2, l2))
        order = rng.permutation(len(triples))[:args.max_triples]
        mode = "power" if args.adversarial else "gaussian"
        for idx in order:
            n0, l0, n1, l1, n2, l2 = triples[idx]
            sg = rng.choice([-1, 1], size=3)
            rep = measure_bilinear_constant(
                DyadicBlock(int(sg[0]), n0, l0), DyadicBlock(int(sg[1]), n1, l1),
                DyadicBlock(int(sg[2]), n2, l2), trials=args.trials,
                seed=int(rng.integers(2 ** 31)), mode=mode)
            rows.append({
                "N0": n0, "L0": l0, "N1": n1, "L1": l1, "N2": n2, "L2": l2,
                "sign0": int(sg[0]), "sign1": int(sg[1]), "sign2": int(sg[2]),
                "feasible": rep["feasible"], "empirical": rep["empirical"],
                "theoretical": rep["theory"]["min"], "ratio": rep["ratio"],
            })
        summary = {"max_ratio": max((r["ratio"] for r in rows), default=0.0),
                   "feasible_count": sum(1 for r in rows if r["feasible"])}
    else:
        scan_rows = bilinear_scaling_scan(args.scan_n, seed=args.seed,
                                          mode="power" if args.adversarial else "gaussian",
                                          trials=args.trials,
                                          power_iters=args.power_iters)
        for r in scan_rows:
            rows.append({"N0": 1, "L0": r["L0"], "N1": r["N"], "L1": 1,
                         "N2": r["N"], "L2": 1, "sign0": 1, "sign1": 1, "sign2": -1,
                         "feasible": r["feasible"], "empirical": r["empirical"],
                         "theoretical": r["theory_min"], "ratio": r["ratio"],
                         "N": r["N"]})
        emp = fit_loglog([r["N"] for r in rows], [r["empirical"] for r in rows])
        theo = fit_loglog([r["N"] for r in rows], [r["theoretical"] for r in rows])
        summary = {"empirical_slope": emp["slope"], "theoretical_slope": theo["slope"],
                   "slope_gap": abs(emp["slope"] - theo["slope"])}
    header = ["N0", "L0", "N1", "L1", "N2", "L2", "sign0", "sign1", "sign2",
              "feasible", "empirical", "theoretical", "ratio"]
    if args.mode == "scan":
        header.append("N")
    csv_path = os.path.join(out, "bilinear_scan.csv")
    write_csv(csv_path, header, rows)
    write_json(os.path.join(out, "bilinear_summary.json"), summary)
    write_manifest(out, "bilinear-scan",
                   vars_config(args, ["mode", "n_max", "l_max", "max_triples",
                                      "trials", "adversarial", "scan_n",
                                      "power_iters", "seed"]))
    if args.plot_script:
        emit_plot_script(csv_path, "bilinear")
    print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_knapp_scan(args):
    out = _outdir(args)
    config = vars_config(args, ["amplitude", "eps", "c", "m", "samples", "seed",
                                "k_min", "k_max"])
    summary = {}
    csv_path = None
    if args.amplitude in ("second", "third", "both"):
        which_list = ["second", "third"] if args.amplitude == "both" else [args.amplitude]
        fits = {}
        for which in which_list:
            ks = range(args.k_min, args.k_max + 1) if args.k_max else None
            rep = amplitude_scan(which, eps=args.eps, c=args.c, m=args.m,
                                 k_values=ks, mc_samples=args.samples,
                                 seed=args.seed)
            rows = []
            for r in rep["rows"]:
                row = {"lambda": r["lam"], "k": r["k"], "amplitude": r["amplitude"],
                       "ci": r["ci"], "window_feasible": r["window_feasible"]}
                if which == "second":
                    row.update({"I": r["I"], "II": r["II"], "III": r["III"],
                                "IV": r["IV"]})
                    header = ["lambda", "k", "amplitude", "I", "II", "III", "IV",
                              "ci", "window_feasible"]
                else:
                    row.update({"main": r["main_part"], "companion": r["companion_part"],
                                "resonant": r["resonant_part"],
                                "boundary_bound": r["boundary_bound"]})
                    header = ["lambda", "k", "amplitude", "main", "companion",
                              "resonant", "boundary_bound", "ci", "window_feasible"]
                rows.append(row)
            csv_path = os.path.join(out, f"knapp_{which}.csv")
            write_csv(csv_path, header, rows)
            fits[which] = rep["fit"]
            summary[f"{which}_slope"] = rep["fit"]["slope"]
            summary[f"{which}_slope_stderr"] = rep["fit"]["stderr"]
        if args.amplitude == "both":
            summary["thresholds"] = necessary_condition_report(fits["third"],
                                                               fits["second"])
    else:
        lams = [2.0 ** e for e in range(args.lambda_exp_min, args.lambda_exp_max + 1)]
        rep = omega_scan(lams, c=args.c, m=args.m, samples=args.samples,
                         seed=args.seed)
        rows = []
        for s, fit in rep["fits"].items():
            rows.append({"s1": s[0], "s2": s[1], "s3": s[2], "s4": s[3],
                         "resonant": s in RESONANT_4, "slope": fit["slope"]})
        csv_path = os.path.join(out, "knapp_omega.csv")
        write_csv(csv_path, ["s1", "s2", "s3", "s4", "resonant", "slope"], rows)
        summary = {"tilde_support_empty": rep["tilde_support_empty"],
                   "census": rep["census"]}
        config.update({"lambda_exp_min": args.lambda_exp_min,
                       "lambda_exp_max": args.lambda_exp_max})
    write_json(os.path.join(out, "knapp_summary.json"), summary)
    write_manifest(out, "knapp-scan", config)
    if args.plot_script and csv_path and args.amplitude in ("second", "third", "both"):
        emit_plot_script(csv_path, "knapp")
    print(json.dumps(summary, sort_keys=True, default=_json_default))
    return 0


def cmd_simulate(args):
    cfg_file = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            cfg_file = json.load(fh)

    def pick(name, default):
        flag = getattr(args, name.replace("-", "_"), None)
        if flag is not None:
            return flag
        return cfg_file.get(name, default)

    n = int(pick("n", 2))
    v = float(pick("v", 1.0))
    M = int(pick("grid", 64))
    box = float(pick("box-length", 2.0 * np.pi))
    dt = float(pick("dt", 2.5e-3))
    T = float(pick("T", 0.1))
    band = int(pick("band", 3))
    amplitude = float(pick("amplitude", 1e-2))
    higgs_sign = float(pick("higgs-sign", -1.0))
    stride = int(pick("stride", 4))
    recipe = str(pick("recipe", "abelian-pair"))
    if recipe != "abelian-pair":
        raise UsageError(f"unknown data recipe {recipe!r}")
    resolved = {"n": n, "v": v, "grid": M, "box-length": box, "dt": dt, "T": T,
                "band": band, "amplitude": amplitude, "higgs-sign": higgs_sign,
                "stride": stride, "recipe": recipe, "seed": args.seed}
    grid = Grid2D(M, box)
    g = build_su_n_basis(n)
    p = PhysicsParams(v=v)
    data = make_abelian_pair_data(grid, g, seed=args.seed, band=band,
                                  amplitude=amplitude)
    evo = EvolutionConfig(dt=dt, higgs_sign=higgs_sign)
    times, frames = evolve(data, T, g, p, evo, stride=stride)
    rows = monitor(times, frames, g, p)
    out = _outdir(args)
    write_csv(os.path.join(out, "monitor.csv"),
              ["t", "gauge_residual", "gauge_relative", "constraint_residual",
               "constraint_relative", "phi_sobolev", "A_sobolev"], rows)
    state0 = make_initial_state(data, g)
    save_snapshot(os.path.join(out, "initial.snap"),
                  {"phi": state0.phi, "dphi": state0.dphi,
                   "A0": state0.A[0], "A1": state0.A[1], "A2": state0.A[2]},
                  n=n, metadata={"t": 0.0, "seed": args.seed})
    last = frames[-1]
    save_snapshot(os.path.join(out, "final.snap"),
                  {"phi": last.phi, "dphi": last.dphi,
                   "A0": last.A[0], "A1": last.A[1], "A2": last.A[2]},
                  n=n, metadata={"t": times[-1], "seed": args.seed})
    write_manifest(out, "simulate", resolved)
    print(f"evolved to t = {times[-1]:.4g}; max relative gauge residual "
          f"{max(r['gauge_relative'] for r in rows):.3e}")
    return 0


def vars_config(args, names):
    return {name: getattr(args, name) for name in names if hasattr(args, name)}


# -- parser --------------------------------------------------------------------------


def build_parser():
    parser = _Parser(prog="cshlab", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand")

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--output-dir", default=None)
        p.add_argument("--threads", type=int,
                       default=int(os.environ.get("CSHLAB_THREADS", "0")))

    p = sub.add_parser("lie-info", help="basis, structure constants and invariants")
    common(p)
    p.add_argument("--n", type=int, default=2)
    p.set_defaults(func=cmd_lie_info)

    p = sub.add_parser("null-check", help="gauge null-identity residual report")
    common(p)
    p.add_argument("--grid-size", type=int, default=128)
    p.add_argument("--band", type=int, default=8)
    p.add_argument("--samples", type=int, default=5)
    p.add_argument("--symbol-samples", type=int, default=100000)
    p.add_argument("--n", type=int, default=2)
    p.set_defaults(func=cmd_null_check)

    p = sub.add_parser("bilinear-scan", help="restricted bilinear constants")
    common(p)
    p.add_argument("--mode", choices=["grid", "scan"], default="grid")
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--l-max", type=int, default=4)
    p.add_argument("--max-triples", type=int, default=60)
    p.add_argument("--trials", type=int, default=4)
    p.add_argument("--adversarial", action="store_true")
    p.add_argument("--power-iters", type=int, default=20)
    p.add_argument("--scan-n", type=int, nargs="+", default=[4, 8, 16, 32, 64])
    p.add_argument("--plot-script", action="store_true")
    p.set_defaults(func=cmd_bilinear_scan)

    p = sub.add_parser("knapp-scan", help="wave-packet amplitude scaling")
    common(p)
    p.add_argument("--amplitude", choices=["second", "third", "both", "omega"],
                   default="both")
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--c", type=float, default=1e-2)
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--k-min", type=int, default=1)
    p.add_argument("--k-max", type=int, default=0)
    p.add_argument("--lambda-exp-min", type=int, default=8)
    p.add_argument("--lambda-exp-max", type=int, default=16)
    p.add_argument("--plot-script", action="store_true")
    p.set_defaults(func=cmd_knapp_scan)

    p = sub.add_parser("simulate", help="evolve the gauge system and monitor it")
    common(p)
    p.add_argument("--config", default=None, help="JSON config file; flags win")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--v", type=float, default=None)
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--box-length", type=float, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--T", type=float, default=None)
    p.add_argument("--band", type=int, default=None)
    p.add_argument("--amplitude", type=float, default=None)
    p.add_argument("--higgs-sign", type=float, default=None)
    p.add_argument("--stride", type=int, default=None)
    p.add_argument("--recipe", default=None)
    p.set_defaults(func=cmd_simulate)
    return parser


def run(argv):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    if not getattr(args, "subcommand", None):
        parser.print_usage(sys.stderr)
        return 1
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return args.func(args)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (AssertionError, GaugePreconditionError, LieDimensionError,
            BlowUpError, SmallnessError, ConstraintError) as err:
        print(f"invariant violated: {err}", file=sys.stderr)
        return 2


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
