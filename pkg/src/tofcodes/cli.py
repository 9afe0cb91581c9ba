"""Command-line entry point: ``tofcodes generate|shift|analyze|sweep|simulate``.

Exit codes: 0 ok, 2 invalid configuration or input, 3 algorithmic failure,
4 I/O error.
"""
import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__, io, rng
from .analysis import DEFAULT_BINS, DEFAULT_THRESHOLDS, analyze, sweep_coherence
from .codegen import gen_gcomb, gen_peg, gen_random, gen_she
from .errors import ConfigError, PoolExhausted, ToFCodesError
from .model import CameraConfig, derive_grid, validate_config
from .recovery import exhaustive_single_target, recovery_trial_batch, summarize_trials
from .shifts import STRATEGIES, apply_shifts, select_shifts
from .synthesis import build_kernel, kernel_rows, synthesize

EXIT_OK, EXIT_INPUT, EXIT_ALGO, EXIT_IO = 0, 2, 3, 4


class Run:
    """Collects timings, digests and resolved settings for the run manifest."""

    def __init__(self, args, command):
        self.args = args
        self.command = command
        self.out_dir = Path(args.out_dir)
        self.timings = {}
        self.inputs = {}
        self.outputs = {}
        self.settings = {}

    def stage(self, name):
        run = self

        class _Timer:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                run.timings[name] = round(time.perf_counter() - self.t0, 6)

        return _Timer()

    def read(self, path):
        self.inputs[str(path)] = io.file_digest(path)

    def write(self, name, text):
        path = self.out_dir / name
        io.write_text(path, text)
        self.outputs[name] = io.file_digest(path)
        return path

    def finish(self):
        manifest = {
            "tool": "tofcodes",
            "version": __version__,
            "command": self.command,
            "seed": self.args.seed,
            "settings": self.settings,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "timings_s": self.timings,
        }
        io.write_text(self.out_dir / f"manifest_{self.command}.json",
                      json.dumps(manifest, indent=2) + "\n")


def _load_config(run):
    if run.args.config is None:
        cfg = CameraConfig.prototype()
    else:
        run.read(run.args.config)
        cfg = io.read_config(run.args.config)
    problems = validate_config(cfg)
    if problems:
        raise ConfigError("invalid config: " + "; ".join(problems))
    run.settings["config"] = io.config_to_dict(cfg)
    return cfg


def _floats(text):
    return [float(t) for t in text.split(",") if t.strip()]


def _ints(text):
    return [int(t) for t in text.split(",") if t.strip()]


def _snrs(text):
    out = []
    for t in text.split(","):
        t = t.strip().lower()
        if t in ("none", "clean", "inf", "+inf"):
            out.append(None)
        elif t:
            out.append(float(t))
    return out


def cmd_generate(args):
    run = Run(args, "generate")
    cfg = _load_config(run)
    if args.n is not None:
        cfg = cfg.with_code_length(args.n)
    grid = derive_grid(cfg)
    kernel = build_kernel(grid)
    run.settings.update(method=args.method, n=grid.n, density=args.density)
    trace = None
    with run.stage("generate"):
        if args.method == "random":
            code = gen_random(cfg.m, grid.n, args.density, args.seed)
        elif args.method == "she":
            code = gen_she(cfg.m, grid.n, args.seed)
        elif args.method == "peg":
            code = gen_peg(cfg.m, grid.n, cfg.n_deg, args.seed)
        else:
            code, trace = gen_gcomb(cfg.m, grid.n, cfg.n_deg, grid, kernel)
    with run.stage("synthesize"):
        a = synthesize(code, kernel, grid)
    run.write("codes.codes", io.codes_to_text(code))
    run.write("codes.json", io.dumps(io.matrix_to_dict(code.entries)))
    run.write("matrix.json", io.dumps(io.matrix_to_dict(a, grid.dt)))
    run.write("kernel.csv", io.csv_text(("index", "t_ns", "value"), kernel_rows(kernel)))
    if trace is not None:
        run.write("gcomb_trace.csv", io.csv_text(
            ("column_index", "combination", "rejected_count", "objective"), trace.csv_rows()))
    run.finish()
    print(f"{args.method}: {code.m}x{code.n} codes, {a.m}x{a.n_samples} matrix -> {run.out_dir}")
    return EXIT_OK


def cmd_shift(args):
    run = Run(args, "shift")
    run.read(args.matrix)
    a = io.read_matrix(args.matrix)
    run.settings.update(matrix=str(args.matrix), strategy=args.strategy, passes=args.passes)
    with run.stage("search"):
        res = select_shifts(a, args.strategy, seed=args.seed, passes=args.passes)
    shifted = apply_shifts(a, res.shifts)
    run.write("shifted_matrix.json", io.dumps(io.matrix_to_dict(shifted, a.dt)))
    run.write("shifts.json", io.shifts_to_text(res.shifts))
    run.write("shift_trajectory.csv",
              io.csv_text(("row", "chosen_offset", "objective"), res.csv_rows()))
    run.settings.update(objective_before=res.objective_before,
                        objective_after=res.objective_after)
    run.finish()
    print(f"{args.strategy}: min chordal distance {res.objective_before:.6g} -> "
          f"{res.objective_after:.6g}")
    return EXIT_OK


def cmd_analyze(args):
    run = Run(args, "analyze")
    run.read(args.matrix)
    a = io.read_matrix(args.matrix)
    thresholds = _floats(args.thresholds)
    run.settings.update(matrix=str(args.matrix), thresholds=thresholds, bins=args.bins)
    with run.stage("analyze"):
        rep = analyze(a, thresholds, args.bins)
    run.write("histogram.csv", io.csv_text(("bin_lo", "bin_hi", "count"), rep.histogram_rows()))
    run.write("analysis.json", json.dumps(rep.summary(), indent=2) + "\n")
    if args.dump_gram:
        run.write("gram.json", io.dumps(io.matrix_to_dict(rep.gram)))
    run.finish()
    print(json.dumps(rep.summary()))
    return EXIT_OK


def cmd_sweep(args):
    run = Run(args, "sweep")
    cfg = _load_config(run)
    if args.n_steps is not None:
        cfg = CameraConfig(cfg.f_m, cfg.f_r, args.n_steps, cfg.fwhm, cfg.m, cfg.n_deg)
        run.settings["config"] = io.config_to_dict(cfg)
    n_values = _ints(args.n_list)
    run.settings.update(method=args.method, n_values=n_values, n_real=args.n_real,
                        density=args.density)
    with run.stage("sweep"):
        res = sweep_coherence(args.method, cfg, n_values, args.n_real, args.seed,
                              p=args.density, threads=args.threads)
    rows = [(repr(eta), n, r, repr(mu)) for eta, n, r, mu, _ in res.records]
    run.write("sweep.csv", io.csv_text(("eta", "n", "realization", "mu"), rows))
    run.write("sweep_summary.json", json.dumps(res.aggregates(), indent=2) + "\n")
    run.finish()
    for agg in res.aggregates():
        print(f"eta={agg['eta']:.4f} n={agg['n']} mean={agg['mean']:.6f} "
              f"max={agg['max']:.6f} frac_mu1={agg['frac_unit']:.3f}")
    return EXIT_OK


def cmd_simulate(args):
    run = Run(args, "simulate")
    run.read(args.matrix)
    a = io.read_matrix(args.matrix)
    snrs = _snrs(args.snr)
    run.settings.update(matrix=str(args.matrix), k=args.k, snr_db=[
        "none" if s is None else s for s in snrs], trials=args.trials)
    with run.stage("trials"):
        rows = recovery_trial_batch(a, args.k, snrs, args.trials, args.seed,
                                    threads=args.threads)
    table = [("none" if s is None else repr(s), t, k, int(ex), repr(de), repr(dd))
             for s, t, k, ex, de, dd in rows]
    run.write("recovery.csv", io.csv_text(
        ("snr_db", "trial", "k", "exact_support", "delay_err_ns", "depth_err_m"), table))
    summary = {"batches": [
        {**s, "snr_db": "none" if s["snr_db"] is None else s["snr_db"]}
        for s in summarize_trials(rows)]}
    if args.exhaustive:
        if args.k != 1:
            raise ConfigError("--exhaustive requires --k 1")
        with run.stage("exhaustive"):
            hits = exhaustive_single_target(a)
        summary["exhaustive"] = {"exact": len(hits), "total": a.n_samples}
        print(f"exhaustive single-target: {len(hits)}/{a.n_samples} exact")
    run.write("recovery_summary.json", json.dumps(summary, indent=2) + "\n")
    run.finish()
    for s in summary["batches"]:
        print(f"snr={s['snr_db']} exact={s['exact_support_rate']:.3f} "
              f"delay_err={s['mean_delay_err_ns']:.4g} ns")
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="camera config JSON (default: prototype camera)")
    common.add_argument("--seed", type=int, default=rng.DEFAULT_SEED)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out-dir", default="out")

    p = argparse.ArgumentParser(prog="tofcodes", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="generate codes and sensing matrix")
    g.add_argument("--method", choices=("random", "she", "peg", "gcomb"), default="gcomb")
    g.add_argument("--density", type=float, default=0.5, help="Bernoulli p for random codes")
    g.add_argument("--n", type=int, help="override code length (sets f_r = f_m / n)")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("shift", parents=[common], help="apply per-row offsets")
    s.add_argument("matrix")
    s.add_argument("--strategy", choices=STRATEGIES, default="greedy")
    s.add_argument("--passes", type=int, default=1)
    s.set_defaults(func=cmd_shift)

    a = sub.add_parser("analyze", parents=[common], help="coherence / Gram / histogram report")
    a.add_argument("matrix")
    a.add_argument("--thresholds", default=",".join(str(t) for t in DEFAULT_THRESHOLDS))
    a.add_argument("--bins", type=int, default=DEFAULT_BINS)
    a.add_argument("--dump-gram", action="store_true")
    a.set_defaults(func=cmd_analyze)

    w = sub.add_parser("sweep", parents=[common], help="coherence vs aspect ratio")
    w.add_argument("--method", choices=("random", "she", "peg", "gcomb"), default="random")
    w.add_argument("--n-list", default="16,32,64,128")
    w.add_argument("--n-real", type=int, default=100)
    w.add_argument("--n-steps", type=int, help="override sub-steps per chip")
    w.add_argument("--density", type=float, default=0.5)
    w.set_defaults(func=cmd_sweep)

    r = sub.add_parser("simulate", parents=[common], help="sparse recovery trials")
    r.add_argument("matrix")
    r.add_argument("--k", type=int, default=1)
    r.add_argument("--snr", default="none", help="comma list of dB values; 'none' = noiseless")
    r.add_argument("--trials", type=int, default=100)
    r.add_argument("--exhaustive", action="store_true")
    r.set_defaults(func=cmd_simulate)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PoolExhausted as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ALGO
    except (ToFCodesError, ValueError, KeyError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
