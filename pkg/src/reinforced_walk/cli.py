"""Command-line front end: simulate, sequences, cov and verify.

Every output file embeds the tool version, the resolved configuration and
the master seed as leading ``#`` comment lines (CSV) or a meta block
(JSON), so any artifact can be regenerated from its own metadata.

Exit codes: 0 success / all checks pass, 1 verification failure, 2 invalid
configuration, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from reinforced_walk import __version__
from reinforced_walk.limits import (
    NonDiffusiveError,
    coefficient_signs,
    covariance_params,
    theoretical_cov,
    vt_decomposition,
    vt_matrix,
)
from reinforced_walk.martingale import build_sequences
from reinforced_walk.memory import build_prefix, memory_spec_label, mu, parse_memory_spec
from reinforced_walk.verify import EnsembleSpec, run_ensemble
from reinforced_walk.walk import WalkConfig, parse_step_model, simulate, step_model_label

__all__ = ["main"]

_CHECK_ALIASES = {
    "lln": "lln",
    "fclt": "fclt_cov",
    "fclt_cov": "fclt_cov",
    "rates": "rates",
    "lindeberg": "lindeberg",
    "doob": "doob",
    "marginal": "marginal",
    "martingale": "martingale_mean",
    "martingale_mean": "martingale_mean",
    "h1": "h1",
}

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_CONFIG = 2
EXIT_IO = 3


def _metadata_lines(config_echo: dict, master_seed: int) -> list[str]:
    return [
        f"# reinforced-walk {__version__}",
        "# config: " + json.dumps(config_echo, sort_keys=True),
        f"# master_seed: {master_seed}",
    ]


def _default_threads() -> int:
    raw = os.environ.get("REINFORCED_WALK_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _add_walk_flags(sub: argparse.ArgumentParser, with_step: bool = True) -> None:
    sub.add_argument("--config", help="JSON file with defaults for the flags (flags win)")
    sub.add_argument("--p", type=float, help="memory parameter in (0,1)")
    sub.add_argument("--memory",
                     help="constant | power:B | gamma:D | powerlog:B:G | table:PATH:INDEX")
    if with_step:
        sub.add_argument("--step",
                         help="rademacher | gaussian:M:SD | uniform:A:B | discrete:PATH")
    sub.add_argument("--n", type=int, help="horizon (number of steps)")
    sub.add_argument("--seed", type=int, help="master seed (default 0)")


def _resolve(args, key: str, default=None, required: bool = False, cast=None):
    """Flag value if given, else the config-file value, else the default."""
    value = getattr(args, key, None)
    if value is None:
        value = getattr(args, "_config_values", {}).get(key, default)
    if required and value is None:
        raise ValueError(f"missing required option --{key.replace('_', '-')}")
    if cast is not None and value is not None:
        value = cast(value)
    return value


def _load_config_file(args) -> None:
    values = {}
    path = getattr(args, "config", None)
    if path:
        with open(path) as fh:
            values = json.load(fh)
        if not isinstance(values, dict):
            raise ValueError(f"config file {path} must hold a JSON object")
    args._config_values = values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reinforced-walk",
        description="simulate and statistically verify amnesic step-reinforced random walks",
    )
    parser.add_argument("--version", action="version", version=f"reinforced-walk {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    sim = subs.add_parser("simulate", help="simulate one trajectory and write it as CSV")
    _add_walk_flags(sim)
    sim.add_argument("--trajectory-id", type=int)
    sim.add_argument("--allow-nondiffusive", action="store_true",
                     help="simulate outside the diffusive regime (verification still refuses it)")
    sim.add_argument("--out", help="output CSV path")

    seq = subs.add_parser("sequences", help="write the deterministic sequences as CSV")
    _add_walk_flags(seq, with_step=False)
    seq.add_argument("--out", help="output CSV path")

    cov = subs.add_parser("cov", help="print closed-form limit covariance objects")
    cov.add_argument("--config", help="JSON file with defaults for the flags (flags win)")
    cov.add_argument("--p", type=float)
    cov.add_argument("--alpha", type=float)
    cov.add_argument("--grid", help="covariance table over S1,S2,.../T1,T2,... (prints CSV)")
    cov.add_argument("--out", help="write the output to this path instead of stdout")

    ver = subs.add_parser("verify", help="run Monte Carlo checks and write a JSON report")
    ver.add_argument("checks", nargs="?", help="comma-separated subset of "
                     "lln,fclt,rates,lindeberg,doob,marginal,martingale,h1")
    _add_walk_flags(ver)
    ver.add_argument("--reps", type=int, help="trajectories (default 1000)")
    ver.add_argument("--times",
                     help="comma-separated time grid in (0,1] for fclt/h1 (default 0.5,1)")
    ver.add_argument("--threads", type=int,
                     help="worker threads (default $REINFORCED_WALK_THREADS or 1); "
                     "does not change the report bytes")
    ver.add_argument("--rel-tol", type=float, dest="rel_tol")
    ver.add_argument("--z-max", type=float, dest="z_max")
    ver.add_argument("--out", help="report JSON path (default: print to stdout)")
    ver.add_argument("--emit-plot-data", metavar="DIR",
                     help="write CSV series and PNG figures for the enabled checks")
    return parser


def _cmd_simulate(args) -> int:
    p = _resolve(args, "p", required=True, cast=float)
    memory = parse_memory_spec(_resolve(args, "memory", required=True))
    step = parse_step_model(_resolve(args, "step", required=True))
    n = _resolve(args, "n", required=True, cast=int)
    seed = _resolve(args, "seed", default=0, cast=int)
    trajectory_id = _resolve(args, "trajectory_id", default=0, cast=int)
    out = _resolve(args, "out", required=True)
    # store_true flags read False as "not given", so the file can still enable it
    allow = args.allow_nondiffusive or bool(
        getattr(args, "_config_values", {}).get("allow_nondiffusive", False)
    )
    config = WalkConfig(p=p, memory=memory, step=step, horizon=n,
                        master_seed=seed, allow_nondiffusive=allow)
    traj = simulate(config, trajectory_id)
    echo = {
        "command": "simulate",
        "p": p,
        "memory": memory_spec_label(memory),
        "step": step_model_label(step),
        "n": n,
        "trajectory_id": trajectory_id,
    }
    with open(out, "w", newline="\n") as fh:
        for line in _metadata_lines(echo, seed):
            fh.write(line + "\n")
        fh.write("n,X,S,Y,U,reinforced,memory_index\n")
        for i in range(len(traj)):
            fh.write(
                f"{i + 1},{float(traj.X[i])!r},{float(traj.S[i])!r},{float(traj.Y[i])!r},"
                f"{float(traj.U[i])!r},{int(traj.reinforced[i])},{traj.memory_index[i]}\n"
            )
    frac = float(np.mean(traj.reinforced))
    print(f"wrote {out}: {n} steps, S_N = {float(traj.S[-1])!r}, "
          f"reinforced fraction = {frac:.4f}")
    return EXIT_OK


def _cmd_sequences(args) -> int:
    p = _resolve(args, "p", required=True, cast=float)
    memory = parse_memory_spec(_resolve(args, "memory", required=True))
    n = _resolve(args, "n", required=True, cast=int)
    seed = _resolve(args, "seed", default=0, cast=int)
    out = _resolve(args, "out", required=True)
    if n < 1:
        raise ValueError("--n must be >= 1")
    prefix = build_prefix(memory, n)
    next_mu = None
    if memory.family != "table" or len(memory.table) > n:
        next_mu = mu(memory, n + 1)
    seqs = build_sequences(prefix, p, next_mu=next_mu)
    echo = {"command": "sequences", "p": p, "memory": memory_spec_label(memory), "n": n}
    with open(out, "w", newline="\n") as fh:
        for line in _metadata_lines(echo, seed):
            fh.write(line + "\n")
        fh.write("n,gamma,log_a,eta,w,z,a_mu_eta\n")
        for i in range(n):
            fh.write(
                f"{i + 1},{float(seqs.gamma[i])!r},{float(seqs.log_a[i])!r},"
                f"{float(seqs.eta[i])!r},{float(seqs.w[i])!r},{float(seqs.z[i])!r},"
                f"{float(seqs.a_eta_mu[i])!r}\n"
            )
    print(f"wrote {out}: sequences to n = {n}")
    return EXIT_OK


def _cmd_cov(args) -> int:
    p = _resolve(args, "p", required=True, cast=float)
    alpha = _resolve(args, "alpha", required=True, cast=float)
    grid = _resolve(args, "grid")
    out = _resolve(args, "out")
    params = covariance_params(p, alpha)
    if grid:
        try:
            s_part, t_part = grid.split("/")
            s_vals = [float(v) for v in s_part.split(",") if v]
            t_vals = [float(v) for v in t_part.split(",") if v]
        except ValueError as exc:
            raise ValueError(f"cannot parse --grid {grid!r}: expected S1,S2,.../T1,T2,...") from exc
        lines = ["s,t,cov"]
        for s in s_vals:
            for t in t_vals:
                lines.append(f"{s!r},{t!r},{theoretical_cov(params, s, t)!r}")
        text = "\n".join(lines) + "\n"
    else:
        decomp = vt_decomposition(params)
        doc = {
            "p": params.p,
            "alpha": params.alpha,
            "rho": params.rho,
            "c1": params.c1,
            "c2": params.c2,
            "signs": list(coefficient_signs(params)),
            "V1": vt_matrix(params, 1.0).tolist(),
            "K1": decomp.K1.tolist(),
            "K2": decomp.K2.tolist(),
            "K3": decomp.K3.tolist(),
            "exponents": list(decomp.exponents),
            "tool_version": __version__,
        }
        text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_verify(args) -> int:
    checks_text = _resolve(args, "checks", required=True)
    try:
        names = frozenset(_CHECK_ALIASES[token.strip().lower()]
                          for token in checks_text.split(",") if token.strip())
    except KeyError as exc:
        raise ValueError(f"unknown check {exc.args[0]!r}; valid: {sorted(_CHECK_ALIASES)}") from None
    if not names:
        raise ValueError("no checks requested")
    p = _resolve(args, "p", required=True, cast=float)
    memory = parse_memory_spec(_resolve(args, "memory", required=True))
    step = parse_step_model(_resolve(args, "step", required=True))
    n = _resolve(args, "n", required=True, cast=int)
    seed = _resolve(args, "seed", default=0, cast=int)
    reps = _resolve(args, "reps", default=1000, cast=int)
    times = _resolve(args, "times", default="0.5,1")
    threads = _resolve(args, "threads", default=_default_threads(), cast=int)
    out = _resolve(args, "out")
    plot_dir = _resolve(args, "emit_plot_data")
    config = WalkConfig(p=p, memory=memory, step=step, horizon=n,
                        master_seed=seed, allow_nondiffusive=True)
    t_grid = tuple(float(v) for v in str(times).split(",") if v)
    spec = EnsembleSpec(
        walk=config,
        reps=reps,
        t_grid=t_grid,
        statistics=names,
        rel_tol=_resolve(args, "rel_tol", default=0.10, cast=float),
        z_max=_resolve(args, "z_max", default=5.0, cast=float),
    )
    report = run_ensemble(spec, threads=threads)
    text = report.to_json()
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for record in report.checks:
        print(f"{record.name}: {'PASS' if record.passed else 'FAIL'}", file=sys.stderr)
    print(f"wall time: {report.wall_time_s:.2f} s", file=sys.stderr)
    if plot_dir:
        from reinforced_walk.plots import emit_plot_data

        prefix = build_prefix(memory, n)
        seqs = build_sequences(prefix, p)
        written = emit_plot_data(plot_dir, report, seqs)
        print(f"plot data: {', '.join(written)}", file=sys.stderr)
    return EXIT_OK if report.all_pass else EXIT_CHECK_FAILED


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_BAD_CONFIG if exc.code not in (0, None) else EXIT_OK
    handlers = {
        "simulate": _cmd_simulate,
        "sequences": _cmd_sequences,
        "cov": _cmd_cov,
        "verify": _cmd_verify,
    }
    try:
        try:
            _load_config_file(args)
        except OSError as exc:
            raise ValueError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ValueError(f"cannot parse config file: {exc}") from exc
        return handlers[args.command](args)
    except (NonDiffusiveError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
