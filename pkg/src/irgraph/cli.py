"""Command-line front door.

Exit codes: 0 success, 1 validation or usage error, 2 an experiment's
acceptance rule failed, 3 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import secrets
import sys
from pathlib import Path

import numpy as np

from . import deviations, harness
from .components import analyze
from .errors import IrgraphError, ModelError
from .exploration import lower_explore, upper_explore
from .model import (BlockModelSpec, LambdaOverN, ValidatedBlockModel, inter_schedules_from_dict,
                    load_config, spec_from_dict, validate, validate_blocks)
from .rng import DEFAULT_SEED, stream
from .sampler import export_edge_list, sample_block_graph, sample_graph
from .spectral import mean_matrix, perron

SUBCOMMANDS = ("validate", "theory", "sample", "components", "explore", "giant", "connectivity",
               "critical-window", "blocks", "bounds", "expansion")
DEFAULT_N = 10_000
DEFAULT_REPLICAS = 20
BOUNDS_T = 50
BOUNDS_GRID = (0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 1.0, 1.05, 1.1, 1.25, 1.5, 2.0, 3.0)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _float_list(text):
    try:
        return tuple(float(x) for x in text.replace(",", " ").split())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from exc


def _seed(text):
    if text == "random":
        return "random"
    try:
        v = int(text, 0)
    except ValueError as exc:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer or 'random'") from exc
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2^64)")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="irgraph", description="Typed inhomogeneous random graphs: theory and simulation.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in SUBCOMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", type=Path)
        s.add_argument("--n", type=int, action="append")
        s.add_argument("--replicas", type=int)
        s.add_argument("--seed", type=_seed, default=DEFAULT_SEED,
                       help=f"master seed (default {DEFAULT_SEED}); 'random' draws one and logs it")
        s.add_argument("--out", type=Path)
        s.add_argument("--threads", type=int, default=1)
        s.add_argument("--alpha-grid", type=_float_list)
        s.add_argument("--c-shift", type=float)
        s.add_argument("--delta", type=float)
        s.add_argument("--format", choices=("csv", "json"))
    return p


def _log(msg):
    print(msg, file=sys.stderr)


def _load(args, required=True):
    if args.config is None:
        if required:
            raise UsageError("--config is required for this subcommand")
        return None, {}
    raw = load_config(args.config)
    spec = spec_from_dict(raw)
    model = validate_blocks(spec) if isinstance(spec, BlockModelSpec) else validate(spec)
    return model, raw


def _single(model, what):
    if isinstance(model, ValidatedBlockModel):
        raise ModelError(f"{what} needs a single-block model", field="blocks")
    return model


def _emit(text, args, filename):
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / filename).write_text(text)


def _rows_text(rows, fmt):
    if fmt == "json":
        return json.dumps(rows, indent=2, default=harness._json_default) + "\n"
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _n(args):
    return (args.n or [DEFAULT_N])[0]


def _sample(model, args, seed):
    n = _n(args)
    if isinstance(model, ValidatedBlockModel):
        return sample_block_graph(model, n, seed)
    b = harness.connectivity_constants(model).b
    return sample_graph(model, n, seed, b=b)


# ---------------------------------------------------------------- subcommands

def cmd_validate(args):
    model, _ = _load(args)
    if isinstance(model, ValidatedBlockModel):
        print(f"ok: block model with r={model.r} blocks, types per block "
              f"{[b.m for b in model.blocks]}")
    else:
        print(f"ok: m={model.m} types, schedule={model.schedule}")
    return 0


def _theory(model, raw):
    if isinstance(model, ValidatedBlockModel):
        return {"blocks": [harness.theory_report(b) for b in model.blocks]}
    return harness.theory_report(model)


def cmd_theory(args):
    model, raw = _load(args)
    rep = _theory(model, raw)
    if args.format == "json" or isinstance(model, ValidatedBlockModel):
        text = json.dumps(rep, indent=2) + "\n"
    else:
        text = "".join(f"{k}={_fmt(v)}\n" for k, v in rep.items())
    _emit(text, args, "theory.json" if args.format == "json" else "theory.txt")
    return 0


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.7g}"
    if isinstance(v, list):
        return ",".join(_fmt(x) for x in v)
    return str(v)


def cmd_sample(args):
    model, _ = _load(args)
    g = _sample(model, args, args.seed)
    if args.out is None:
        buf = io.StringIO()
        e = g.edges[np.lexsort((g.edges[:, 1], g.edges[:, 0]))] + 1
        buf.write(f"# n={g.n_total} m_types={g.m} seed={g.seed}\n")
        np.savetxt(buf, e, fmt="%d")
        sys.stdout.write(buf.getvalue())
    else:
        args.out.mkdir(parents=True, exist_ok=True)
        export_edge_list(g, args.out / "edges.txt")
        _log(f"sample n={g.n_total} edges={g.n_edges} seed={g.seed}")
    return 0


def cmd_components(args):
    model, _ = _load(args)
    g = _sample(model, args, args.seed)
    eps = 0.5 if isinstance(model, ValidatedBlockModel) else harness.default_eps_mid(model)
    row = analyze(g, eps).row(args.seed)
    _emit(_rows_text([row], args.format), args, "components." + (args.format or "csv"))
    return 0


def cmd_explore(args):
    model = _single(_load(args)[0], "explore")
    g = _sample(model, args, args.seed)
    rng = stream(args.seed ^ 0x5EED)
    if args.delta is None:
        tr = upper_explore(g, 0, None, rng)
    else:
        tr = lower_explore(g, 0, args.delta, None, rng)
    X = None
    if tr.kind == "upper" and isinstance(model.schedule, LambdaOverN):
        pd = perron(mean_matrix((g.counts / g.n_total, model.c)))
        X = tr.martingale(pd.u, model.schedule.lam * pd.mu - 1.0)
    head, *body = tr.rows(X)
    rows = [dict(zip(head, r)) for r in body]
    _emit(_rows_text(rows, args.format), args, "trace." + (args.format or "csv"))
    _log(f"explore kind={tr.kind} steps={tr.steps} tau={tr.tau} t_w={tr.t_w}")
    return 0


def cmd_bounds(args):
    model = _single(_load(args)[0], "bounds")
    pd = perron(mean_matrix(model))
    lam = model.schedule.lam if isinstance(model.schedule, LambdaOverN) else 1.0
    mu_lambda = pd.mu * lam
    delta = 0.0 if args.delta is None else args.delta
    u, U = pd.u_min, pd.u_max
    rows = []
    for x in BOUNDS_GRID:
        lo, hi = deviations.chernoff_bounds(x, mu_lambda, delta, u, U, BOUNDS_T)
        rows.append({"x": x, "gamma": deviations.gamma(x), "G": deviations.g_function(x, U, u),
                     "lower_tail": "" if lo is None else lo, "upper_tail": "" if hi is None else hi})
    _emit(_rows_text(rows, args.format), args, "bounds." + (args.format or "csv"))
    return 0


def _experiment_config(args, model, raw, kind):
    n_values = tuple(sorted(args.n)) if args.n else (DEFAULT_N,)
    kw = dict(n_values=n_values, replicas=args.replicas or DEFAULT_REPLICAS,
              master_seed=args.seed, threads=args.threads)
    if kind == "connectivity":
        kw["alpha_grid"] = args.alpha_grid or tuple(raw.get("alpha_grid", (0.7, 1.0, 1.3)))
    if kind == "critical-window":
        kw["c_shift"] = args.c_shift if args.c_shift is not None else float(raw.get("c_shift", 0.0))
    if kind == "blocks":
        kw["inter_schedules"] = tuple(inter_schedules_from_dict(raw))
    if kind == "expansion":
        ex = raw.get("expansion", {})
        kw.update(beta=float(ex.get("beta", 1.0)), beta_prime=float(ex.get("beta_prime", 1.0)),
                  rate=float(ex.get("rate", 2.0)), v_exponent=float(ex.get("v_exponent", 2.0 / 3.0)))
    if args.delta is not None:
        kw["delta"] = args.delta
    if "eps_mid" in raw:
        kw["eps_mid"] = float(raw["eps_mid"])
    return harness.ExperimentConfig(model, **kw)


def cmd_experiment(args):
    kind = args.command
    model, raw = _load(args, required=kind != "expansion")
    if model is None:
        from .model import ModelSpec
        model = validate(ModelSpec.make([1.0], [[1.0]], LambdaOverN(1.0)))
    if kind == "blocks" and not isinstance(model, ValidatedBlockModel):
        raise ModelError("blocks needs a block config", field="blocks")
    if kind != "blocks":
        _single(model, kind)
    cfg = _experiment_config(args, model, raw, kind)
    result = harness.EXPERIMENTS[kind](cfg)
    if args.out is not None:
        theory = None if kind in ("expansion", "blocks") else harness.theory_report(model)
        result.write(args.out, theory)
    for line in result.summary_lines():
        print(line)
    return 0 if result.passed else 2


HANDLERS = {"validate": cmd_validate, "theory": cmd_theory, "sample": cmd_sample,
            "components": cmd_components, "explore": cmd_explore, "bounds": cmd_bounds}


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.seed == "random":
            args.seed = secrets.randbits(64)
            _log(f"seed={args.seed}")
        if args.replicas is not None and args.replicas < 1:
            raise UsageError("--replicas must be >= 1")
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        return HANDLERS.get(args.command, cmd_experiment)(args)
    except UsageError as exc:
        _log(f"usage error: {exc}")
        return 1
    except ModelError as exc:
        _log(f"{type(exc).__name__} (field {exc.field}): {exc}")
        return 1
    except (IrgraphError, ValueError) as exc:
        _log(f"{type(exc).__name__}: {exc}")
        return 1
    except OSError as exc:
        _log(f"I/O error: {exc}")
        return 3


def main():
    sys.exit(run())
