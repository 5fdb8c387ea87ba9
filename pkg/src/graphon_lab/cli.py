"""Command-line front end: solve / series / sweep / oracle / sample / check.

All floating output is printed with 17 significant digits so files are
reproducible byte-for-byte given an identical configuration.  Options can
come from flags or a plain `key=value` config file (# comments allowed);
flags take precedence.  Exit codes: 0 success, 2 domain or usage error,
3 convergence failure.  Set GRAPHON_LAB_LOG to error, info or debug.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

from . import grid as grid_mod
from . import optimize, sampling, series
from .errors import (
    ConstraintInfeasible,
    DomainError,
    GraphonLabError,
    MaxIterExceeded,
    NoRootInBracket,
    RegionViolation,
)

LOG = logging.getLogger("graphon_lab")

SWEEP_HEADER = (
    "eps,tau,regime,a,b,c,d,mu,entropy,grad_norm,iterations,converged,"
    "residual_eps,residual_tau"
)

_CONVERGENCE_ERRORS = (
    MaxIterExceeded,
    RegionViolation,
    NoRootInBracket,
    ConstraintInfeasible,
)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _json_text(obj, indent: int = 0) -> str:
    """Deterministic JSON with floats at 17 significant digits."""
    pad = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt(obj)
    if isinstance(obj, str):
        import json as _json

        return _json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        inner = ",\n".join(
            f"{pad}  {_json_text(str(key))}: {_json_text(val, indent + 1)}"
            for key, val in obj.items()
        )
        return "{\n" + inner + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        inner = ",\n".join(f"{pad}  {_json_text(val, indent + 1)}" for val in obj)
        return "[\n" + inner + "\n" + pad + "]"
    raise DomainError(f"cannot serialize {type(obj).__name__}")


def _write_out(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(out, "w") as fh:
            fh.write(text)
            if not text.endswith("\n"):
                fh.write("\n")


# ---------------------------------------------------------------------------
# Options: flag > config file > builtin default
# ---------------------------------------------------------------------------

_OPTION_TYPES = {
    "e": float,
    "delta": float,
    "dtau": float,
    "k": int,
    "tau_from": float,
    "tau_to": float,
    "points": int,
    "grid_n": int,
    "seed": int,
    "reps": int,
    "tol": float,
    "max_iter": int,
    "jobs": int,
    "eta": float,
    "out": str,
    "format": str,
    "suite": str,
}

_DEFAULTS = {
    "k": 3,
    "points": 21,
    "grid_n": 100,
    "seed": 0,
    "reps": 20,
    "jobs": 1,
    "format": None,  # per-command default
    "out": None,
}


def _load_config(path: str) -> dict:
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, _, val = line.partition("=")
            key = key.strip().replace("-", "_")
            if key not in _OPTION_TYPES:
                raise DomainError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = _OPTION_TYPES[key](val.strip())
    return values


@dataclass
class RunConfig:
    command: str
    values: dict

    def get(self, key, default=None):
        v = self.values.get(key)
        return default if v is None else v

    def require(self, key):
        v = self.values.get(key)
        if v is None:
            raise DomainError(f"missing required option --{key.replace('_', '-')}")
        return v

    def scale(self) -> tuple[str, float]:
        """Exactly one of delta/dtau selects the regime."""
        delta, dtau = self.values.get("delta"), self.values.get("dtau")
        if (delta is None) == (dtau is None):
            raise DomainError("provide exactly one of --delta or --dtau")
        return ("below", delta) if delta is not None else ("above", dtau)

    def solve_options(self) -> optimize.SolveOptions:
        opts = optimize.SolveOptions()
        if self.values.get("tol") is not None:
            opts.tol_grad = self.values["tol"]
        if self.values.get("max_iter") is not None:
            opts.max_iter = self.values["max_iter"]
        if self.values.get("eta") is not None:
            opts.eta_region = self.values["eta"]
        return opts


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphon-lab",
        description="entropy-maximizing bipodal graphons at fixed edge/odd-cycle densities",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "solve": "solve one (e, tau) constraint point",
        "series": "evaluate the truncated parameter/entropy expansions",
        "sweep": "solve a range of tau at fixed e, emit CSV/JSON",
        "oracle": "independent grid-graphon entropy maximization",
        "sample": "draw a W-random graph from the solved graphon",
        "check": "run a named self-check suite",
    }
    for name, help_text in specs.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=str, default=None, help="key=value options file")
        for key in _OPTION_TYPES:
            flag = "--" + key.replace("_", "-")
            p.add_argument(flag, type=_OPTION_TYPES[key], default=None, dest=key)
    return parser


# ---------------------------------------------------------------------------
# Command implementations
# ---------------------------------------------------------------------------


def _report_row(t: float, rep: optimize.SolverReport) -> str:
    g = rep.graphon
    cells = [
        _fmt(rep.coords.e if rep.coords is not None else 0.0),
        _fmt(t),
        rep.regime,
        _fmt(g.a),
        _fmt(g.b),
        _fmt(g.c),
        _fmt(g.d),
        _fmt(rep.mu),
        _fmt(rep.entropy),
        _fmt(rep.grad_norm),
        str(rep.iterations),
        "true" if rep.converged else "false",
        _fmt(rep.residual_eps),
        _fmt(rep.residual_tau),
    ]
    return ",".join(cells)


def _target_from(cfg: RunConfig, e: float, k: int) -> float:
    regime, scale = cfg.scale()
    return e**k - scale**k if regime == "below" else e**k + scale


def _cmd_solve(cfg: RunConfig) -> int:
    e = cfg.require("e")
    k = cfg.get("k", _DEFAULTS["k"])
    t = _target_from(cfg, e, k)
    rep = optimize.solve(e, t, k, cfg.solve_options())
    fmt = cfg.get("format", "json")
    if fmt == "json":
        _write_out(_json_text(rep.to_json_dict()), cfg.get("out"))
    elif fmt == "csv":
        # eps column carries e even for boundary rows, where coords is None
        row = _report_row(t, rep)
        if rep.coords is None:
            row = ",".join([_fmt(e)] + row.split(",")[1:])
        _write_out(SWEEP_HEADER + "\n" + row, cfg.get("out"))
    else:
        raise DomainError(f"unknown format {fmt!r}")
    return 0


def _cmd_series(cfg: RunConfig) -> int:
    e = cfg.require("e")
    k = cfg.get("k", _DEFAULTS["k"])
    regime, scale = cfg.scale()
    pred = (
        series.params_below(e, scale, k)
        if regime == "below"
        else series.params_above(e, scale, k)
    )
    payload = {
        "regime": regime,
        "e": e,
        "k": k,
        "scale": scale,
        "a": pred.a,
        "b": pred.b,
        "c": pred.c,
        "d": pred.d,
        "mu": pred.mu,
        "entropy": pred.entropy,
        "stated_orders": dict(pred.stated_orders),
    }
    fmt = cfg.get("format", "json")
    if fmt == "json":
        _write_out(_json_text(payload), cfg.get("out"))
    elif fmt == "csv":
        keys = ["regime", "e", "k", "scale", "a", "b", "c", "d", "mu", "entropy"]
        row = ",".join(
            payload[key] if isinstance(payload[key], str) else _fmt(payload[key])
            if isinstance(payload[key], float)
            else str(payload[key])
            for key in keys
        )
        _write_out(",".join(keys) + "\n" + row, cfg.get("out"))
    else:
        raise DomainError(f"unknown format {fmt!r}")
    return 0


def _cmd_sweep(cfg: RunConfig) -> int:
    e = cfg.require("e")
    k = cfg.get("k", _DEFAULTS["k"])
    t_from = cfg.require("tau_from")
    t_to = cfg.require("tau_to")
    points = cfg.get("points", _DEFAULTS["points"])
    if points < 2:
        raise DomainError("sweep needs --points >= 2")
    ts = [t_from + (t_to - t_from) * i / (points - 1) for i in range(points)]
    results = optimize.sweep(e, ts, k, cfg.solve_options(), jobs=cfg.get("jobs", 1))
    fmt = cfg.get("format", "csv")
    if fmt == "csv":
        lines = [SWEEP_HEADER]
        for pt in results:
            if pt.report is None:
                LOG.error("sweep point failed: tau=%s (%s)", _fmt(pt.t), pt.error)
                print(f"sweep point failed: tau={_fmt(pt.t)} ({pt.error})", file=sys.stderr)
                continue
            row = _report_row(pt.t, pt.report)
            if pt.report.coords is None:
                row = ",".join([_fmt(e)] + row.split(",")[1:])
            lines.append(row)
        _write_out("\n".join(lines), cfg.get("out"))
    elif fmt == "json":
        payload = []
        for pt in results:
            if pt.report is None:
                print(f"sweep point failed: tau={_fmt(pt.t)} ({pt.error})", file=sys.stderr)
                payload.append({"tau": pt.t, "error": pt.error})
            else:
                payload.append({"tau": pt.t, "report": pt.report.to_json_dict()})
        _write_out(_json_text(payload), cfg.get("out"))
    else:
        raise DomainError(f"unknown format {fmt!r}")
    return 0


def _cmd_oracle(cfg: RunConfig) -> int:
    e = cfg.require("e")
    k = cfg.get("k", _DEFAULTS["k"])
    t = _target_from(cfg, e, k)
    n = cfg.get("grid_n", _DEFAULTS["grid_n"])
    seed = cfg.get("seed", _DEFAULTS["seed"])
    opts = grid_mod.OracleOptions(seed=seed)
    if cfg.values.get("tol") is not None:
        opts.tol_constraint = cfg.values["tol"]
    init = grid_mod.random_grid(n, seed, center=e, spread=0.25)
    best = grid_mod.maximize_entropy(init, e, t, k, opts)
    eps, tau = grid_mod.grid_densities(best, k)
    diag = grid_mod.diagnostics(best, e)
    payload = {
        "n": n,
        "seed": seed,
        "k": k,
        "target_eps": e,
        "target_tau": t,
        "eps": eps,
        "tau": tau,
        "entropy": grid_mod.grid_entropy(best),
        "diagnostics": {
            "degree_variance": diag.degree_variance,
            "ideal_value_mass": diag.ideal_value_mass,
            "rank1_residual": diag.rank1_residual,
            "pode_fraction": diag.pode_fraction,
            "bipodality_residual": diag.bipodality_residual,
        },
    }
    out = cfg.get("out")
    _write_out(_json_text(payload), out)
    if out is not None:
        grid_mod.save_grid(best, out + ".grph")
    return 0


def _cmd_sample(cfg: RunConfig) -> int:
    e = cfg.require("e")
    k = cfg.get("k", _DEFAULTS["k"])
    t = _target_from(cfg, e, k)
    n = cfg.get("grid_n", 500)  # vertex count for the sampled graph
    seed = cfg.get("seed", _DEFAULTS["seed"])
    rep = optimize.solve(e, t, k, cfg.solve_options())
    graph = sampling.sample_graph(rep.graphon, n, seed)
    out = cfg.get("out")
    if out is None:
        i, j = graph.adjacency.nonzero()
        lines = [f"# n={graph.n} seed={graph.seed}"]
        lines += [f"{u} {v}" for u, v in zip(i.tolist(), j.tolist()) if u < v]
        _write_out("\n".join(lines), None)
    else:
        sampling.save_edge_list(graph, out)
    return 0


_CHECK_BELOW = {"a": 1.5, "b": 2.5, "c": 2.5, "d": 2.5, "entropy": 4.5}
_CHECK_ABOVE = {"a": 0.5, "b": 1.5, "c": 1.5, "d": 0.5, "entropy": 2.5}


def _cmd_check(cfg: RunConfig) -> int:
    suite = cfg.get("suite", "series-orders")
    if suite != "series-orders":
        raise DomainError(f"unknown check suite {suite!r}")
    e = cfg.get("e", 0.75)
    k = cfg.get("k", _DEFAULTS["k"])
    ok = True
    lines = []
    for regime, scales, thresholds in (
        ("below", (0.02, 0.01, 0.005), _CHECK_BELOW),
        ("above", (2e-3, 1e-3, 5e-4), _CHECK_ABOVE),
    ):
        for field, threshold in thresholds.items():
            slope = series.convergence_order(field, regime, e, k, scales)
            passed = slope >= threshold
            ok = ok and passed
            lines.append(
                f"{regime:5s} {field:7s} slope={slope:7.3f} threshold={threshold:.1f} "
                + ("PASS" if passed else "FAIL")
            )
    _write_out("\n".join(lines), cfg.get("out"))
    if not ok:
        raise MaxIterExceeded("series-order check failed")
    return 0


_COMMANDS = {
    "solve": _cmd_solve,
    "series": _cmd_series,
    "sweep": _cmd_sweep,
    "oracle": _cmd_oracle,
    "sample": _cmd_sample,
    "check": _cmd_check,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    level = os.environ.get("GRAPHON_LAB_LOG", "error").lower()
    logging.basicConfig(
        level={"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
            level, logging.ERROR
        ),
        stream=sys.stderr,
        format="%(levelname)s %(message)s",
    )
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    values = {}
    if args.config is not None:
        try:
            values.update(_load_config(args.config))
        except OSError as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return 2
        except GraphonLabError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    for key in _OPTION_TYPES:
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            values[key] = flag_val
    cfg = RunConfig(command=args.command, values=values)
    try:
        return _COMMANDS[args.command](cfg)
    except _CONVERGENCE_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except GraphonLabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    entrypoint()
