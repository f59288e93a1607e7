"""Command-line interface.

    ladderchain ruin       --p 0.5 --lower -4 --upper 4 [--method linear-solve]
    ladderchain duration   --p 1/3 --lower -4 --upper 4 --method finite-horizon --k 50
    ladderchain simulate   --p 0.5 --lower -4 --upper 4 --x 0 --trials 100000 --seed 1
    ladderchain recurrence --p 0.41421356237309503 --trials 100000
    ladderchain validate   --p 1/2 --max-k 12

Every command also takes ``--config file.json`` (keys mirror the flag names;
flags given on the command line win), ``--format json|csv`` and
``--output PATH``.  Exit codes: 0 success, 1 validation or consistency
failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import duration as duration_mod
from . import enumeration, montecarlo, recurrence, ruin
from .chain import Barriers, ChainParams, make_params, parse_probability
from .exceptions import InvalidParameterError, LadderChainError

COMMANDS = ("ruin", "duration", "simulate", "recurrence", "validate")
EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2

VALIDATE_GRID = ((-2, 2), (-3, 2), (-2, 3), (-4, 4))
VALIDATE_FLOAT_TOL = 1e-12
COMPLEMENT_TOL = 1e-12
METHOD_AGREEMENT_TOL = 1e-8

_DEFAULTS = {
    "r": 2,
    "s": 2,
    "method": ruin.LINEAR_SOLVE,
    "tol": 1e-10,
    "seed": 0,
    "format": "json",
    "workers": 1,
    "max_k": 12,
    "target": "all",
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    params: ChainParams
    barriers: Optional[Barriers] = None
    x: Optional[float] = None
    method: str = ruin.LINEAR_SOLVE
    k: Optional[int] = None
    tol: float = 1e-10
    trials: Optional[int] = None
    horizon: Optional[int] = None
    horizons: list = field(default_factory=list)
    seed: int = 0
    workers: int = 1
    max_k: int = 12
    target: str = "all"
    format: str = "json"
    output_path: Optional[str] = None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(sub: argparse.ArgumentParser) -> None:
    add = sub.add_argument
    add("--config", help="JSON file of defaults; keys mirror flag names")
    add("--p", help="success probability, decimal or a/b")
    add("--r", type=int, help="order (default 2)")
    add("--s", type=int, help="step (default 2)")
    add("--format", choices=("json", "csv"))
    add("--output", help="write the report here instead of standard output")


def _barrier_flags(sub):
    sub.add_argument("--lower", type=int, help="lower barrier L")
    sub.add_argument("--upper", type=int, help="upper barrier U")
    sub.add_argument("--x", type=float, help="starting point")


def _solver_flags(sub):
    sub.add_argument("--method", help="linear-solve | fixed-point | finite-horizon")
    sub.add_argument("--k", type=int, help="horizon for finite-horizon")
    sub.add_argument("--tol", type=float, help="fixed-point tolerance (default 1e-10)")


def _mc_flags(sub):
    sub.add_argument("--trials", type=int)
    sub.add_argument("--seed", type=int)
    sub.add_argument("--workers", type=int, help="threads; results do not depend on it")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ladderchain", description="Ruin, duration and recurrence for ladder chains.")
    subs = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in ("ruin", "duration"):
        sub = subs.add_parser(name, argument_default=argparse.SUPPRESS)
        _common(sub)
        _barrier_flags(sub)
        _solver_flags(sub)
    sub = subs.add_parser("simulate", argument_default=argparse.SUPPRESS)
    _common(sub)
    _barrier_flags(sub)
    _mc_flags(sub)
    sub.add_argument("--horizon", type=int)
    sub.add_argument("--target", choices=("all", "ruin", "duration"))
    sub = subs.add_parser("recurrence", argument_default=argparse.SUPPRESS)
    _common(sub)
    _mc_flags(sub)
    sub.add_argument("--horizon", type=int, help="single horizon (overrides --horizons)")
    sub.add_argument("--horizons", help="comma-separated horizons")
    sub = subs.add_parser("validate", argument_default=argparse.SUPPRESS)
    _common(sub)
    sub.add_argument("--max-k", dest="max_k", type=int)
    sub.add_argument("--tol", type=float)
    return parser


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    return {key.replace("-", "_"): value for key, value in data.items()}


def _method(name: str) -> str:
    norm = str(name).replace("-", "_")
    if norm not in ruin.METHODS:
        raise UsageError(f"unknown method {name!r}")
    return norm


def parse_args(argv) -> RunConfig:
    """Parse and validate command-line arguments into a :class:`RunConfig`.

    Raises:
        UsageError: for unknown flags, missing required flags or values out of
            their domain.
    """
    ns = vars(build_parser().parse_args(list(argv)))
    command = ns.pop("command")
    merged = dict(_DEFAULTS)
    if "config" in ns:
        merged.update(_load_config(ns.pop("config")))
    merged.update(ns)
    merged.pop("command", None)

    def need(key):
        if merged.get(key) is None:
            raise UsageError(f"{command} requires --{key.replace('_', '-')}")
        return merged[key]

    try:
        params = make_params(int(merged["r"]), int(merged["s"]), parse_probability(need("p")))
    except InvalidParameterError as exc:
        raise UsageError(str(exc)) from exc
    cfg = RunConfig(
        command=command,
        params=params,
        format=merged["format"],
        output_path=merged.get("output"),
        seed=int(merged["seed"]),
        workers=int(merged["workers"]),
        tol=float(merged["tol"]),
        target=merged["target"],
    )
    if cfg.format not in ("json", "csv"):
        raise UsageError("format must be json or csv")
    if cfg.workers < 1:
        raise UsageError("workers must be at least 1")
    if not 0 <= cfg.seed < 2**64:
        raise UsageError("seed must be in [0, 2**64)")

    if command in ("ruin", "duration", "simulate"):
        try:
            cfg.barriers = Barriers(int(need("lower")), int(need("upper")))
        except InvalidParameterError as exc:
            raise UsageError(str(exc)) from exc
        if merged.get("x") is not None:
            cfg.x = float(merged["x"])
            if cfg.x == int(cfg.x):
                cfg.x = int(cfg.x)
            if not cfg.barriers.lower <= cfg.x <= cfg.barriers.upper:
                raise UsageError(f"x must lie in [{cfg.barriers.lower}, {cfg.barriers.upper}]")

    if command in ("ruin", "duration"):
        cfg.method = _method(merged["method"])
        if params.r != 2 or params.s != 2:
            raise UsageError("exact methods support r=2, s=2 only")
        if cfg.barriers.width < 4:
            raise UsageError("exact methods need U-L >= 4")
        if cfg.method == ruin.FINITE_HORIZON:
            cfg.k = int(need("k"))
            if cfg.k < 0:
                raise UsageError("k must be nonnegative")
        if not cfg.tol > 0:
            raise UsageError("tol must be positive")
    elif command == "simulate":
        if cfg.x is None:
            raise UsageError("simulate requires --x")
        cfg.trials = int(need("trials"))
        cfg.horizon = int(merged.get("horizon") or montecarlo.DEFAULT_BARRIER_HORIZON)
        if cfg.target not in ("all", "ruin", "duration"):
            raise UsageError("target must be all, ruin or duration")
    elif command == "recurrence":
        cfg.trials = int(merged.get("trials") or 10**4)
        if merged.get("horizon") is not None:
            cfg.horizons = [int(merged["horizon"])]
        elif merged.get("horizons") is not None:
            raw = merged["horizons"]
            items = raw.split(",") if isinstance(raw, str) else raw
            try:
                cfg.horizons = [int(h) for h in items]
            except ValueError as exc:
                raise UsageError(f"bad horizons {raw!r}") from exc
        else:
            cfg.horizons = [10**2, 10**3, 10**4, montecarlo.DEFAULT_RETURN_HORIZON]
    elif command == "validate":
        cfg.max_k = int(merged["max_k"])
        if not 0 <= cfg.max_k <= enumeration.MAX_HORIZON:
            raise UsageError(f"max-k must be in [0, {enumeration.MAX_HORIZON}]")
        if params.r != 2 or params.s != 2:
            raise UsageError("validate covers r=2, s=2 only")

    if command in ("simulate", "recurrence"):
        if cfg.trials < 1:
            raise UsageError("trials must be at least 1")
        horizons = cfg.horizons if command == "recurrence" else [cfg.horizon]
        if any(h < 0 or h > montecarlo.MAX_HORIZON for h in horizons):
            raise UsageError(f"horizon must be in [0, {montecarlo.MAX_HORIZON}]")
    return cfg


def _p_json(p):
    return str(p) if isinstance(p, Fraction) else float(p)


def _header(cfg: RunConfig) -> dict:
    out = {"command": cfg.command, "params": {"r": cfg.params.r, "s": cfg.params.s, "p": _p_json(cfg.params.p)}}
    if cfg.barriers is not None:
        out["barriers"] = {"lower": cfg.barriers.lower, "upper": cfg.barriers.upper}
    return out


def _run_ruin(cfg):
    if cfg.method == ruin.FINITE_HORIZON:
        sol = ruin.iterate_ruin(cfg.params, cfg.barriers, cfg.k)
    else:
        sol = ruin.solve_ruin(cfg.params, cfg.barriers, cfg.method, cfg.tol)
    report = {**_header(cfg), **sol.to_dict()}
    if cfg.x is not None and cfg.x in sol.grid:
        a, b = sol.at(cfg.x)
        report.update(x=cfg.x, alpha_x=float(a), beta_x=float(b))
    rows = [["x", "alpha", "beta"]] + [[x, float(a), float(b)] for x, a, b in zip(sol.grid, sol.alpha, sol.beta)]
    return report, rows, EXIT_OK


def _run_duration(cfg):
    if cfg.method == ruin.FINITE_HORIZON:
        sol = duration_mod.iterate_duration(cfg.params, cfg.barriers, cfg.k)
    else:
        sol = duration_mod.solve_duration(cfg.params, cfg.barriers, cfg.method, cfg.tol)
    report = {**_header(cfg), **sol.to_dict()}
    if cfg.x is not None and cfg.x in sol.grid:
        report.update(x=cfg.x, m_x=float(sol.at(cfg.x)))
    rows = [["x", "m", "bound"]] + [[x, float(m), float(b)] for x, m, b in zip(sol.grid, sol.m, sol.bound)]
    return report, rows, EXIT_OK


def _run_simulate(cfg):
    args = (cfg.params, cfg.barriers, cfg.x, cfg.trials, cfg.horizon, cfg.seed, cfg.workers)
    estimates = []
    if cfg.target in ("all", "ruin"):
        estimates.extend(montecarlo.estimate_ruin(*args))
    if cfg.target in ("all", "duration"):
        estimates.append(montecarlo.estimate_duration(*args))
    report = {
        **_header(cfg),
        "x": cfg.x,
        "seed": cfg.seed,
        "trials": cfg.trials,
        "horizon": cfg.horizon,
        "censored": estimates[0].censored,
        "estimates": {e.target: e.to_dict() for e in estimates},
    }
    fields = ["target", "estimate", "std_error", "trials", "censored", "horizon", "seed"]
    rows = [fields] + [[getattr(e, f) for f in fields] for e in estimates]
    return report, rows, EXIT_OK


def _run_recurrence(cfg):
    probe = recurrence.recurrence_probe(
        cfg.params.p, cfg.horizons, cfg.trials, cfg.seed, cfg.workers, cfg.params.r, cfg.params.s
    )
    report = {**_header(cfg), "seed": cfg.seed, "trials": cfg.trials, **probe.to_dict()}
    report["p"] = _p_json(cfg.params.p)
    fields = ["horizon", "estimate", "std_error", "trials", "censored", "seed"]
    rows = [fields] + [[e.horizon, e.estimate, e.std_error, e.trials, e.censored, e.seed] for e in probe.estimates]
    return report, rows, EXIT_OK


def validation_checks(params: ChainParams, max_k: int, tol: float = VALIDATE_FLOAT_TOL) -> list:
    """Solver-vs-oracle comparison rows over the built-in barrier grid."""
    exact = params.is_exact
    checks = []

    def close(a, b):
        return a == b if exact else abs(float(a) - float(b)) <= tol

    for L, U in VALIDATE_GRID:
        barriers = Barriers(L, U)
        worst = {"ruin": 0.0, "duration": 0.0}
        ok = {"ruin": True, "duration": True}
        cases = 0
        gens_r = ruin.ruin_generations(params, barriers)
        gens_m = duration_mod.duration_generations(params, barriers)
        for k in range(max_k + 1):
            alpha, beta = next(gens_r)
            m = next(gens_m)
            for i, x in enumerate(barriers.grid()):
                cases += 1
                ref = enumeration.enumerate_exact(params, barriers, x, k)
                for key, pairs in (("ruin", ((alpha[i], ref.alpha_k), (beta[i], ref.beta_k))), ("duration", ((m[i], ref.mean_tau_k),))):
                    for got, want in pairs:
                        worst[key] = max(worst[key], abs(float(got) - float(want)))
                        ok[key] = ok[key] and close(got, want)
        for key in ("ruin", "duration"):
            checks.append({
                "check": f"oracle_{key}", "lower": L, "upper": U, "cases": cases,
                "max_abs_diff": worst[key], "exact": exact, "passed": ok[key],
            })
        linear = ruin.solve_ruin(params, barriers, ruin.LINEAR_SOLVE)
        comp = ruin.complement_residual(linear)
        checks.append({
            "check": "complement", "lower": L, "upper": U, "cases": len(linear.grid),
            "max_abs_diff": comp, "exact": False, "passed": comp < COMPLEMENT_TOL,
        })
        fixed = ruin.solve_ruin(params, barriers, ruin.FIXED_POINT, 1e-12)
        gap = max(
            ruin_max_gap(fixed.alpha, linear.alpha),
            ruin_max_gap(fixed.beta, linear.beta),
        )
        d_lin = duration_mod.solve_duration(params, barriers, ruin.LINEAR_SOLVE)
        d_fix = duration_mod.solve_duration(params, barriers, ruin.FIXED_POINT, 1e-12)
        gap = max(gap, ruin_max_gap(d_lin.m, d_fix.m))
        checks.append({
            "check": "method_agreement", "lower": L, "upper": U, "cases": 3 * len(linear.grid),
            "max_abs_diff": gap, "exact": False, "passed": gap < METHOD_AGREEMENT_TOL,
        })
    return checks


def ruin_max_gap(a, b) -> float:
    return max(abs(float(u) - float(v)) for u, v in zip(a, b))


def _run_validate(cfg):
    checks = validation_checks(cfg.params, cfg.max_k)
    passed = all(c["passed"] for c in checks)
    report = {**_header(cfg), "max_k": cfg.max_k, "passed": passed, "checks": checks}
    fields = ["check", "lower", "upper", "cases", "max_abs_diff", "exact", "passed"]
    rows = [fields] + [[c[f] for f in fields] for c in checks]
    return report, rows, EXIT_OK if passed else EXIT_FAILURE


_RUNNERS = {
    "ruin": _run_ruin,
    "duration": _run_duration,
    "simulate": _run_simulate,
    "recurrence": _run_recurrence,
    "validate": _run_validate,
}


def _csv_text(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def run(cfg: RunConfig) -> tuple:
    """Dispatch ``cfg`` and return ``(exit_code, serialized_report)``.

    Library errors become exit code 1 with a JSON error object.
    """
    try:
        report, rows, code = _RUNNERS[cfg.command](cfg)
    except LadderChainError as exc:
        err = {"error": {"type": type(exc).__name__, "message": str(exc)}, "command": cfg.command}
        return EXIT_FAILURE, json.dumps(err) + "\n"
    if cfg.format == "csv":
        return code, _csv_text(rows)
    return code, json.dumps(report, indent=2) + "\n"


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_args(argv)
    except UsageError as exc:
        print(f"ladderchain: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    code, text = run(cfg)
    if cfg.output_path:
        with open(cfg.output_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
