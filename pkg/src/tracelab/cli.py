"""Command-line front end: ``tracelab verify | counterexample | identity | selftest``.

Exit codes: 0 all Pass (or expectation met), 1 any Violation or Degenerate,
2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import os
import sys

from . import __version__
from ._kernels import BACKEND
from .errors import TracelabError
from .harness import (
    IDENTITY_TOL,
    PROBE_IDS,
    RNG_VERSION,
    TrialConfig,
    mutation_selftest,
    resolve_claims,
    run_campaign,
    run_identity_campaign,
    search_counterexample,
)
from .identities import IDENTITY_IDS
from .reporting import dumps, manifest_path, report_to_dict, reports_to_csv, write_atomic

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# ---------------------------------------------------------------------------
# option parsing helpers
# ---------------------------------------------------------------------------

def parse_range(text) -> tuple[int, int]:
    """``"a..b"`` or a single integer ``"a"`` into an inclusive pair."""
    if isinstance(text, (list, tuple)):
        lo, hi = text
    else:
        parts = str(text).split("..")
        if len(parts) == 1:
            parts = parts * 2
        if len(parts) != 2:
            raise UsageError(f"malformed range {text!r}; expected a..b")
        try:
            lo, hi = int(parts[0]), int(parts[1])
        except ValueError:
            raise UsageError(f"malformed range {text!r}; expected integers a..b") from None
    if not 1 <= lo <= hi:
        raise UsageError(f"range {text!r} must satisfy 1 <= a <= b")
    return int(lo), int(hi)


def _split(value) -> list[str]:
    if value is None:
        return []
    items = value if isinstance(value, (list, tuple)) else [value]
    out = []
    for item in items:
        out.extend(s.strip() for s in str(item).split(",") if s.strip())
    return out


def _floats(value) -> tuple[float, ...] | None:
    items = _split(value)
    if not items:
        return None
    try:
        return tuple(float(s) for s in items)
    except ValueError:
        raise UsageError(f"expected a comma separated list of numbers, got {value!r}") from None


def _ints(value) -> tuple[int, ...] | None:
    items = _split(value)
    if not items:
        return None
    try:
        return tuple(int(s) for s in items)
    except ValueError:
        raise UsageError(f"expected a comma separated list of integers, got {value!r}") from None


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path!r}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def _merged(args) -> dict:
    """Config file values overridden by every flag given on the command line."""
    opts = _load_config(getattr(args, "config", None))
    for key, value in vars(args).items():
        if key in ("config", "command", "handler"):
            continue
        if value is not None and value is not False and value != []:
            opts[key] = value
        else:
            opts.setdefault(key, value)
    return opts


def _trial_config(opts: dict, trials_default: int = 100) -> TrialConfig:
    seed = opts.get("seed")
    return TrialConfig(
        master_seed=0 if seed is None else int(seed),
        trials=trials_default if opts.get("trials") is None else int(opts["trials"]),
        dims=parse_range(opts.get("dims") or "1..4"),
        blocks=3 if opts.get("blocks") is None else int(opts["blocks"]),
        tuple_sizes=_ints(opts.get("tuple_size")),
        functions=tuple(_split(opts.get("functions"))) or None,
        p_values=_floats(opts.get("p_values")),
        tol_abs=None if opts.get("tol_abs") is None else float(opts["tol_abs"]),
        tol_rel=None if opts.get("tol_rel") is None else float(opts["tol_rel"]),
        threads=None if opts.get("threads") is None else int(opts["threads"]),
        reading=opts.get("reading"),
    )


def _config_echo(config: TrialConfig) -> dict:
    return {
        "master_seed": config.master_seed,
        "trials": config.trials,
        "dims": list(config.dims),
        "blocks": config.blocks,
        "weight_range": list(config.weight_range),
        "tuple_sizes": None if config.tuple_sizes is None else list(config.tuple_sizes),
        "functions": None if config.functions is None else list(config.functions),
        "p_values": None if config.p_values is None else list(config.p_values),
        "tol_abs": config.tol_abs,
        "tol_rel": config.tol_rel,
        "reading": config.reading,
    }


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_verify(args) -> int:
    opts = _merged(args)
    config = _trial_config(opts)
    claims = resolve_claims(_split(opts.get("claim")) or ["all"], bool(opts.get("include_probes")))
    fmt = opts.get("format") or "json"
    if fmt not in ("json", "csv"):
        raise UsageError(f"unknown format {fmt!r}")
    out = opts.get("out") or f"tracelab-report.{fmt}"

    started = _now()
    result = run_campaign(config, claims)
    finished = _now()

    summaries = {c: result.summaries[c].as_dict() for c in claims}
    if fmt == "json":
        text = dumps({
            "tool": "tracelab",
            "version": __version__,
            "rng": RNG_VERSION,
            "config": _config_echo(config),
            "claims": claims,
            "summaries": summaries,
            "config_summaries": {k: v.as_dict() for k, v in result.config_summaries.items()},
            "reports": [report_to_dict(r) for r in result.reports],
        })
    else:
        text = reports_to_csv(result.reports)
    write_atomic(out, text)
    manifest = {
        "tool": "tracelab",
        "version": __version__,
        "rng": RNG_VERSION,
        "backend": BACKEND,
        "config": _config_echo(config),
        "claims": claims,
        "started": started,
        "finished": finished,
        "summaries": {c: {k: v for k, v in s.items() if k != "worst"} for c, s in summaries.items()},
        "outputs": {"report": os.path.abspath(out), "format": fmt},
    }
    write_atomic(manifest_path(out), dumps(manifest, pretty=True))

    ok = True
    for c in claims:
        s = result.summaries[c]
        tag = "probe" if c in PROBE_IDS else "claim"
        print(f"{c:16s} {tag:5s} total={s.total:6d} pass={s.passed:6d} "
              f"violation={s.violations:6d} degenerate={s.degenerate:4d}")
        ok = ok and s.ok
    print(f"report: {out}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_counterexample(args) -> int:
    opts = _merged(args)
    budget = int(opts.get("budget") if opts.get("budget") is not None else 200)
    if budget <= 0:
        raise UsageError("search budget must be positive")
    claim = opts.get("claim")
    if not claim:
        raise UsageError("--claim is required")
    if claim not in IDENTITY_IDS:
        resolve_claims([claim])
    config = _trial_config(opts)
    expect = opts.get("expect") or ("violation" if claim in PROBE_IDS else "none")
    found, used = search_counterexample(
        claim, budget, config,
        max_dim=int(opts.get("max_dim") or 4), max_n=int(opts.get("max_n") or 5),
    )
    if found is None:
        print(json.dumps({"claim": claim, "found": False, "trials_used": used}))
    else:
        print(json.dumps({"found": True, **found.as_dict()}, indent=1))
    matched = (found is not None) == (expect == "violation")
    return EXIT_OK if matched else EXIT_FAIL


def cmd_identity(args) -> int:
    opts = _merged(args)
    identity = opts.get("identity")
    if identity not in IDENTITY_IDS:
        raise UsageError(f"unknown identity {identity!r}; known: {', '.join(IDENTITY_IDS)}")
    config = _trial_config(opts)
    alphas = _floats(opts.get("alphas"))
    trials = run_identity_campaign(identity, config, alphas)
    worst = max(trials, key=lambda t: t.relative)
    ok = all(t.residual <= IDENTITY_TOL * t.scale for t in trials)
    print(json.dumps({
        "identity": identity,
        "trials": len(trials),
        "max_residual": max(t.residual for t in trials),
        "max_relative_residual": worst.relative,
        "tolerance": IDENTITY_TOL,
        "worst": {"residual": worst.residual, "scale": worst.scale, "context": worst.context},
    }, indent=1))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_selftest(args) -> int:
    opts = _merged(args)
    config = _trial_config(opts)
    claims = resolve_claims(_split(opts.get("claim")) or ["all"], bool(opts.get("include_probes")))
    budget = int(opts.get("budget") or 100)
    ok = True
    for c in claims:
        r = mutation_selftest(c, config, budget)
        print(f"{c:16s} {r.status:13s} directional_trials={r.directional_trials}")
        ok = ok and r.status != "Missed"
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _generation_flags(p):
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--dims", help="block dimension range a..b")
    p.add_argument("--blocks", type=int)
    p.add_argument("--tuple-size", action="append", help="tuple sizes n, repeatable or comma separated")
    p.add_argument("--config", help="JSON file with the same field names as the flags")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tracelab", description="Seeded verification of trace inequalities.")
    parser.add_argument("--version", action="version", version=f"tracelab {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    v = sub.add_parser("verify", help="run claim campaigns and write a report")
    v.add_argument("--claim", action="append", help="claim id or 'all'; repeatable or comma separated")
    _generation_flags(v)
    v.add_argument("--p-values")
    v.add_argument("--functions")
    v.add_argument("--tol-abs", type=float)
    v.add_argument("--tol-rel", type=float)
    v.add_argument("--out")
    v.add_argument("--format", choices=("json", "csv"))
    v.add_argument("--include-probes", action="store_true")
    v.add_argument("--reading", choices=("convex", "concave", "both"))
    v.add_argument("--threads", type=int)
    v.set_defaults(handler=cmd_verify)

    c = sub.add_parser("counterexample", help="search single-block algebras for a violation")
    c.add_argument("--claim")
    c.add_argument("--budget", type=int, help="trials per (dimension, n, variant) level")
    c.add_argument("--max-dim", type=int)
    c.add_argument("--max-n", type=int)
    c.add_argument("--seed", type=int)
    c.add_argument("--functions")
    c.add_argument("--p-values")
    c.add_argument("--reading", choices=("convex", "concave", "both"))
    c.add_argument("--expect", choices=("violation", "none"))
    c.add_argument("--config")
    c.set_defaults(handler=cmd_counterexample)

    i = sub.add_parser("identity", help="residual campaign for an algebraic identity")
    i.add_argument("--identity")
    _generation_flags(i)
    i.add_argument("--alphas", help="fixed weights, comma separated")
    i.set_defaults(handler=cmd_identity)

    s = sub.add_parser("selftest", help="mutation self-test: inverted claims must be caught")
    s.add_argument("--claim", action="append")
    s.add_argument("--budget", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--include-probes", action="store_true")
    s.add_argument("--config")
    s.set_defaults(handler=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        return args.handler(args)
    except UsageError as exc:
        print(f"tracelab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TracelabError, ValueError) as exc:
        print(f"tracelab: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
