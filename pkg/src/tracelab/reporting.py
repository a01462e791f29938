"""Serialization of inequality reports and run manifests."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile

from .inequalities import InequalityReport, Tolerance

CSV_FIELDS = (
    "claim", "verdict", "margin", "atol", "rtol", "relations", "sides",
    "seed", "trial", "dims", "weights", "n", "alphas", "function", "p", "step",
)


def _num(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else None


def report_to_dict(r: InequalityReport) -> dict:
    return {
        "claim": r.claim_id,
        "verdict": r.verdict,
        "sides": [[lbl, _num(v)] for lbl, v in r.sides],
        "relations": list(r.relations),
        "margin": _num(r.margin),
        "tolerance": {"atol": r.tolerance.atol, "rtol": r.tolerance.rtol},
        "context": r.context,
    }


def report_from_dict(d: dict) -> InequalityReport:
    nan = math.nan
    return InequalityReport(
        claim_id=d["claim"],
        sides=tuple((lbl, nan if v is None else float(v)) for lbl, v in d["sides"]),
        relations=tuple(d["relations"]),
        margin=nan if d["margin"] is None else float(d["margin"]),
        tolerance=Tolerance(**d["tolerance"]),
        verdict=d["verdict"],
        context=dict(d["context"]),
    )


def dumps(obj, pretty: bool = False) -> str:
    # repr-based float output is the shortest string that round-trips;
    # compact output keeps the C encoder in play for large reports
    if pretty:
        return json.dumps(obj, indent=1, allow_nan=False) + "\n"
    return json.dumps(obj, separators=(",", ":"), allow_nan=False) + "\n"


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in reports:
        d = report_to_dict(r)
        ctx = d["context"]
        w.writerow({
            "claim": d["claim"],
            "verdict": d["verdict"],
            "margin": "" if d["margin"] is None else repr(d["margin"]),
            "atol": repr(d["tolerance"]["atol"]),
            "rtol": repr(d["tolerance"]["rtol"]),
            "relations": " ".join(d["relations"]),
            "sides": json.dumps(d["sides"]),
            "seed": ctx.get("seed", ""),
            "trial": ctx.get("trial", ""),
            "dims": json.dumps(ctx.get("dims")),
            "weights": json.dumps(ctx.get("weights")),
            "n": ctx.get("n", ""),
            "alphas": json.dumps(ctx.get("alphas")),
            "function": ctx.get("function") or "",
            "p": "" if ctx.get("p") is None else repr(ctx["p"]),
            "step": ctx.get("step", ""),
        })
    return buf.getvalue()


def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def manifest_path(out: str) -> str:
    root, _ = os.path.splitext(out)
    return root + ".manifest.json"
