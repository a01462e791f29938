"""Catalog of scalar functions phi with the convexity data the theorems need.

Every entry is continuous and increasing on ``[0, inf)`` with ``phi(0) = 0``.
Two convexity labels are attached to each entry:

``f_class``
    convexity of phi itself (selects the direction of the Jensen-type trace
    inequalities for positive operators);
``psi_class``
    convexity of ``psi(t) = phi(sqrt(t))`` (selects the direction of the
    Clarkson-type inequalities).

Both labels come from a fixed table and are cross-checked numerically by
sampling slopes on a logarithmic grid.  New kinds are added by extending
``_KINDS`` together with the table in ``_classes``.

String ids: ``power:<p>``, ``expsq`` (e^{t^2}-1), ``log1p`` (log(1+t)),
``id`` (t), plus the two psi-forms ``expm1`` (e^t-1) and ``log1psqrt``
(log(1+sqrt t)).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ClassificationMismatch, DomainOverflow, NonpositiveP, UnknownFunctionId

_KINDS = ("power", "expsq", "log1p", "id", "expm1", "log1psqrt")

# largest admissible argument per kind; beyond it DomainOverflow
_GUARDS = {"expsq": 20.0, "expm1": 400.0}


class Convexity(str, enum.Enum):
    CONVEX = "convex"
    CONCAVE = "concave"
    BOTH = "both"
    NEITHER = "neither"

    def admits(self, wanted: "Convexity") -> bool:
        """True if a function of this class may be used where ``wanted`` is required."""
        return self is wanted or self is Convexity.BOTH


@dataclass(frozen=True)
class ScalarFunction:
    kind: str
    p: float | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise UnknownFunctionId(f"unknown function kind {self.kind!r}")
        if self.kind == "power":
            if self.p is None or not math.isfinite(self.p) or self.p <= 0:
                raise NonpositiveP(f"power exponent must be > 0, got {self.p!r}")
            object.__setattr__(self, "p", float(self.p))
        elif self.p is not None:
            raise ValueError(f"{self.kind} takes no exponent")

    @property
    def id(self) -> str:
        if self.kind == "power":
            s = repr(self.p)
            return "power:" + (s[:-2] if s.endswith(".0") else s)
        return self.kind

    def __str__(self):
        return self.id

    @property
    def guard(self) -> float:
        return _GUARDS.get(self.kind, math.inf)

    @property
    def is_exponential(self) -> bool:
        return self.kind in _GUARDS

    def __call__(self, t):
        return evaluate(self, t)

    def psi(self, t):
        """psi(t) = phi(sqrt t), using closed forms where they are more accurate."""
        t = _check_arg(t)
        if self.kind == "power":
            return t ** (self.p / 2.0)
        if self.kind == "expsq":
            if np.any(t > self.guard ** 2):
                raise DomainOverflow(f"expsq psi argument exceeds {self.guard ** 2}")
            return np.expm1(t)
        if self.kind == "id":
            return np.sqrt(t)
        if self.kind == "log1p":
            return np.log1p(np.sqrt(t))
        return evaluate(self, np.sqrt(t))

    @property
    def psi_class(self) -> Convexity:
        return _classes(self)[1]

    @property
    def f_class(self) -> Convexity:
        return _classes(self)[0]


def _check_arg(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("catalog functions are defined on [0, inf)")
    return t


def evaluate(f: ScalarFunction, t):
    """Evaluate ``f`` elementwise; ``f(0) == 0`` exactly for every kind."""
    t = _check_arg(t)
    if np.any(t > f.guard):
        raise DomainOverflow(f"{f.id} argument {float(np.max(t))!r} exceeds guard {f.guard}")
    k = f.kind
    if k == "power":
        return t ** f.p
    if k == "id":
        return t.copy()
    if k == "expsq":
        return np.expm1(t * t)
    if k == "expm1":
        return np.expm1(t)
    if k == "log1p":
        return np.log1p(t)
    return np.log1p(np.sqrt(t))


def parse_function(spec: str) -> ScalarFunction:
    """Parse a CLI/config function id."""
    spec = spec.strip()
    if spec.startswith("power:"):
        try:
            p = float(spec.split(":", 1)[1])
        except ValueError:
            raise UnknownFunctionId(f"malformed exponent in {spec!r}") from None
        return ScalarFunction("power", p)
    if spec in _KINDS and spec != "power":
        return ScalarFunction(spec)
    raise UnknownFunctionId(f"unknown function id {spec!r}")


def power(p: float) -> ScalarFunction:
    return ScalarFunction("power", p)


EXPSQ = ScalarFunction("expsq")
LOG1P = ScalarFunction("log1p")
IDENTITY = ScalarFunction("id")


def _table(f: ScalarFunction) -> tuple[Convexity, Convexity]:
    C = Convexity
    if f.kind == "power":
        p = f.p
        fc = C.BOTH if p == 1 else (C.CONVEX if p > 1 else C.CONCAVE)
        pc = C.BOTH if p == 2 else (C.CONVEX if p > 2 else C.CONCAVE)
        return fc, pc
    return {
        "id": (C.BOTH, C.CONCAVE),
        "expsq": (C.CONVEX, C.CONVEX),
        "log1p": (C.CONCAVE, C.CONCAVE),
        "expm1": (C.CONVEX, C.NEITHER),
        "log1psqrt": (C.CONCAVE, C.CONCAVE),
    }[f.kind]


GRID = np.geomspace(1e-6, 10.0, 200)


def sampled_convexity(g, grid=GRID, tol=1e-9) -> Convexity:
    """Classify a sampled function by the sign pattern of its slope increments."""
    vals = np.asarray(g(grid), dtype=float)
    slopes = np.diff(vals) / np.diff(grid)
    inc = np.diff(slopes)
    allow = tol * np.maximum(1.0, np.maximum(np.abs(slopes[1:]), np.abs(slopes[:-1])))
    up = np.any(inc > allow)
    down = np.any(inc < -allow)
    if up and down:
        return Convexity.NEITHER
    if up:
        return Convexity.CONVEX
    if down:
        return Convexity.CONCAVE
    return Convexity.BOTH


def _consistent(declared: Convexity, sampled: Convexity) -> bool:
    # a mildly convex function can look linear on a finite grid, never the reverse
    if declared is sampled:
        return True
    return sampled is Convexity.BOTH and declared in (Convexity.CONVEX, Convexity.CONCAVE)


@lru_cache(maxsize=None)
def _classes(f: ScalarFunction) -> tuple[Convexity, Convexity]:
    fc, pc = _table(f)
    grid = GRID[GRID <= f.guard]
    s_f = sampled_convexity(f, grid)
    s_psi = sampled_convexity(f.psi, GRID)
    if not _consistent(fc, s_f):
        raise ClassificationMismatch(f"{f.id}: table says f is {fc.value}, samples say {s_f.value}")
    if not _consistent(pc, s_psi):
        raise ClassificationMismatch(f"{f.id}: table says psi is {pc.value}, samples say {s_psi.value}")
    return fc, pc


def classify_psi(f: ScalarFunction) -> Convexity:
    return f.psi_class


def classify_f(f: ScalarFunction) -> Convexity:
    return f.f_class
