"""Checkers for the trace inequalities.

Every checker evaluates the sides of one inequality chain on concrete
elements and returns an :class:`InequalityReport`.  Checkers never assume a
verdict: the direction of each relation is a pure function of the
convexity class of the scalar function (or of ``p`` against 2), and the
verdict is decided by the tolerance policy in :func:`judge`.

Claim ids
---------
``fk1`` .. ``fk4``      Jensen-type trace inequalities for positive tuples
``mt1`` / ``mt2``       weighted n-tuple Clarkson, convex / concave psi
``cor2.3``              weighted p-norm form (``cor2.3u``: unweighted form)
``clarkson-p``          two-element Clarkson chain
``clarkson-n``          roots-of-unity n-tuple Clarkson chain
``tr1`` / ``tr2``       roots-of-unity refinement, convex / concave psi
``cor3.3``              p-norm refinement; ``cor3.4`` exp, ``cor3.5`` log
``cor3.4-literal``      log refinement as printed (probe)
``tl-literal``          weighted parallelogram inequality as printed (probe)
``tl-chain``            its three-step derivation, one report per step (probe)
``tl1`` / ``cor4.3``    parallelogram inequality with y = 0, general phi / p-norm
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .algebra import AlgebraElement, gram, linear_combination, operator_norm, same_algebra
from .errors import DomainOverflow, NonpositiveP, WrongConvexityClass
from .functions import Convexity, ScalarFunction, power
from .identities import (
    ConstraintMode,
    WeightVector,
    pair_part,
    pairs,
    ratio_difference,
    root_mixes,
)
from .spectral import abs_op, trace_f_positive, trace_phi_abs

LE, GE, EQ = "<=", ">=", "=="
_FLIP = {LE: GE, GE: LE, EQ: EQ}

PASS, VIOLATION, DEGENERATE = "Pass", "Violation", "Degenerate"


@dataclass(frozen=True)
class Tolerance:
    """``a <= b`` passes iff ``a <= b + atol + rtol * max(|a|, |b|, 1)``."""

    atol: float = 1e-10
    rtol: float = 1e-8

    def allowance(self, a: float, b: float) -> float:
        return self.atol + self.rtol * max(abs(a), abs(b), 1.0)

    @classmethod
    def for_function(cls, f: ScalarFunction | None) -> "Tolerance":
        if f is not None and f.is_exponential:
            return cls(rtol=1e-7)
        return cls()


@dataclass(frozen=True)
class InequalityReport:
    claim_id: str
    sides: tuple[tuple[str, float], ...]
    relations: tuple[str, ...]
    margin: float
    tolerance: Tolerance
    verdict: str
    context: dict = field(default_factory=dict, compare=False)

    @property
    def values(self) -> list[float]:
        return [v for _, v in self.sides]

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    @property
    def has_direction(self) -> bool:
        return any(r != EQ for r in self.relations)

    def flipped(self) -> "InequalityReport":
        """The same sides judged against the inverted chain."""
        rel = tuple(_FLIP[r] for r in self.relations)
        return judge(self.claim_id, self.sides, rel, self.tolerance, dict(self.context, flipped=True))

    def spread(self) -> float:
        """max |side_i - side_j| relative to max(1, |sides|)."""
        v = np.asarray(self.values)
        if not np.all(np.isfinite(v)):
            return math.inf
        return float((v.max() - v.min()) / max(1.0, np.abs(v).max()))


def slack(a: float, b: float, rel: str) -> float:
    if rel == LE:
        return b - a
    if rel == GE:
        return a - b
    return -abs(a - b)


def judge(claim_id, sides, relations, tol: Tolerance, context=None) -> InequalityReport:
    sides = tuple((str(lbl), float(v)) for lbl, v in sides)
    relations = tuple(relations)
    if len(relations) != len(sides) - 1:
        raise ValueError("need one relation between each pair of consecutive sides")
    vals = [v for _, v in sides]
    if not all(math.isfinite(v) for v in vals):
        return InequalityReport(claim_id, sides, relations, math.nan, tol, DEGENERATE, context or {})
    margin = math.inf
    ok = True
    for (a, b, rel) in zip(vals[:-1], vals[1:], relations):
        s = slack(a, b, rel)
        margin = min(margin, s)
        if s < -tol.allowance(a, b):
            ok = False
    return InequalityReport(
        claim_id, sides, relations, margin, tol, PASS if ok else VIOLATION, context or {}
    )


def degenerate(claim_id, labels, relations, tol, context, reason) -> InequalityReport:
    sides = tuple((lbl, math.nan) for lbl in labels)
    return InequalityReport(
        claim_id, sides, tuple(relations), math.nan, tol, DEGENERATE, dict(context, reason=reason)
    )


def _direction(cls: Convexity, convex_rel: str) -> str:
    if cls is Convexity.BOTH:
        return EQ
    if cls is Convexity.CONVEX:
        return convex_rel
    if cls is Convexity.CONCAVE:
        return _FLIP[convex_rel]
    raise WrongConvexityClass("no inequality direction for a function of mixed convexity")


def _p_direction(p: float, convex_rel: str) -> str:
    if not p > 0:
        raise NonpositiveP(f"p must be > 0, got {p!r}")
    return _direction(power(p).psi_class, convex_rel)


def _reading(phi: ScalarFunction, reading) -> Convexity:
    cls = phi.psi_class if reading is None else Convexity(reading)
    if cls is Convexity.NEITHER:
        raise WrongConvexityClass(f"psi for {phi.id} is neither convex nor concave")
    return cls


def _require(phi: ScalarFunction, wanted: Convexity | None, which="psi"):
    if wanted is None:
        return
    cls = phi.psi_class if which == "psi" else phi.f_class
    if not cls.admits(wanted):
        raise WrongConvexityClass(f"{which} of {phi.id} is {cls.value}, claim needs {wanted.value}")


def _ctx(base, **extra):
    ctx = dict(base or {})
    ctx.update(extra)
    return ctx


def _guarded(claim_id, labels, relations, tol, context, compute):
    try:
        vals = compute()
    except DomainOverflow as exc:
        return degenerate(claim_id, labels, relations, tol, context, f"DomainOverflow: {exc}")
    return judge(claim_id, list(zip(labels, vals)), relations, tol, context)


def _column(xs: Sequence[AlgebraElement]) -> list[np.ndarray]:
    """Per block, the tall matrix [x_0; ...; x_{n-1}] whose modulus is (sum |x_j|^2)^{1/2}."""
    return [np.vstack([x.blocks[b] for x in xs]) for b in range(len(xs[0].blocks))]


def trace_phi_column(phi: ScalarFunction, xs: Sequence[AlgebraElement]) -> float:
    """tau(phi((sum_j |x_j|^2)^{1/2}))."""
    alg = same_algebra(xs)
    total = 0.0
    for col, w in zip(_column(xs), alg.weights):
        s = np.linalg.svd(col, compute_uv=False)
        total += w * float(np.sum(phi(s)))
    return total


# ---------------------------------------------------------------------------
# Jensen-type inequalities for positive tuples
# ---------------------------------------------------------------------------

_FK = {
    1: (Convexity.CONVEX, True, LE),
    2: (Convexity.CONCAVE, True, GE),
    3: (Convexity.CONVEX, False, GE),
    4: (Convexity.CONCAVE, False, LE),
}


def check_fk(f: ScalarFunction, xs, w: WeightVector | None, variant: int, tol=None, context=None):
    """Sides ``[tau f(combined), weighted sum of tau f(x_j)]``.

    Variants 1/2 combine with the weights (``sum a_j x_j``), variants 3/4
    use the plain sum and ignore ``w``.  Raises NotPositive if an input is
    not positive semidefinite.
    """
    if variant not in _FK:
        raise ValueError(f"variant must be 1..4, got {variant!r}")
    wanted, weighted, rel = _FK[variant]
    _require(f, wanted, which="f")
    n = len(xs)
    if weighted:
        if w is None:
            raise ValueError(f"fk{variant} needs weights")
        a = w.require(ConstraintMode.SUM_ONE).array
    else:
        a = np.ones(n)
    tol = tol or Tolerance.for_function(f)
    claim = f"fk{variant}"
    context = _ctx(context, function=f.id, n=n, alphas=[float(v) for v in a] if weighted else None)

    def compute():
        combined = linear_combination(list(a), xs)
        t = trace_f_positive(f, [combined] + list(xs))
        coeff = a if weighted else np.ones(n)
        return [t[0], float(np.dot(coeff, t[1:]))]

    return _guarded(claim, ["combined", "sum"], [rel], tol, context, compute)


# ---------------------------------------------------------------------------
# weighted n-tuple Clarkson
# ---------------------------------------------------------------------------

def check_weighted_clarkson(phi: ScalarFunction, xs, w: WeightVector, tol=None, context=None,
                            require: Convexity | None = None, claim_id=None):
    """``tau phi(|sum a_j x_j|) + sum_{j<k} tau phi(sqrt(a_j a_k)|x_j - x_k|)`` vs ``sum a_j tau phi(|x_j|)``."""
    _require(phi, require)
    cls = _reading(phi, None)
    a = w.require(ConstraintMode.SUM_ONE).array
    n = len(xs)
    if n != len(a):
        raise ValueError("need one weight per element")
    rel = _direction(cls, LE)
    claim = claim_id or ("mt1" if cls is Convexity.CONVEX else "mt2" if cls is Convexity.CONCAVE else "mt")
    tol = tol or Tolerance.for_function(phi)
    context = _ctx(context, function=phi.id, n=n, alphas=[float(v) for v in a])

    def compute():
        pr = pairs(n)
        terms = [linear_combination(list(a), xs)]
        terms += [math.sqrt(a[j] * a[k]) * (xs[j] - xs[k]) for j, k in pr]
        t = trace_phi_abs(phi, terms + list(xs))
        lhs = t[0] + t[1:1 + len(pr)].sum()
        rhs = float(np.dot(a, t[1 + len(pr):]))
        return [lhs, rhs]

    return _guarded(claim, ["mean+pairs", "weighted"], [rel], tol, context, compute)


def check_weighted_clarkson_pnorm(xs, w: WeightVector, p: float, tol=None, context=None):
    """||sum a_j x_j||_p^p + sum_{j<k} (a_j a_k)^{p/2} ||x_j - x_k||_p^p vs sum a_j ||x_j||_p^p."""
    rel = _p_direction(p, LE)
    a = w.require(ConstraintMode.SUM_ONE).array
    n = len(xs)
    tol = tol or Tolerance()
    context = _ctx(context, p=p, n=n, alphas=[float(v) for v in a])
    pr = pairs(n)
    terms = [linear_combination(list(a), xs)] + [xs[j] - xs[k] for j, k in pr]
    t = trace_phi_abs(power(p), terms + list(xs))
    coeff = np.array([(a[j] * a[k]) ** (p / 2) for j, k in pr])
    lhs = t[0] + float(np.dot(coeff, t[1:1 + len(pr)])) if pr else t[0]
    rhs = float(np.dot(a, t[1 + len(pr):]))
    return judge("cor2.3", [("mean+pairs", lhs), ("weighted", rhs)], [rel], tol, context)


def check_clarkson_unweighted(xs, p: float, tol=None, context=None):
    """||sum x_j||_p^p + sum_{j<k} ||x_j - x_k||_p^p vs n^{p-1} sum ||x_j||_p^p."""
    rel = _p_direction(p, LE)
    n = len(xs)
    tol = tol or Tolerance()
    context = _ctx(context, p=p, n=n)
    alg = same_algebra(xs)
    pr = pairs(n)
    total = alg.zero()
    for x in xs:
        total = total + x
    t = trace_phi_abs(power(p), [total] + [xs[j] - xs[k] for j, k in pr] + list(xs))
    lhs = float(t[:1 + len(pr)].sum())
    rhs = n ** (p - 1) * float(t[1 + len(pr):].sum())
    return judge("cor2.3u", [("sum+pairs", lhs), ("bound", rhs)], [rel], tol, context)


# ---------------------------------------------------------------------------
# classical Clarkson chains
# ---------------------------------------------------------------------------

def check_clarkson_pnorm(xs, p: float, tol=None, context=None):
    """2[t|x|^p + t|y|^p]  ?  t|x+y|^p + t|x-y|^p  ?  2^{p-1}[t|x|^p + t|y|^p]."""
    if len(xs) != 2:
        raise ValueError("the two-element Clarkson chain takes exactly two elements")
    rel = _p_direction(p, LE)
    x, y = xs
    tol = tol or Tolerance()
    context = _ctx(context, p=p, n=2)
    t = trace_phi_abs(power(p), [x, y, x + y, x - y])
    base = t[0] + t[1]
    mid = t[2] + t[3]
    return judge("clarkson-p", [("lower", 2 * base), ("middle", mid), ("upper", 2 ** (p - 1) * base)],
                 [rel, rel], tol, context)


def check_clarkson_n(xs, p: float, tol=None, context=None):
    """n sum ||x_j||^p  ?  sum_k ||sum_j w_j^k x_j||^p  ?  n^{p-1} sum ||x_j||^p."""
    rel = _p_direction(p, LE)
    n = len(xs)
    tol = tol or Tolerance()
    context = _ctx(context, p=p, n=n)
    t = trace_phi_abs(power(p), list(xs) + root_mixes(xs))
    base = float(t[:n].sum())
    mid = float(t[n:].sum())
    return judge("clarkson-n", [("lower", n * base), ("middle", mid), ("upper", n ** (p - 1) * base)],
                 [rel, rel], tol, context)


# ---------------------------------------------------------------------------
# roots-of-unity refinement
# ---------------------------------------------------------------------------

def check_roots_refinement(phi: ScalarFunction, xs, tol=None, context=None,
                           require: Convexity | None = None, claim_id=None):
    """[sum_k t phi(n^{-1/2}|m_k|), t phi((sum|x_j|^2)^{1/2}), (1/n) sum_k t phi(|m_k|)], m_k = sum_j w_j^k x_j."""
    _require(phi, require)
    cls = _reading(phi, None)
    rel = _direction(cls, LE)
    n = len(xs)
    claim = claim_id or ("tr1" if cls is Convexity.CONVEX else "tr2" if cls is Convexity.CONCAVE else "tr")
    tol = tol or Tolerance.for_function(phi)
    context = _ctx(context, function=phi.id, n=n)

    def compute():
        mixes = root_mixes(xs)
        scaled = [m / math.sqrt(n) for m in mixes]
        t = trace_phi_abs(phi, scaled + mixes)
        return [float(t[:n].sum()), trace_phi_column(phi, xs), float(t[n:].sum()) / n]

    return _guarded(claim, ["scaled", "column", "averaged"], [rel, rel], tol, context, compute)


def check_schatten_refinement(xs, p: float, tol=None, context=None):
    """n^{-p/2} sum_k ||m_k||_p^p  ?  ||(sum |x_j|^2)^{1/2}||_p^p  ?  (1/n) sum_k ||m_k||_p^p."""
    rel = _p_direction(p, LE)
    n = len(xs)
    tol = tol or Tolerance()
    context = _ctx(context, p=p, n=n)
    phi = power(p)
    t = trace_phi_abs(phi, root_mixes(xs))
    s = float(t.sum())
    return judge("cor3.3", [("scaled", n ** (-p / 2) * s), ("column", trace_phi_column(phi, xs)),
                            ("averaged", s / n)], [rel, rel], tol, context)


def check_log_refinement_literal(xs, tol=None, context=None):
    """The log refinement chain with its printed middle term (sum |x_j|)^{1/2} and inner factor 1/n."""
    n = len(xs)
    tol = tol or Tolerance()
    context = _ctx(context, function="log1p", n=n)
    alg = same_algebra(xs)
    log1p = ScalarFunction("log1p")
    mixes = root_mixes(xs)
    t = trace_phi_abs(log1p, mixes + [m / n for m in mixes])
    abs_sum = alg.zero()
    for x in xs:
        abs_sum = abs_sum + abs_op(x)
    middle = float(trace_f_positive(ScalarFunction("log1psqrt"), [abs_sum])[0])
    return judge("cor3.4-literal",
                 [("averaged", float(t[:n].sum()) / n), ("sqrt-abs-sum", middle),
                  ("inner-1/n", float(t[n:].sum()) / n)], [LE, LE], tol, context)


# ---------------------------------------------------------------------------
# weighted parallelogram inequalities
# ---------------------------------------------------------------------------

def _tl_parts(xs, ys, a):
    n = len(a)
    c = 1.0 / np.sqrt(np.outer(a, a))
    direct = [a[i] * xs[i] - a[j] * ys[j] for i in range(n) for j in range(n)]
    xpairs = [ratio_difference(xs[i], xs[j], a[i], a[j]) for i, j in pairs(n)]
    ypairs = [ratio_difference(ys[i], ys[j], a[i], a[j]) for i, j in pairs(n)]
    alg = same_algebra(list(xs) + list(ys))
    drift = alg.zero()
    for i in range(n):
        drift = drift + (xs[i] - ys[i])
    return c, direct, xpairs, ypairs, drift


def check_tl_literal(xs, ys, w: WeightVector, phi: ScalarFunction, reading=None, tol=None, context=None):
    """LHS = sum_{ij} (a_i a_j)^{-1/2} t phi(|a_i x_i - a_j y_j|) against the pair/drift RHS.

    ``reading`` forces the direction (``"convex"`` gives >=, ``"concave"``
    gives <=); by default it is the psi class of ``phi``.
    """
    a = w.require(ConstraintMode.SUM_INV_SQRT_PAIRS_ONE).array
    n = len(a)
    if len(xs) != n or len(ys) != n:
        raise ValueError("xs, ys and weights must have equal length")
    cls = _reading(phi, reading)
    rel = _direction(cls, GE)
    tol = tol or Tolerance.for_function(phi)
    context = _ctx(context, function=phi.id, n=n, alphas=[float(v) for v in a], reading=cls.value)

    def compute():
        c, direct, xpairs, ypairs, drift = _tl_parts(xs, ys, a)
        t = trace_phi_abs(phi, direct + xpairs + ypairs + [drift])
        lhs = float(np.dot(c.ravel(), t[:n * n]))
        rhs = float(t[n * n:].sum())
        return [lhs, rhs]

    return _guarded("tl-literal", ["weighted-direct", "pairs+drift"], [rel], tol, context, compute)


def check_tl_proof_chain(xs, ys, w: WeightVector, phi: ScalarFunction, reading=None, tol=None, context=None):
    """Evaluate each link of the derivation separately.

    ``A = sum_{ij} (a_i a_j)^{-1/2} |a_i x_i - a_j y_j|^2`` and ``B`` the pair/drift
    sum of squares.  Links: Jensen step ``LHS ? t psi(A)``, substitution
    ``t psi(A) == t psi(B)``, superadditivity step ``t psi(B) ? RHS``.
    """
    a = w.require(ConstraintMode.SUM_INV_SQRT_PAIRS_ONE, ConstraintMode.NONE).array
    n = len(a)
    cls = _reading(phi, reading)
    rel = _direction(cls, GE)
    tol = tol or Tolerance.for_function(phi)
    base = _ctx(context, function=phi.id, n=n, alphas=[float(v) for v in a], reading=cls.value)
    c, direct, xpairs, ypairs, drift = _tl_parts(xs, ys, a)
    alg = same_algebra(list(xs) + list(ys))
    big_a = alg.zero()
    for cij, d in zip(c.ravel(), direct):
        big_a = big_a + cij * gram(d)
    big_b = pair_part(xs, a) + pair_part(ys, a) + gram(drift)
    residual = operator_norm(big_a - big_b)

    reports = []
    try:
        t_direct = trace_phi_abs(phi, direct)
        lhs = float(np.dot(c.ravel(), t_direct))
        t_rest = trace_phi_abs(phi, xpairs + ypairs + [drift])
        rhs = float(t_rest.sum())
        psi_ab = trace_f_positive(phi.psi, [big_a, big_b])
    except DomainOverflow as exc:
        for step, labels, r in (("fk1", ["lhs", "psi(A)"], rel), ("mo1-substitution", ["psi(A)", "psi(B)"], EQ),
                                ("fk3", ["psi(B)", "rhs"], rel)):
            reports.append(degenerate("tl-chain", labels, [r], tol, _ctx(base, step=step), str(exc)))
        return reports
    reports.append(judge("tl-chain", [("lhs", lhs), ("psi(A)", psi_ab[0])], [rel], tol, _ctx(base, step="fk1")))
    reports.append(judge("tl-chain", [("psi(A)", psi_ab[0]), ("psi(B)", psi_ab[1])], [EQ], tol,
                         _ctx(base, step="mo1-substitution", operator_residual=residual)))
    reports.append(judge("tl-chain", [("psi(B)", psi_ab[1]), ("rhs", rhs)], [rel], tol, _ctx(base, step="fk3")))
    return reports


def check_tl1(xs, w: WeightVector, phi: ScalarFunction, tol=None, context=None, require=None):
    """sum_j (1/a_j) t phi(a_j |x_j|)  ?  sum_{i<j} t phi(|r_ij x_i - r_ji x_j|) + t phi(|sum x_i|)."""
    _require(phi, require)
    a = w.require(ConstraintMode.SUM_INVERSE_ONE).array
    n = len(a)
    cls = _reading(phi, None)
    rel = _direction(cls, GE)
    tol = tol or Tolerance.for_function(phi)
    context = _ctx(context, function=phi.id, n=n, alphas=[float(v) for v in a])

    def compute():
        alg = same_algebra(xs)
        total = alg.zero()
        for x in xs:
            total = total + x
        scaled = [a[j] * xs[j] for j in range(n)]
        pr = [ratio_difference(xs[i], xs[j], a[i], a[j]) for i, j in pairs(n)]
        t = trace_phi_abs(phi, scaled + pr + [total])
        return [float(np.dot(1.0 / a, t[:n])), float(t[n:].sum())]

    return _guarded("tl1", ["weighted", "pairs+sum"], [rel], tol, context, compute)


def check_pnorm_parallelogram(xs, w: WeightVector, p: float, tol=None, context=None):
    """sum a_i^{p-1} ||x_i||_p^p  ?  sum_{i<j} ||r_ij x_i - r_ji x_j||_p^p + ||sum x_i||_p^p."""
    rel = _p_direction(p, GE)
    a = w.require(ConstraintMode.SUM_INVERSE_ONE).array
    n = len(a)
    tol = tol or Tolerance()
    context = _ctx(context, p=p, n=n, alphas=[float(v) for v in a])
    alg = same_algebra(xs)
    total = alg.zero()
    for x in xs:
        total = total + x
    pr = [ratio_difference(xs[i], xs[j], a[i], a[j]) for i, j in pairs(n)]
    t = trace_phi_abs(power(p), list(xs) + pr + [total])
    lhs = float(np.dot(a ** (p - 1), t[:n]))
    return judge("cor4.3", [("weighted", lhs), ("pairs+sum", float(t[n:].sum()))], [rel], tol, context)


def with_context(report: InequalityReport, **extra) -> InequalityReport:
    return replace(report, context=_ctx(report.context, **extra))
