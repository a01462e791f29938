"""Seeded generation of random instances and campaign execution.

Randomness
----------
Every trial owns a 256-bit seed ``sha256("tracelab/v1|<master>|<claim>|<config>|<n>|<index>")``.
The first 128 bits key a Philox-4x64 counter generator that draws the
algebra and the weights; the last 128 bits key a second Philox generator
that draws the elements.  Element draws therefore depend only on the
stored trial context, which is what :func:`replay` relies on.  No RNG
state is shared between trials, so trials can run in any order or in
parallel.
"""
from __future__ import annotations

import hashlib
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import inequalities as ineq
from .algebra import AlgebraElement, TracialAlgebra, make_algebra, operator_norm
from .errors import NonpositiveP, UnknownClaimId, WrongConvexityClass
from .functions import Convexity, ScalarFunction, parse_function
from .identities import (
    ConstraintMode,
    WeightVector,
    ibk_sides,
    id1_sides,
    mo1_sides,
    mo2_sides,
    residual_ibk,
    residual_id1,
    residual_mo1,
    residual_mo2,
    residual_scale,
)
from .inequalities import PASS, VIOLATION, DEGENERATE, InequalityReport, Tolerance

RNG_VERSION = "tracelab-sha256-philox4x64/v1"
EXP_NORM_CAP = 3.0
DEFAULT_P_VALUES = (0.5, 1.0, 1.5, 2.0, 3.0, 4.0)
DEFAULT_TUPLE_SIZES = (2, 3, 4, 5)


# ---------------------------------------------------------------------------
# seeds and generators
# ---------------------------------------------------------------------------

def trial_seed(master_seed: int, claim: str, config: str, n: int, index: int) -> str:
    msg = f"tracelab/v1|{int(master_seed)}|{claim}|{config}|{n}|{index}".encode()
    return hashlib.sha256(msg).hexdigest()


def generators(seed_hex: str) -> tuple[np.random.Generator, np.random.Generator]:
    """(structure generator, element generator) for a trial seed."""
    raw = bytes.fromhex(seed_hex)
    k1 = int.from_bytes(raw[:16], "little")
    k2 = int.from_bytes(raw[16:], "little")
    return (np.random.Generator(np.random.Philox(key=k1)),
            np.random.Generator(np.random.Philox(key=k2)))


def random_algebra(rng, dims=(1, 4), blocks=3, weight_range=(0.25, 4.0)) -> TracialAlgebra:
    k = int(rng.integers(1, blocks + 1))
    ds = rng.integers(dims[0], dims[1] + 1, size=k)
    ws = rng.uniform(weight_range[0], weight_range[1], size=k)
    return make_algebra([(int(d), float(w)) for d, w in zip(ds, ws)])


def _complex_gaussian(rng, d):
    return (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2.0)


def random_element(algebra: TracialAlgebra, rng, cap: float | None = None) -> AlgebraElement:
    """Standard complex Gaussian blocks, rescaled to operator norm ``cap`` if larger."""
    # finite by construction, so the validating constructor is skipped
    x = AlgebraElement._wrap(algebra, [_complex_gaussian(rng, d) for d in algebra.dims])
    if cap is not None:
        nrm = operator_norm(x)
        if nrm > cap:
            x = x * (cap / nrm)
    return x


def random_positive(algebra: TracialAlgebra, rng, cap: float | None = None) -> AlgebraElement:
    """g* g for a Gaussian g; norm-capped like :func:`random_element`."""
    g = random_element(algebra, rng)
    x = AlgebraElement._wrap(algebra, [b.conj().T @ b for b in g.blocks])
    if cap is not None:
        nrm = operator_norm(x)
        if nrm > cap:
            x = x * (cap / nrm)
    return x


def _haar_block(rng, d):
    q, r = np.linalg.qr(_complex_gaussian(rng, d))
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph


def random_unitary_contraction(algebra: TracialAlgebra, rng, kind: str = "unitary") -> AlgebraElement:
    """Haar unitary per block; ``kind="contraction"`` scales it by s ~ U(0, 1]."""
    u = AlgebraElement(algebra, [_haar_block(rng, d) for d in algebra.dims])
    if kind == "unitary":
        return u
    if kind == "contraction":
        return u * float(1.0 - rng.random())
    raise ValueError(f"kind must be 'unitary' or 'contraction', got {kind!r}")


def normalize_weights(raw: Sequence[float], mode: ConstraintMode) -> WeightVector:
    raw = np.asarray(raw, dtype=float)
    mode = ConstraintMode(mode)
    if mode is ConstraintMode.SUM_ONE:
        alphas = raw / math.fsum(raw)
    elif mode is ConstraintMode.SUM_INVERSE_ONE:
        alphas = raw * math.fsum(1.0 / raw)
    elif mode is ConstraintMode.SUM_INV_SQRT_PAIRS_ONE:
        alphas = raw * math.fsum(1.0 / np.sqrt(raw)) ** 2
    else:
        alphas = raw
    return WeightVector(tuple(float(a) for a in alphas), mode)


def random_weights(n: int, mode: ConstraintMode, rng) -> WeightVector:
    if n < 1:
        raise ValueError("n must be >= 1")
    return normalize_weights(rng.uniform(0.2, 1.0, size=n), mode)


# ---------------------------------------------------------------------------
# claims
# ---------------------------------------------------------------------------

CONVEX_F = ("power:2", "power:3", "power:4", "expsq", "expm1")
CONCAVE_F = ("power:0.5", "power:1", "log1p", "log1psqrt")
CONVEX_PSI = ("power:4", "power:3", "expsq", "power:2")
CONCAVE_PSI = ("power:1", "power:1.5", "log1p")
TL_FUNCS = ("power:4", "power:3", "expsq", "power:1", "power:1.5", "log1p")


@dataclass(frozen=True)
class ClaimSpec:
    """How to generate inputs for a claim and which checker to run.

    ``param`` is ``"function"``, ``"p"`` or ``None``; ``defaults`` is the
    grid used when the config does not name one.  ``inputs`` is one of
    ``"positive"``, ``"general"``, ``"pair"`` (general xs and ys).
    """

    claim: str
    param: str | None
    defaults: tuple
    inputs: str
    weights: ConstraintMode | None
    run: Callable
    require: Convexity | None = None
    require_on: str = "psi"
    probe: bool = False
    fixed_n: int | None = None
    cap_by_weight: bool = False


def _fk(variant):
    return lambda xs, ys, w, par, tol, **kw: [ineq.check_fk(par, xs, w, variant, tol)]


def _mt(claim):
    return lambda xs, ys, w, par, tol, **kw: [ineq.check_weighted_clarkson(par, xs, w, tol, claim_id=claim)]


def _tr(claim):
    return lambda xs, ys, w, par, tol, **kw: [ineq.check_roots_refinement(par, xs, tol, claim_id=claim)]


_C = Convexity
_SUM1 = ConstraintMode.SUM_ONE
_INV1 = ConstraintMode.SUM_INVERSE_ONE
_PAIRS1 = ConstraintMode.SUM_INV_SQRT_PAIRS_ONE

CLAIMS: dict[str, ClaimSpec] = {s.claim: s for s in [
    ClaimSpec("fk1", "function", CONVEX_F, "positive", _SUM1, _fk(1), _C.CONVEX, "f"),
    ClaimSpec("fk2", "function", CONCAVE_F, "positive", _SUM1, _fk(2), _C.CONCAVE, "f"),
    ClaimSpec("fk3", "function", CONVEX_F, "positive", None, _fk(3), _C.CONVEX, "f"),
    ClaimSpec("fk4", "function", CONCAVE_F, "positive", None, _fk(4), _C.CONCAVE, "f"),
    ClaimSpec("mt1", "function", CONVEX_PSI, "general", _SUM1, _mt("mt1"), _C.CONVEX),
    ClaimSpec("mt2", "function", CONCAVE_PSI, "general", _SUM1, _mt("mt2"), _C.CONCAVE),
    ClaimSpec("cor2.3", "p", DEFAULT_P_VALUES, "general", _SUM1,
              lambda xs, ys, w, p, tol, **kw: [ineq.check_weighted_clarkson_pnorm(xs, w, p, tol)]),
    ClaimSpec("cor2.3u", "p", DEFAULT_P_VALUES, "general", None,
              lambda xs, ys, w, p, tol, **kw: [ineq.check_clarkson_unweighted(xs, p, tol)]),
    ClaimSpec("cor2.5", "function", ("expsq",), "general", _SUM1, _mt("cor2.5"), _C.CONVEX),
    ClaimSpec("cor2.6", "function", ("log1p",), "general", _SUM1, _mt("cor2.6"), _C.CONCAVE),
    ClaimSpec("clarkson-p", "p", DEFAULT_P_VALUES, "general", None,
              lambda xs, ys, w, p, tol, **kw: [ineq.check_clarkson_pnorm(xs, p, tol)], fixed_n=2),
    ClaimSpec("clarkson-n", "p", DEFAULT_P_VALUES, "general", None,
              lambda xs, ys, w, p, tol, **kw: [ineq.check_clarkson_n(xs, p, tol)]),
    ClaimSpec("tr1", "function", CONVEX_PSI, "general", None, _tr("tr1"), _C.CONVEX),
    ClaimSpec("tr2", "function", CONCAVE_PSI, "general", None, _tr("tr2"), _C.CONCAVE),
    ClaimSpec("cor3.3", "p", DEFAULT_P_VALUES, "general", None,
              lambda xs, ys, w, p, tol, **kw: [ineq.check_schatten_refinement(xs, p, tol)]),
    ClaimSpec("cor3.4", "function", ("expsq",), "general", None, _tr("cor3.4"), _C.CONVEX),
    ClaimSpec("cor3.5", "function", ("log1p",), "general", None, _tr("cor3.5"), _C.CONCAVE),
    ClaimSpec("cor3.4-literal", None, (None,), "general", None,
              lambda xs, ys, w, par, tol, **kw: [ineq.check_log_refinement_literal(xs, tol)], probe=True),
    ClaimSpec("tl-literal", "function", TL_FUNCS, "pair", _PAIRS1,
              lambda xs, ys, w, par, tol, **kw: [ineq.check_tl_literal(xs, ys, w, par, kw.get("reading"), tol)],
              probe=True, cap_by_weight=True),
    ClaimSpec("tl-chain", "function", TL_FUNCS, "pair", _PAIRS1,
              lambda xs, ys, w, par, tol, **kw: ineq.check_tl_proof_chain(xs, ys, w, par, kw.get("reading"), tol),
              probe=True, cap_by_weight=True),
    ClaimSpec("tl1", "function", CONVEX_PSI + CONCAVE_PSI, "general", _INV1,
              lambda xs, ys, w, par, tol, **kw: [ineq.check_tl1(xs, w, par, tol)], cap_by_weight=True),
    ClaimSpec("cor4.3", "p", DEFAULT_P_VALUES, "general", _INV1,
              lambda xs, ys, w, p, tol, **kw: [ineq.check_pnorm_parallelogram(xs, w, p, tol)]),
]}

CLAIM_IDS = tuple(CLAIMS)
PROBE_IDS = tuple(c for c, s in CLAIMS.items() if s.probe)


def get_claim(claim: str) -> ClaimSpec:
    try:
        return CLAIMS[claim]
    except KeyError:
        raise UnknownClaimId(f"unknown claim id {claim!r}; known: {', '.join(CLAIM_IDS)}") from None


def resolve_claims(names: Sequence[str], include_probes: bool = False) -> list[str]:
    out = []
    for name in names:
        if name == "all":
            out.extend(c for c in CLAIM_IDS if include_probes or c not in PROBE_IDS)
        else:
            get_claim(name)
            out.append(name)
    return list(dict.fromkeys(out))


# ---------------------------------------------------------------------------
# trials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrialConfig:
    master_seed: int = 0
    trials: int = 100
    dims: tuple[int, int] = (1, 4)
    blocks: int = 3
    weight_range: tuple[float, float] = (0.25, 4.0)
    tuple_sizes: tuple[int, ...] | None = None
    functions: tuple[str, ...] | None = None
    p_values: tuple[float, ...] | None = None
    tol_abs: float | None = None
    tol_rel: float | None = None
    threads: int | None = None
    reading: str | None = None

    def __post_init__(self):
        if self.trials < 0:
            raise ValueError("trials must be >= 0")
        lo, hi = self.dims
        if not 1 <= lo <= hi:
            raise ValueError(f"dimension range must satisfy 1 <= lo <= hi, got {self.dims}")
        if self.blocks < 1:
            raise ValueError("blocks must be >= 1")
        wl, wh = self.weight_range
        if not 0 < wl <= wh:
            raise ValueError(f"weight range must satisfy 0 < lo <= hi, got {self.weight_range}")
        if self.tuple_sizes is not None and any(n < 1 for n in self.tuple_sizes):
            raise ValueError("tuple sizes must be >= 1")
        if self.reading is not None:
            Convexity(self.reading)


def _variants(spec: ClaimSpec, config: TrialConfig) -> list:
    if spec.param == "function":
        ids = spec.defaults if config.functions is None else config.functions
        funcs = [parse_function(f) for f in ids]
        for f in funcs:
            if spec.require is not None:
                cls = f.psi_class if spec.require_on == "psi" else f.f_class
                if not cls.admits(spec.require):
                    raise WrongConvexityClass(
                        f"{spec.claim} needs {spec.require_on} {spec.require.value}; {f.id} is {cls.value}"
                    )
            elif f.psi_class is Convexity.NEITHER:
                raise WrongConvexityClass(f"{spec.claim} needs a psi-classified function, got {f.id}")
        return funcs
    if spec.param == "p":
        ps = spec.defaults if config.p_values is None else config.p_values
        for p in ps:
            if not p > 0:
                raise NonpositiveP(f"p must be > 0, got {p!r}")
        return [float(p) for p in ps]
    return [None]


def _variant_label(v) -> str:
    if isinstance(v, ScalarFunction):
        return v.id
    if v is None:
        return "-"
    return f"p={v!r}"


def _tuple_sizes(spec: ClaimSpec, config: TrialConfig) -> list[int]:
    if spec.fixed_n is not None:
        return [spec.fixed_n]
    return list(config.tuple_sizes or DEFAULT_TUPLE_SIZES)


def _tolerance(variant, config: TrialConfig) -> Tolerance:
    base = Tolerance.for_function(variant if isinstance(variant, ScalarFunction) else None)
    return Tolerance(
        base.atol if config.tol_abs is None else config.tol_abs,
        base.rtol if config.tol_rel is None else config.tol_rel,
    )


def element_cap(spec: ClaimSpec, variant, alphas) -> float | None:
    if not (isinstance(variant, ScalarFunction) and variant.is_exponential):
        return None
    if spec.inputs == "positive":
        return EXP_NORM_CAP
    if spec.cap_by_weight and alphas is not None:
        return EXP_NORM_CAP / max(1.0, max(alphas))
    return EXP_NORM_CAP


def build_inputs(spec: ClaimSpec, algebra, n, alphas, variant, rng):
    cap = element_cap(spec, variant, alphas)
    if spec.inputs == "positive":
        return [random_positive(algebra, rng, cap) for _ in range(n)], []
    xs = [random_element(algebra, rng, cap) for _ in range(n)]
    ys = [random_element(algebra, rng, cap) for _ in range(n)] if spec.inputs == "pair" else []
    return xs, ys


def _hex(vals):
    return [float(v).hex() for v in vals]


def run_trial(spec: ClaimSpec, variant, n: int, seed_hex: str, config: TrialConfig,
              index: int = 0) -> list[InequalityReport]:
    srng, erng = generators(seed_hex)
    algebra = random_algebra(srng, config.dims, config.blocks, config.weight_range)
    w = random_weights(n, spec.weights, srng) if spec.weights is not None else None
    return _execute(spec, variant, n, seed_hex, algebra, w, erng, _tolerance(variant, config), index,
                    config.reading)


def _execute(spec, variant, n, seed_hex, algebra, w, erng, tol, index, reading=None):
    alphas = None if w is None else list(w.alphas)
    xs, ys = build_inputs(spec, algebra, n, alphas, variant, erng)
    context = {
        "seed": seed_hex,
        "trial": index,
        "dims": list(algebra.dims),
        "weights": list(algebra.weights),
        "weights_hex": _hex(algebra.weights),
        "n": n,
        "alphas": alphas,
        "alphas_hex": None if w is None else _hex(w.alphas),
        "weight_mode": None if w is None else w.mode.value,
        "function": variant.id if isinstance(variant, ScalarFunction) else None,
        "p": variant if isinstance(variant, float) else None,
    }
    if reading is not None:
        context["reading_override"] = reading
    out = []
    for r in spec.run(xs, ys, w, variant, tol, reading=reading):
        ctx = dict(r.context)
        ctx.update(context)
        out.append(ineq.with_context(r, **ctx))
    return out


def replay(report: InequalityReport) -> list[InequalityReport]:
    """Rebuild a trial from a report's stored context and rerun the checker."""
    spec = get_claim(report.claim_id)
    context = report.context
    algebra = make_algebra([(d, float.fromhex(h)) for d, h in zip(context["dims"], context["weights_hex"])])
    w = None
    if context.get("alphas_hex") is not None:
        w = WeightVector(tuple(float.fromhex(h) for h in context["alphas_hex"]),
                         ConstraintMode(context["weight_mode"]))
    if context.get("function") is not None:
        variant = parse_function(context["function"])
    else:
        variant = context.get("p")
    _, erng = generators(context["seed"])
    return _execute(spec, variant, context["n"], context["seed"], algebra, w, erng, report.tolerance,
                    context.get("trial", 0), context.get("reading_override"))


# ---------------------------------------------------------------------------
# campaigns
# ---------------------------------------------------------------------------

@dataclass
class Summary:
    total: int = 0
    passed: int = 0
    violations: int = 0
    degenerate: int = 0
    min_margin: float | None = None
    worst: dict | None = None

    def add(self, r: InequalityReport):
        self.total += 1
        if r.verdict == PASS:
            self.passed += 1
        elif r.verdict == VIOLATION:
            self.violations += 1
        else:
            self.degenerate += 1
        if math.isfinite(r.margin) and (self.min_margin is None or r.margin < self.min_margin):
            self.min_margin = r.margin
            self.worst = {"verdict": r.verdict, "sides": [list(s) for s in r.sides],
                          "context": dict(r.context)}

    @property
    def ok(self) -> bool:
        return self.violations == 0 and self.degenerate == 0

    def as_dict(self) -> dict:
        return {"total": self.total, "pass": self.passed, "violation": self.violations,
                "degenerate": self.degenerate, "min_margin": self.min_margin, "worst": self.worst}


@dataclass
class CampaignResult:
    reports: list[InequalityReport] = field(default_factory=list)
    summaries: dict[str, Summary] = field(default_factory=dict)
    config_summaries: dict[str, Summary] = field(default_factory=dict)

    def ok(self, claims: Sequence[str] | None = None) -> bool:
        claims = self.summaries.keys() if claims is None else claims
        return all(self.summaries[c].ok for c in claims)


def _threads(config: TrialConfig) -> int:
    if config.threads is not None:
        return max(1, config.threads)
    try:
        return max(1, int(os.environ.get("TRACELAB_THREADS", "1")))
    except ValueError:
        return 1


def plan(config: TrialConfig, claims: Sequence[str]) -> list[tuple]:
    """Every trial of a campaign as ``(claim, variant, n, index, seed)``, in report order."""
    jobs = []
    for claim in claims:
        spec = get_claim(claim)
        for variant in _variants(spec, config):
            label = _variant_label(variant)
            for n in _tuple_sizes(spec, config):
                for i in range(config.trials):
                    jobs.append((claim, variant, n, i, trial_seed(config.master_seed, claim, label, n, i)))
    seeds = [j[4] for j in jobs]
    if len(set(seeds)) != len(seeds):
        raise RuntimeError("per-trial seed collision")
    return jobs


def run_campaign(config: TrialConfig, claims: Sequence[str]) -> CampaignResult:
    claims = list(claims)
    jobs = plan(config, claims)

    def work(job):
        claim, variant, n, i, seed = job
        return run_trial(CLAIMS[claim], variant, n, seed, config, i)

    threads = _threads(config)
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            batches = list(pool.map(work, jobs, chunksize=1))
    else:
        batches = [work(j) for j in jobs]

    result = CampaignResult()
    for c in claims:
        result.summaries[c] = Summary()
    for job, batch in zip(jobs, batches):
        claim, variant, n = job[0], job[1], job[2]
        key = f"{claim}|{_variant_label(variant)}|n={n}"
        cs = result.config_summaries.setdefault(key, Summary())
        for r in batch:
            result.reports.append(r)
            result.summaries[claim].add(r)
            cs.add(r)
    return result


# ---------------------------------------------------------------------------
# sensitivity self-test
# ---------------------------------------------------------------------------

@dataclass
class SelfTestResult:
    claim: str
    status: str  # "Detected" | "Missed" | "NotApplicable"
    directional_trials: int
    first_violation: dict | None = None


def mutation_selftest(claim: str, config: TrialConfig, budget: int = 100) -> SelfTestResult:
    """Invert every relation of the claim and require a Violation within ``budget`` trials.

    Trials whose chain is an equality (p = 2, psi linear) carry no direction
    and are skipped; a claim with no directional trial at all is NotApplicable.
    """
    spec = get_claim(claim)
    seen = 0
    for variant in _variants(spec, config):
        label = _variant_label(variant)
        for n in _tuple_sizes(spec, config):
            for i in range(budget):
                seed = trial_seed(config.master_seed, f"selftest:{claim}", label, n, i)
                reports = run_trial(spec, variant, n, seed, config, i)
                directional = [r for r in reports if r.has_direction and r.verdict != DEGENERATE]
                if not directional:
                    break
                seen += 1
                for r in directional:
                    f = r.flipped()
                    if f.verdict == VIOLATION:
                        return SelfTestResult(claim, "Detected", seen, {
                            "sides": [list(s) for s in f.sides], "relations": list(f.relations),
                            "context": f.context})
                if seen >= budget:
                    return SelfTestResult(claim, "Missed", seen)
    return SelfTestResult(claim, "NotApplicable" if seen == 0 else "Missed", seen)


# ---------------------------------------------------------------------------
# identity campaigns
# ---------------------------------------------------------------------------

@dataclass
class IdentityTrial:
    identity: str
    residual: float
    scale: float
    context: dict

    @property
    def relative(self) -> float:
        return self.residual / self.scale


def _identity_inputs(identity, seed_hex, n, config, alphas=None):
    srng, erng = generators(seed_hex)
    algebra = random_algebra(srng, config.dims, config.blocks, config.weight_range)
    if identity not in _IDENTITY_MODES:
        raise UnknownClaimId(f"unknown identity {identity!r}")
    mode = _IDENTITY_MODES[identity]
    w = None
    if mode is not None:
        w = WeightVector(tuple(alphas), mode) if alphas is not None else random_weights(n, mode, srng)
    xs = [random_element(algebra, erng) for _ in range(n)]
    ys = [random_element(algebra, erng) for _ in range(n)] if identity == "mo1" else []
    return algebra, w, xs, ys


_IDENTITY_MODES = {"id1": _SUM1, "ibk": None, "mo1": ConstraintMode.NONE, "mo2": _INV1}
_IDENTITY_SIDES = {
    "id1": lambda xs, ys, w: id1_sides(xs, w),
    "ibk": lambda xs, ys, w: ibk_sides(xs),
    "mo1": lambda xs, ys, w: mo1_sides(xs, ys, w),
    "mo2": lambda xs, ys, w: mo2_sides(xs, w),
}
_IDENTITY_RESIDUALS = {
    "id1": lambda xs, ys, w: residual_id1(xs, w),
    "ibk": lambda xs, ys, w: residual_ibk(xs),
    "mo1": lambda xs, ys, w: residual_mo1(xs, ys, w),
    "mo2": lambda xs, ys, w: residual_mo2(xs, w),
}


def identity_trial(identity: str, seed_hex: str, n: int, config: TrialConfig,
                   alphas: Sequence[float] | None = None, index: int = 0) -> IdentityTrial:
    algebra, w, xs, ys = _identity_inputs(identity, seed_hex, n, config, alphas)
    res = _IDENTITY_RESIDUALS[identity](xs, ys, w)
    ctx = {"seed": seed_hex, "trial": index, "dims": list(algebra.dims),
           "weights": list(algebra.weights), "n": n,
           "alphas": None if w is None else list(w.alphas)}
    return IdentityTrial(identity, res, residual_scale(xs, ys, w), ctx)


def mutated_identity_trial(identity: str, seed_hex: str, n: int, config: TrialConfig,
                           eps: float = 1e-3, index: int = 0) -> IdentityTrial:
    """Residual ``||LHS(x') - RHS(x)||`` where ``x'`` shifts one entry by ``eps``.

    The shifted entry is the largest-modulus entry of the element carrying the
    largest weight, so the perturbation is never hidden by a tiny coefficient.
    Mutating both sides would leave an identity intact; a sound residual must
    see the one-sided change.
    """
    algebra, w, xs, ys = _identity_inputs(identity, seed_hex, n, config)
    j = 0 if w is None else int(np.argmax(w.array))
    blocks = [b.copy() for b in xs[j].blocks]
    b = int(np.argmax([np.abs(a).max() for a in blocks]))
    r, c = np.unravel_index(int(np.argmax(np.abs(blocks[b]))), blocks[b].shape)
    blocks[b][r, c] += eps
    mutated = list(xs)
    mutated[j] = AlgebraElement(algebra, blocks)
    sides = _IDENTITY_SIDES[identity]
    lhs = sides(mutated, ys, w)[0]
    rhs = sides(xs, ys, w)[1]
    ctx = {"seed": seed_hex, "trial": index, "n": n, "mutated": [j, b, int(r), int(c)], "eps": eps}
    return IdentityTrial(identity, operator_norm(lhs - rhs), residual_scale(xs, ys, w), ctx)


def run_identity_campaign(identity: str, config: TrialConfig,
                          alphas: Sequence[float] | None = None) -> list[IdentityTrial]:
    sizes = config.tuple_sizes or DEFAULT_TUPLE_SIZES
    if alphas is not None:
        sizes = [len(alphas)]
    out = []
    for n in sizes:
        for i in range(config.trials):
            seed = trial_seed(config.master_seed, f"identity:{identity}", "-", n, i)
            out.append(identity_trial(identity, seed, n, config, alphas, i))
    return out


# ---------------------------------------------------------------------------
# counterexample search
# ---------------------------------------------------------------------------

def _element_payload(x: AlgebraElement) -> dict:
    return {
        "blocks": [[[[float(z.real), float(z.imag)] for z in row] for row in b] for b in x.blocks],
        "blocks_hex": [[[[float(z.real).hex(), float(z.imag).hex()] for z in row] for row in b]
                       for b in x.blocks],
    }


@dataclass
class Counterexample:
    claim: str
    dim: int
    n: int
    trials_used: int
    instance: dict

    def as_dict(self) -> dict:
        return {"claim": self.claim, "dim": self.dim, "n": self.n, "trials_used": self.trials_used,
                **self.instance}


IDENTITY_TOL = 1e-10


def search_counterexample(claim: str, budget: int, config: TrialConfig,
                          max_dim: int = 4, max_n: int = 5) -> tuple[Counterexample | None, int]:
    """Scan single-block algebras by increasing dimension, then tuple size (from 2).

    For each ``(dim, n)`` level and each configured variant, ``budget`` seeded
    trials are drawn; the first violating instance is returned with its exact
    inputs, so the result is minimal in (dimension, n) order.  Identity ids
    count a residual above ``IDENTITY_TOL * scale`` as a violation.
    """
    if budget <= 0:
        raise ValueError("search budget must be positive")
    is_identity = claim in ("id1", "ibk", "mo1", "mo2")
    spec = None if is_identity else get_claim(claim)
    variants = [None] if is_identity else _variants(spec, config)
    used = 0
    for dim in range(1, max_dim + 1):
        algebra = make_algebra([(dim, 1.0)])
        sizes = [spec.fixed_n] if spec is not None and spec.fixed_n else range(2, max_n + 1)
        for n in sizes:
            for variant in variants:
                label = _variant_label(variant)
                for i in range(budget):
                    used += 1
                    seed = trial_seed(config.master_seed, f"search:{claim}", f"{label}|d={dim}", n, i)
                    srng, erng = generators(seed)
                    if is_identity:
                        found = _identity_instance(claim, algebra, n, srng, erng, seed)
                    else:
                        found = _claim_instance(spec, variant, algebra, n, srng, erng, seed, config)
                    if found is not None:
                        return Counterexample(claim, dim, n, used, found), used
    return None, used


def _claim_instance(spec, variant, algebra, n, srng, erng, seed, config):
    w = random_weights(n, spec.weights, srng) if spec.weights is not None else None
    alphas = None if w is None else list(w.alphas)
    xs, ys = build_inputs(spec, algebra, n, alphas, variant, erng)
    reports = spec.run(xs, ys, w, variant, _tolerance(variant, config), reading=config.reading)
    bad = [r for r in reports if r.verdict != PASS]
    if not bad:
        return None
    r = bad[0]
    return {
        "seed": seed,
        "function": variant.id if isinstance(variant, ScalarFunction) else None,
        "p": variant if isinstance(variant, float) else None,
        "reading": r.context.get("reading"),
        "step": r.context.get("step"),
        "alphas": alphas,
        "alphas_hex": None if w is None else _hex(w.alphas),
        "xs": [_element_payload(x) for x in xs],
        "ys": [_element_payload(y) for y in ys],
        "verdict": r.verdict,
        "sides": [[lbl, v] for lbl, v in r.sides],
        "relations": list(r.relations),
        "margin": r.margin,
    }


def _identity_instance(identity, algebra, n, srng, erng, seed):
    mode = _IDENTITY_MODES[identity]
    w = random_weights(n, mode, srng) if mode is not None else None
    xs = [random_element(algebra, erng) for _ in range(n)]
    ys = [random_element(algebra, erng) for _ in range(n)] if identity == "mo1" else []
    res = _IDENTITY_RESIDUALS[identity](xs, ys, w)
    scale = residual_scale(xs, ys, w)
    if res <= IDENTITY_TOL * scale:
        return None
    return {"seed": seed, "alphas": None if w is None else list(w.alphas),
            "xs": [_element_payload(x) for x in xs], "ys": [_element_payload(y) for y in ys],
            "residual": res, "scale": scale}
