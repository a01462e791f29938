"""Acceptance suite: one test per primary criterion, each printing a PASS/FAIL line.

Desk scale throughout: block dimensions up to 8, up to 3 blocks, n up to 5.
"""
import filecmp
import math

import numpy as np
import pytest

from tracelab.algebra import operator_norm
from tracelab.cli import main
from tracelab.functions import parse_function
from tracelab.harness import (
    CLAIM_IDS,
    TrialConfig,
    generators,
    identity_trial,
    mutated_identity_trial,
    mutation_selftest,
    random_algebra,
    random_element,
    random_positive,
    random_unitary_contraction,
    run_campaign,
    search_counterexample,
    trial_seed,
)
from tracelab.identities import ConstraintMode, WeightVector
from tracelab.inequalities import PASS, VIOLATION, check_roots_refinement, check_schatten_refinement, \
    check_tl1, check_pnorm_parallelogram, check_tl_literal, check_tl_proof_chain
from tracelab.algebra import make_algebra
from tracelab.functions import power
from tracelab.spectral import apply_scalar_function, singular_values, trace_function_mu, trace_function_spectral

DESK = dict(dims=(1, 8), blocks=3)
SIZES = (2, 3, 4, 5)
CATALOG = ["power:0.5", "power:1", "power:1.5", "power:2", "power:3", "power:4",
           "expsq", "log1p", "id", "expm1", "log1psqrt"]


def record(capsys, name, ok, detail):
    with capsys.disabled():
        print(f"\nACCEPTANCE {'PASS' if ok else 'FAIL'} | {name} | {detail}")
    assert ok, f"{name}: {detail}"


def campaign(claim, trials, **kw):
    cfg = TrialConfig(master_seed=2024, trials=trials, **{**DESK, **kw})
    return run_campaign(cfg, [claim])


def counts(result, claim):
    s = result.summaries[claim]
    return s, f"{s.total} trials, {s.violations} violations, {s.degenerate} degenerate"


def scalar_elems(*values):
    alg = make_algebra([(1, 1.0)])
    return [alg.element([np.array([[v]], dtype=complex)]) for v in values]


# ---------------------------------------------------------------------------

def test_identities_residuals_and_mutation(capsys):
    cfg = TrialConfig(master_seed=2024, **DESK)
    worst, weakest, total = 0.0, math.inf, 0
    for identity in ("id1", "ibk", "mo1", "mo2"):
        for n in (1, 2, 3, 4, 5):
            for i in range(200):
                seed = trial_seed(cfg.master_seed, f"accept:{identity}", "-", n, i)
                t = identity_trial(identity, seed, n, cfg, index=i)
                worst = max(worst, t.relative)
                total += 1
                # an n = 1 instance of MO1/MO2 has an input-free left side (0 = 0)
                if n >= 2 or identity in ("id1", "ibk"):
                    m = mutated_identity_trial(identity, seed, n, cfg, 1e-3, i)
                    weakest = min(weakest, m.relative)
    ok = worst <= 1e-10 and weakest > 1e-8
    record(capsys, "identities ID1/IBK/MO1/MO2", ok,
           f"{total} trials, max residual/scale {worst:.2e} (<= 1e-10), "
           f"min mutated residual/scale {weakest:.2e} (> 1e-8)")


def test_two_path_trace_agreement(capsys):
    worst = 0.0
    for i in range(1000):
        srng, erng = generators(trial_seed(2024, "accept:eq", "-", 1, i))
        alg = random_algebra(srng, **DESK)
        x = random_element(alg, erng)
        f = parse_function(CATALOG[i % len(CATALOG)])
        a, b = trace_function_spectral(f, x), trace_function_mu(f, x)
        worst = max(worst, abs(a - b) / (1 + abs(a)))
    record(capsys, "two-path trace agreement", worst <= 1e-10,
           f"1000 (f, x) pairs over {len(CATALOG)} catalog functions, max |diff|/(1+value) {worst:.2e}")


def test_mu_properties(capsys):
    f_err = contraction_excess = unitary_err = 0.0
    for i in range(300):
        srng, erng = generators(trial_seed(2024, "accept:mu", "-", 1, i))
        alg = random_algebra(srng, **DESK)
        p = random_positive(alg, erng, cap=3.0)
        mu_p = singular_values(p)
        ts = np.r_[mu_p.boundaries, mu_p.boundaries + 0.5 * mu_p.lengths]
        for fid in CATALOG:
            f = parse_function(fid)
            got = singular_values(apply_scalar_function(f, p))(ts)
            want = f(mu_p(ts))
            f_err = max(f_err, float(np.max(np.abs(got - want) / np.maximum(1.0, np.abs(want)))))
        x = random_element(alg, erng)
        mu = singular_values(x)
        ts = np.r_[mu.boundaries, mu.boundaries + 0.5 * mu.lengths]
        u = random_unitary_contraction(alg, erng, "contraction")
        v = random_unitary_contraction(alg, erng, "contraction")
        contraction_excess = max(contraction_excess, float(np.max(singular_values(u @ x @ v)(ts) - mu(ts))))
        u = random_unitary_contraction(alg, erng)
        v = random_unitary_contraction(alg, erng)
        unitary_err = max(unitary_err, float(np.max(np.abs(singular_values(u @ x @ v)(ts) - mu(ts)))))
    ok = f_err <= 1e-10 and contraction_excess <= 1e-10 and unitary_err <= 1e-10
    record(capsys, "mu properties", ok,
           f"300 trials: mu(f(x)) vs f(mu(x)) {f_err:.2e}; contraction excess {contraction_excess:.2e}; "
           f"unitary stepwise diff {unitary_err:.2e}")


@pytest.mark.parametrize("claim", ["fk1", "fk2", "fk3", "fk4"])
def test_jensen_type_inequalities(claim, capsys):
    # 250 trials per (function, n): 1000 per function
    result = campaign(claim, 250, tuple_sizes=SIZES)
    s, detail = counts(result, claim)
    record(capsys, f"{claim} (positive tuples)", s.ok, detail)


@pytest.mark.parametrize("claim, functions", [
    ("mt1", ("power:4", "power:3", "expsq")),
    ("mt2", ("power:1", "power:1.5", "log1p")),
])
def test_weighted_clarkson(claim, functions, capsys):
    result = campaign(claim, 1000, tuple_sizes=SIZES, functions=functions)
    s, detail = counts(result, claim)
    per_config = all(c.total == 1000 and c.ok for c in result.config_summaries.values())
    record(capsys, f"{claim} per (function, n)", s.ok and per_config,
           f"{detail} over {len(result.config_summaries)} configurations")


def test_weighted_clarkson_square_is_equality(capsys):
    result = campaign("mt1", 250, tuple_sizes=SIZES, functions=("power:2",))
    spread = max(r.spread() for r in result.reports)
    s, detail = counts(result, "mt1")
    record(capsys, "mt1 at phi = t^2 collapses to equality", s.ok and spread <= 1e-10,
           f"{detail}, max side spread/scale {spread:.2e}")


@pytest.mark.parametrize("claim, trials", [("clarkson-p", 1000), ("clarkson-n", 250),
                                           ("cor2.3", 250), ("cor2.3u", 250)])
def test_clarkson_chains(claim, trials, capsys):
    result = campaign(claim, trials, tuple_sizes=SIZES, p_values=(0.5, 1.0, 1.5, 3.0, 4.0))
    s, detail = counts(result, claim)
    eq = campaign(claim, trials, tuple_sizes=SIZES, p_values=(2.0,))
    spread = max(r.spread() for r in eq.reports)
    record(capsys, f"{claim} p-grid and p = 2 equality", s.ok and eq.summaries[claim].ok and spread <= 1e-10,
           f"{detail}; p = 2: {eq.summaries[claim].total} trials, max spread/scale {spread:.2e}")


@pytest.mark.parametrize("claim, kw", [
    ("tr1", dict(functions=("power:4", "power:3", "expsq"))),
    ("tr2", dict(functions=("power:1", "power:1.5", "log1p"))),
    ("cor3.3", dict(p_values=(0.5, 1.0, 1.5, 3.0, 4.0))),
    ("cor3.5", dict(functions=("log1p",))),
])
def test_roots_of_unity_refinements(claim, kw, capsys):
    result = campaign(claim, 1000, tuple_sizes=SIZES, **kw)
    s, detail = counts(result, claim)
    per_config = all(c.total == 1000 and c.ok for c in result.config_summaries.values())
    record(capsys, f"{claim} per configuration, n in 2..5", s.ok and per_config,
           f"{detail} over {len(result.config_summaries)} configurations")


def test_roots_refinement_scalar_instance(capsys):
    xs = scalar_elems(1, 2)
    sides = [check_roots_refinement(power(4), xs).values, check_schatten_refinement(xs, 4).values]
    err = max(abs(a - b) for vals in sides for a, b in zip(vals, (20.5, 25.0, 41.0)))
    record(capsys, "roots refinement scalar instance (1, 2), p = 4", err <= 1e-12,
           f"sides {sides[0]}, max error {err:.1e}")


@pytest.mark.parametrize("claim", ["tl1", "cor4.3"])
def test_weighted_parallelogram(claim, capsys):
    # 250 trials per (variant, n): 1000 per variant
    result = campaign(claim, 250, tuple_sizes=SIZES)
    s, detail = counts(result, claim)
    record(capsys, f"{claim}", s.ok, detail)


def test_weighted_parallelogram_scalar_instance(capsys):
    w = WeightVector((2.0, 2.0), ConstraintMode.SUM_INVERSE_ONE)
    xs = scalar_elems(1, 2)
    a = check_tl1(xs, w, power(4))
    b = check_pnorm_parallelogram(xs, w, 4.0)
    err = max(abs(v - e) for r in (a, b) for v, e in zip(r.values, (136.0, 82.0)))
    record(capsys, "weighted parallelogram scalar instance", err <= 1e-12 and a.passed and b.passed,
           f"sides {a.values}, max error {err:.1e}")


def test_literal_weighted_parallelogram_probe(capsys):
    code = main(["counterexample", "--claim", "tl-literal", "--reading", "concave", "--budget", "200"])
    capsys.readouterr()
    found, _ = search_counterexample("tl-literal", 200, TrialConfig(reading="concave"))
    x, y = scalar_elems(1, 2), scalar_elems(0, 0)
    w = WeightVector((4.0, 4.0), ConstraintMode.SUM_INV_SQRT_PAIRS_ONE)
    literal = check_tl_literal(x, y, w, power(2), "concave")
    chain = {r.context["step"]: r for r in check_tl_proof_chain(x, y, w, power(2), "convex")}
    campaign_chain = campaign("tl-chain", 100, tuple_sizes=SIZES, dims=(1, 4))
    bad_steps = {r.context["step"] for r in campaign_chain.reports if r.verdict != PASS}
    ok = (code == 0 and found is not None and found.dim == 1
          and literal.verdict == VIOLATION and literal.values == [40.0, 10.0]
          and chain["fk1"].passed and chain["fk3"].passed and chain["mo1-substitution"].verdict == VIOLATION
          and bad_steps == {"mo1-substitution"})
    record(capsys, "literal weighted parallelogram probe", ok,
           f"search found dim {found.dim if found else None}, n {found.n if found else None} after "
           f"{found.trials_used if found else '-'} trials; alpha=(4,4) sides {literal.values}; "
           f"campaign failing steps {sorted(bad_steps)}")


def test_mutation_selftest_every_claim(capsys):
    statuses = {c: mutation_selftest(c, TrialConfig(master_seed=2024, **DESK), budget=100).status
                for c in CLAIM_IDS}
    missed = [c for c, s in statuses.items() if s != "Detected"]
    record(capsys, "mutation self-test", not missed,
           f"{len(statuses) - len(missed)}/{len(statuses)} claims detected" + (f"; missed {missed}" if missed else ""))


def test_reproducibility_and_exit_codes(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    codes = [main(["verify", "--claim", "all", "--trials", "200", "--seed", "7", "--out", str(p)]) for p in (a, b)]
    same = filecmp.cmp(a, b, shallow=False)
    usage = main(["verify", "--claim", "nosuch"])
    probe = main(["verify", "--claim", "tl-literal", "--functions", "power:1.5", "--trials", "20",
                  "--out", str(tmp_path / "tl.json")])
    capsys.readouterr()
    ok = same and codes == [0, 0] and usage == 2 and probe == 1
    record(capsys, "reproducibility and exit codes", ok,
           f"byte-identical reports: {same} ({a.stat().st_size} bytes); exit codes all={codes}, "
           f"unknown claim={usage}, probe={probe}")
