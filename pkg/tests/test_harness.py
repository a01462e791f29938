import json

import numpy as np
import pytest

from tracelab.algebra import make_algebra, operator_norm, trace
from tracelab.errors import NonpositiveP, UnknownClaimId, WrongConvexityClass
from tracelab.harness import (
    CLAIM_IDS,
    PROBE_IDS,
    TrialConfig,
    generators,
    get_claim,
    mutation_selftest,
    plan,
    random_element,
    random_positive,
    random_unitary_contraction,
    replay,
    resolve_claims,
    run_campaign,
    run_identity_campaign,
    search_counterexample,
    trial_seed,
)
from tracelab.inequalities import PASS, VIOLATION
from tracelab.reporting import dumps, report_from_dict, report_to_dict, reports_to_csv
from tracelab.spectral import abs_op, singular_values

SMALL = TrialConfig(trials=3, tuple_sizes=(2, 3))


def test_seed_derivation():
    s = trial_seed(7, "mt1", "power:4", 2, 0)
    assert s == trial_seed(7, "mt1", "power:4", 2, 0)
    assert len({s, trial_seed(7, "mt1", "power:4", 2, 1), trial_seed(8, "mt1", "power:4", 2, 0),
                trial_seed(7, "mt2", "power:4", 2, 0)}) == 4
    a1, b1 = generators(s)
    a2, b2 = generators(s)
    assert np.array_equal(a1.random(4), a2.random(4)) and np.array_equal(b1.random(4), b2.random(4))


def test_random_element_determinism_and_mean():
    alg = make_algebra([(3, 1.0), (2, 0.5)])
    x = random_element(alg, np.random.default_rng(42))
    y = random_element(alg, np.random.default_rng(42))
    assert all(np.array_equal(a, b) for a, b in zip(x.blocks, y.blocks))
    rng = np.random.default_rng(0)
    tr = np.array([trace(random_element(alg, rng)) for _ in range(10_000)])
    for part in (tr.real, tr.imag):
        assert abs(part.mean()) <= 5 * part.std() / np.sqrt(part.size)


def test_random_positive_and_unitaries():
    alg = make_algebra([(4, 1.0), (1, 2.0)])
    rng = np.random.default_rng(1)
    for _ in range(20):
        p = random_positive(alg, rng)
        assert abs_op(p).allclose(p, 1e-10 * max(1.0, operator_norm(p)))
        assert trace(p).real >= 0
        u = random_unitary_contraction(alg, rng)
        assert (u.H @ u).allclose(alg.identity(), 1e-12)
        assert np.allclose(singular_values(u).values, [1.0])
        c = random_unitary_contraction(alg, rng, "contraction")
        assert operator_norm(c) <= 1 + 1e-12
    with pytest.raises(ValueError):
        random_unitary_contraction(alg, rng, "bogus")


def test_claim_registry():
    assert set(PROBE_IDS) == {"cor3.4-literal", "tl-literal", "tl-chain"}
    assert "tl-literal" not in resolve_claims(["all"])
    assert "tl-literal" in resolve_claims(["all"], include_probes=True)
    assert resolve_claims(["mt1", "mt1", "fk1"]) == ["mt1", "fk1"]
    with pytest.raises(UnknownClaimId):
        get_claim("nosuch")
    with pytest.raises(UnknownClaimId):
        resolve_claims(["nosuch"])


def test_config_validation():
    for bad in (dict(trials=-1), dict(dims=(3, 1)), dict(blocks=0), dict(tuple_sizes=(0,)),
                dict(weight_range=(0, 1)), dict(reading="sideways")):
        with pytest.raises(ValueError):
            TrialConfig(**bad)
    with pytest.raises(WrongConvexityClass):
        run_campaign(TrialConfig(trials=1, functions=("power:1",)), ["mt1"])
    with pytest.raises(WrongConvexityClass):
        run_campaign(TrialConfig(trials=1, functions=("expm1",)), ["tr1"])
    with pytest.raises(NonpositiveP):
        run_campaign(TrialConfig(trials=1, p_values=(0.0,)), ["cor3.3"])


def test_zero_trials():
    result = run_campaign(TrialConfig(trials=0), ["mt1"])
    assert result.reports == [] and result.summaries["mt1"].as_dict()["total"] == 0


def test_campaign_determinism_and_threads():
    a = run_campaign(SMALL, ["mt1", "cor4.3"])
    b = run_campaign(TrialConfig(trials=3, tuple_sizes=(2, 3), threads=3), ["mt1", "cor4.3"])
    dump = lambda r: dumps([report_to_dict(x) for x in r.reports])
    assert dump(a) == dump(b)
    assert a.ok() and len(a.reports) == 3 * 2 * (4 + 6)
    assert set(a.config_summaries) >= {"mt1|power:4|n=2", "cor4.3|p=4.0|n=3"}


def test_plan_seeds_distinct():
    jobs = plan(TrialConfig(trials=20), list(CLAIM_IDS))
    assert len({j[4] for j in jobs}) == len(jobs)


def test_every_claim_runs():
    result = run_campaign(TrialConfig(trials=2, tuple_sizes=(2,)), list(CLAIM_IDS))
    for claim in CLAIM_IDS:
        s = result.summaries[claim]
        assert s.total > 0 and s.degenerate == 0
        if claim not in PROBE_IDS:
            assert s.ok, claim


def test_replay_is_exact():
    result = run_campaign(TrialConfig(trials=2, tuple_sizes=(3,), reading="concave"), ["tl1", "tl-literal"])
    for r in result.reports:
        again = [x for x in replay(r) if x.context.get("step") == r.context.get("step")][0]
        assert again.sides == r.sides and again.verdict == r.verdict


def test_report_round_trip():
    result = run_campaign(SMALL, ["tr1", "cor3.3"])
    for r in result.reports:
        d = json.loads(dumps(report_to_dict(r)))
        back = report_from_dict(d)
        assert back.sides == r.sides and back.margin == r.margin and back.tolerance == r.tolerance
        assert back.context == r.context
    rows = reports_to_csv(result.reports).splitlines()
    assert rows[0].startswith("claim,verdict,margin") and len(rows) == len(result.reports) + 1


def test_tl_literal_instance_is_reproduced_from_context():
    result = run_campaign(TrialConfig(trials=30, functions=("power:1.5",), tuple_sizes=(2,)), ["tl-literal"])
    bad = [r for r in result.reports if r.verdict == VIOLATION]
    assert bad
    assert replay(bad[0])[0].sides == bad[0].sides


def test_mutation_selftest_examples():
    cfg = TrialConfig(trials=1, functions=("power:4",))
    assert mutation_selftest("mt1", cfg).status == "Detected"
    assert mutation_selftest("clarkson-p", TrialConfig(p_values=(4.0,))).status == "Detected"
    assert mutation_selftest("cor3.3", TrialConfig(p_values=(2.0,))).status == "NotApplicable"


def test_identity_campaign():
    trials = run_identity_campaign("ibk", TrialConfig(trials=5))
    assert len(trials) == 20 and all(t.residual <= 1e-10 * t.scale for t in trials)
    fixed = run_identity_campaign("mo2", TrialConfig(trials=3), alphas=(2.0, 2.0))
    assert all(t.context["alphas"] == [2.0, 2.0] for t in fixed)
    with pytest.raises(UnknownClaimId):
        run_identity_campaign("nope", TrialConfig(trials=1))


def test_counterexample_search():
    found, used = search_counterexample("tl-literal", 50, TrialConfig(functions=("power:2",), reading="concave"))
    assert found is not None and found.dim == 1 and found.n == 2 and used == found.trials_used
    assert found.instance["verdict"] == VIOLATION
    none, used = search_counterexample("id1", 5, TrialConfig(), max_dim=2, max_n=3)
    assert none is None and used == 5 * 2 * 2
    none, _ = search_counterexample("fk1", 3, TrialConfig(functions=("power:2",)), max_dim=2, max_n=2)
    assert none is None
    with pytest.raises(ValueError):
        search_counterexample("fk1", 0, TrialConfig())
