import math

import numpy as np
import pytest

from tracelab.errors import DomainOverflow, NonpositiveP, UnknownFunctionId
from tracelab.functions import (
    EXPSQ,
    LOG1P,
    Convexity,
    ScalarFunction,
    classify_f,
    classify_psi,
    parse_function,
    power,
    sampled_convexity,
)

C = Convexity
TABLE = {
    "power:0.5": (C.CONCAVE, C.CONCAVE),
    "power:1": (C.BOTH, C.CONCAVE),
    "power:1.5": (C.CONVEX, C.CONCAVE),
    "power:2": (C.CONVEX, C.BOTH),
    "power:3": (C.CONVEX, C.CONVEX),
    "power:4": (C.CONVEX, C.CONVEX),
    "expsq": (C.CONVEX, C.CONVEX),
    "log1p": (C.CONCAVE, C.CONCAVE),
    "id": (C.BOTH, C.CONCAVE),
    "expm1": (C.CONVEX, C.NEITHER),
    "log1psqrt": (C.CONCAVE, C.CONCAVE),
}
GRID = np.geomspace(1e-4, 4.0, 300)


def test_eval_examples():
    assert power(2)(3.0) == 9
    assert EXPSQ(0.0) == 0
    assert LOG1P(math.e - 1) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("fid, classes", TABLE.items())
def test_classification_table(fid, classes):
    f = parse_function(fid)
    assert (classify_f(f), classify_psi(f)) == classes


@pytest.mark.parametrize("fid", TABLE)
def test_catalog_invariants(fid):
    f = parse_function(fid)
    assert f(0.0) == 0
    vals = f(GRID)
    assert np.all(np.diff(vals) > 0)
    assert np.allclose(f.psi(GRID ** 2), vals, rtol=1e-13, atol=0)
    assert parse_function(f.id) == f


def test_ids_round_trip():
    assert power(4).id == "power:4"
    assert power(0.5).id == "power:0.5"
    assert str(EXPSQ) == "expsq"


@pytest.mark.parametrize("bad", ["nosuch", "power:x", "power", "exp"])
def test_parse_rejects(bad):
    with pytest.raises(UnknownFunctionId):
        parse_function(bad)


@pytest.mark.parametrize("p", [0, -1, float("inf"), float("nan")])
def test_power_needs_positive_exponent(p):
    with pytest.raises(NonpositiveP):
        power(p)


def test_domain_checks():
    with pytest.raises(DomainOverflow):
        EXPSQ(25.0)
    with pytest.raises(DomainOverflow):
        ScalarFunction("expm1")(1e3)
    with pytest.raises(ValueError):
        power(2)(-1.0)
    with pytest.raises(ValueError):
        ScalarFunction("log1p", 2.0)


def test_sampled_convexity():
    assert sampled_convexity(np.square) is C.CONVEX
    assert sampled_convexity(np.sqrt) is C.CONCAVE
    assert sampled_convexity(lambda t: 3 * t) is C.BOTH
    assert sampled_convexity(np.sin) is C.NEITHER


def test_admits():
    assert C.BOTH.admits(C.CONVEX) and C.BOTH.admits(C.CONCAVE)
    assert C.CONVEX.admits(C.CONVEX) and not C.CONVEX.admits(C.CONCAVE)
    assert not C.NEITHER.admits(C.CONVEX)
