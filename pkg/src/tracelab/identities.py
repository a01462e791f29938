"""Operator identities behind the Clarkson-type inequalities.

Each ``residual_*`` returns the operator norm of ``LHS - RHS`` for one of
four quadratic identities in ``|x|^2 = x* x``:

* ``id1``: |sum a_j x_j|^2 + sum_{j<k} a_j a_k |x_j - x_k|^2 = sum a_j |x_j|^2   (sum a = 1)
* ``ibk``: (1/n) sum_k |sum_j w_j^k x_j|^2 = sum_j |x_j|^2                    (w = n-th roots of 1)
* ``mo1``: sum_{i<j} |r_ij x_i - r_ji x_j|^2 + (same in y)
           = sum_{i,j} |r_ij x_i - r_ji y_j|^2 - |sum_i (x_i - y_i)|^2        (r_ij = sqrt(a_i/a_j))
* ``mo2``: sum_{i<j} |r_ij x_i - r_ji x_j|^2 = sum a_i |x_i|^2 - |sum x_i|^2  (sum 1/a = 1)

``mo1`` holds for any positive weights, so it is checked without a
constraint.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import AlgebraElement, gram, linear_combination, operator_norm, same_algebra
from .errors import WeightConstraintViolated

CONSTRAINT_TOL = 1e-12


class ConstraintMode(str, enum.Enum):
    SUM_ONE = "sum_one"
    SUM_INVERSE_ONE = "sum_inverse_one"
    SUM_INV_SQRT_PAIRS_ONE = "sum_inv_sqrt_pairs_one"
    NONE = "none"


def constraint_value(alphas: Sequence[float], mode: ConstraintMode) -> float:
    a = np.asarray(alphas, dtype=float)
    if mode is ConstraintMode.SUM_ONE:
        return float(math.fsum(a))
    if mode is ConstraintMode.SUM_INVERSE_ONE:
        return float(math.fsum(1.0 / a))
    if mode is ConstraintMode.SUM_INV_SQRT_PAIRS_ONE:
        return float(math.fsum((1.0 / np.sqrt(np.outer(a, a))).ravel()))
    return 1.0


@dataclass(frozen=True)
class WeightVector:
    alphas: tuple[float, ...]
    mode: ConstraintMode = ConstraintMode.NONE

    def __post_init__(self):
        alphas = tuple(float(a) for a in self.alphas)
        if len(alphas) == 0:
            raise ValueError("weight vector must be nonempty")
        if not all(math.isfinite(a) and a > 0 for a in alphas):
            raise WeightConstraintViolated(f"weights must be positive and finite: {alphas}")
        mode = ConstraintMode(self.mode)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "mode", mode)
        err = abs(constraint_value(alphas, mode) - 1.0)
        if err > CONSTRAINT_TOL:
            raise WeightConstraintViolated(
                f"{mode.value} violated by {err:.3e} for alphas {alphas}"
            )

    def __len__(self):
        return len(self.alphas)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.alphas)

    def require(self, *modes: ConstraintMode) -> "WeightVector":
        if self.mode not in modes:
            raise WeightConstraintViolated(
                f"weights declared {self.mode.value}, need one of {[m.value for m in modes]}"
            )
        return self


@dataclass(frozen=True)
class UnityRoots:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")

    @property
    def omegas(self) -> np.ndarray:
        return np.exp(2j * np.pi * np.arange(self.n) / self.n)

    def powers(self, k: int) -> np.ndarray:
        """omega_j^k for j = 0..n-1, reduced mod n for exactness of the angle."""
        j = np.arange(self.n)
        return np.exp(2j * np.pi * ((j * k) % self.n) / self.n)


# ---------------------------------------------------------------------------
# shared building blocks, reused by the inequality checkers
# ---------------------------------------------------------------------------

def weighted_mean(xs, alphas) -> AlgebraElement:
    return linear_combination(list(alphas), xs)


def root_mixes(xs: Sequence[AlgebraElement]) -> list[AlgebraElement]:
    """sum_j omega_j^k x_j for k = 0..n-1."""
    roots = UnityRoots(len(xs))
    return [linear_combination(roots.powers(k), xs) for k in range(len(xs))]


def ratio_difference(xi, xj, ai, aj) -> AlgebraElement:
    """sqrt(a_i/a_j) x_i - sqrt(a_j/a_i) x_j."""
    return math.sqrt(ai / aj) * xi - math.sqrt(aj / ai) * xj


def pairs(n: int):
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def _sum(elements: Sequence[AlgebraElement], alg) -> AlgebraElement:
    acc = alg.zero()
    for e in elements:
        acc = acc + e
    return acc


def _norm_sum(xs) -> float:
    return sum(operator_norm(x) for x in xs)


# ---------------------------------------------------------------------------
# residuals
# ---------------------------------------------------------------------------

def id1_sides(xs, w: WeightVector) -> tuple[AlgebraElement, AlgebraElement]:
    alg = same_algebra(xs)
    a = w.array
    if len(xs) != len(a):
        raise ValueError("need one weight per element")
    lhs = gram(weighted_mean(xs, a))
    lhs = lhs + _sum([a[j] * a[k] * gram(xs[j] - xs[k]) for j, k in pairs(len(xs))], alg)
    rhs = _sum([a[j] * gram(xs[j]) for j in range(len(xs))], alg)
    return lhs, rhs


def residual_id1(xs: Sequence[AlgebraElement], w: WeightVector) -> float:
    w.require(ConstraintMode.SUM_ONE)
    lhs, rhs = id1_sides(xs, w)
    return operator_norm(lhs - rhs)


def ibk_sides(xs) -> tuple[AlgebraElement, AlgebraElement]:
    alg = same_algebra(xs)
    n = len(xs)
    lhs = _sum([gram(m) for m in root_mixes(xs)], alg) / n
    rhs = _sum([gram(x) for x in xs], alg)
    return lhs, rhs


def residual_ibk(xs: Sequence[AlgebraElement]) -> float:
    lhs, rhs = ibk_sides(xs)
    return operator_norm(lhs - rhs)


def pair_part(xs, a) -> AlgebraElement:
    """sum_{i<j} |sqrt(a_i/a_j) x_i - sqrt(a_j/a_i) x_j|^2."""
    alg = same_algebra(xs)
    return _sum([gram(ratio_difference(xs[i], xs[j], a[i], a[j])) for i, j in pairs(len(xs))], alg)


def mo1_sides(xs, ys, w: WeightVector) -> tuple[AlgebraElement, AlgebraElement]:
    alg = same_algebra(list(xs) + list(ys))
    a = w.array
    n = len(a)
    if len(xs) != n or len(ys) != n:
        raise ValueError("xs, ys and weights must have equal length")
    lhs = pair_part(xs, a) + pair_part(ys, a)
    cross = _sum(
        [gram(ratio_difference(xs[i], ys[j], a[i], a[j])) for i in range(n) for j in range(n)], alg
    )
    drift = _sum([xs[i] - ys[i] for i in range(n)], alg)
    return lhs, cross - gram(drift)


def residual_mo1(xs, ys, w: WeightVector) -> float:
    lhs, rhs = mo1_sides(xs, ys, w)
    return operator_norm(lhs - rhs)


def mo2_sides(xs, w: WeightVector) -> tuple[AlgebraElement, AlgebraElement]:
    alg = same_algebra(xs)
    a = w.array
    if len(xs) != len(a):
        raise ValueError("need one weight per element")
    lhs = pair_part(xs, a)
    rhs = _sum([a[i] * gram(xs[i]) for i in range(len(xs))], alg) - gram(_sum(xs, alg))
    return lhs, rhs


def residual_mo2(xs, w: WeightVector) -> float:
    w.require(ConstraintMode.SUM_INVERSE_ONE)
    lhs, rhs = mo2_sides(xs, w)
    return operator_norm(lhs - rhs)


def residual_scale(xs, ys=(), w: WeightVector | None = None) -> float:
    """(sum ||x_j|| + sum ||y_j||)^2 * max(1, weight coefficients)."""
    base = (_norm_sum(xs) + _norm_sum(ys)) ** 2
    coeff = 1.0
    if w is not None:
        a = w.array
        coeff = max(1.0, float(a.max()), float(a.max() / a.min()))
    return max(base * coeff, np.finfo(float).tiny)


IDENTITY_IDS = ("id1", "ibk", "mo1", "mo2")
