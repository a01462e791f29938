"""Finite-dimensional weighted block-trace algebras.

An algebra is a direct sum of full matrix blocks ``M_{d_1} + ... + M_{d_k}``
with the faithful trace ``tau(x) = sum_b w_b Tr(x_b)``.  Elements are stored
as tuples of dense complex blocks and are immutable.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from numbers import Number
from typing import Sequence

import numpy as np

from .errors import (
    AlgebraMismatch,
    EmptyAlgebra,
    InvalidElement,
    NonpositiveWeight,
    ZeroDimension,
)


@dataclass(frozen=True)
class TracialAlgebra:
    """Ordered list of ``(dim, weight)`` blocks."""

    blocks: tuple[tuple[int, float], ...]

    def __post_init__(self):
        if len(self.blocks) == 0:
            raise EmptyAlgebra("an algebra needs at least one block")
        clean = []
        for dim, weight in self.blocks:
            if int(dim) != dim or dim < 1:
                raise ZeroDimension(f"block dimension must be a positive integer, got {dim!r}")
            weight = float(weight)
            if not np.isfinite(weight) or weight <= 0.0:
                raise NonpositiveWeight(f"block weight must be > 0, got {weight!r}")
            clean.append((int(dim), weight))
        object.__setattr__(self, "blocks", tuple(clean))
        object.__setattr__(self, "dims", tuple(d for d, _ in clean))
        object.__setattr__(self, "weights", tuple(w for _, w in clean))

    dims: tuple[int, ...] = field(init=False, repr=False, compare=False)
    weights: tuple[float, ...] = field(init=False, repr=False, compare=False)

    @property
    def unit_trace(self) -> float:
        """tau(1) = sum_b w_b d_b."""
        return float(sum(d * w for d, w in self.blocks))

    def element(self, blocks: Sequence) -> "AlgebraElement":
        return AlgebraElement(self, tuple(np.asarray(b) for b in blocks))

    def identity(self) -> "AlgebraElement":
        return self.element([np.eye(d, dtype=complex) for d in self.dims])

    def zero(self) -> "AlgebraElement":
        return self.element([np.zeros((d, d), dtype=complex) for d in self.dims])

    def scalar(self, c: complex) -> "AlgebraElement":
        return self.element([c * np.eye(d, dtype=complex) for d in self.dims])

    def diag(self, *entries) -> "AlgebraElement":
        """Diagonal element; one sequence of diagonal entries per block."""
        return self.element([np.diag(np.asarray(e, dtype=complex)) for e in entries])


def make_algebra(blocks: Sequence[tuple[int, float]]) -> TracialAlgebra:
    return TracialAlgebra(tuple(tuple(b) for b in blocks))


class AlgebraElement:
    """Block-diagonal complex matrix living in a :class:`TracialAlgebra`."""

    __slots__ = ("algebra", "blocks")

    def __init__(self, algebra: TracialAlgebra, blocks: Sequence[np.ndarray]):
        if len(blocks) != len(algebra.blocks):
            raise InvalidElement(
                f"expected {len(algebra.blocks)} blocks, got {len(blocks)}"
            )
        stored = []
        for b, d in zip(blocks, algebra.dims):
            arr = np.array(b, dtype=complex)
            if arr.shape != (d, d):
                raise InvalidElement(f"block of shape {arr.shape} where ({d}, {d}) expected")
            if not np.isfinite(arr).all():
                raise InvalidElement("element entries must be finite")
            arr.flags.writeable = False
            stored.append(arr)
        object.__setattr__(self, "algebra", algebra)
        object.__setattr__(self, "blocks", tuple(stored))

    @classmethod
    def _wrap(cls, algebra, blocks):
        # results of arithmetic on validated elements skip re-validation
        obj = object.__new__(cls)
        for b in blocks:
            b.flags.writeable = False
        object.__setattr__(obj, "algebra", algebra)
        object.__setattr__(obj, "blocks", tuple(blocks))
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("AlgebraElement is immutable")

    def __repr__(self):
        return f"AlgebraElement(dims={self.algebra.dims}, weights={self.algebra.weights})"

    # arithmetic -----------------------------------------------------------

    def _check(self, other: "AlgebraElement"):
        if not isinstance(other, AlgebraElement):
            raise TypeError(f"expected AlgebraElement, got {type(other).__name__}")
        if other.algebra is not self.algebra and other.algebra != self.algebra:
            raise AlgebraMismatch(
                f"block structures differ: {self.algebra.blocks} vs {other.algebra.blocks}"
            )

    def _new(self, blocks):
        return AlgebraElement._wrap(self.algebra, blocks)

    def __add__(self, other):
        self._check(other)
        return self._new([a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        self._check(other)
        return self._new([a - b for a, b in zip(self.blocks, other.blocks)])

    def __neg__(self):
        return self._new([-a for a in self.blocks])

    def __mul__(self, other):
        if isinstance(other, Number):
            return self._new([other * a for a in self.blocks])
        return self @ other

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self._new([other * a for a in self.blocks])
        return NotImplemented

    def __truediv__(self, c):
        return self._new([a / c for a in self.blocks])

    def __matmul__(self, other):
        self._check(other)
        return self._new([a @ b for a, b in zip(self.blocks, other.blocks)])

    def adjoint(self) -> "AlgebraElement":
        return self._new([a.conj().T for a in self.blocks])

    @property
    def H(self) -> "AlgebraElement":
        return self.adjoint()

    # comparisons and helpers ----------------------------------------------

    def allclose(self, other: "AlgebraElement", atol: float = 1e-12) -> bool:
        self._check(other)
        return all(np.allclose(a, b, rtol=0.0, atol=atol) for a, b in zip(self.blocks, other.blocks))

    def hermiticity_defect(self) -> float:
        return max(float(np.abs(a - a.conj().T).max(initial=0.0)) for a in self.blocks)


# functional forms, matching the operation family in the module contract

def add(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    return x + y


def subtract(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    return x - y


def scale(c: complex, x: AlgebraElement) -> AlgebraElement:
    return c * x


def multiply(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    return x @ y


def adjoint(x: AlgebraElement) -> AlgebraElement:
    return x.adjoint()


def linear_combination(coeffs: Sequence[complex], xs: Sequence[AlgebraElement]) -> AlgebraElement:
    """sum_j c_j x_j, computed blockwise in one pass."""
    if len(xs) == 0:
        raise ValueError("empty combination")
    first = xs[0]
    for x in xs[1:]:
        first._check(x)
    blocks = []
    for b in range(len(first.blocks)):
        acc = np.zeros_like(first.blocks[b])
        for c, x in zip(coeffs, xs):
            acc = acc + c * x.blocks[b]
        blocks.append(acc)
    return AlgebraElement._wrap(first.algebra, blocks)


def gram(x: AlgebraElement) -> AlgebraElement:
    """|x|^2 = x* x."""
    return AlgebraElement._wrap(x.algebra, [a.conj().T @ a for a in x.blocks])


def trace(x: AlgebraElement) -> complex:
    """tau(x) = sum_b w_b Tr(x_b)."""
    return complex(sum(w * np.trace(a) for w, a in zip(x.algebra.weights, x.blocks)))


def operator_norm(x: AlgebraElement) -> float:
    """Largest singular value over all blocks."""
    return max(float(np.linalg.norm(a, 2)) for a in x.blocks)


def same_algebra(xs: Sequence[AlgebraElement]) -> TracialAlgebra:
    """Return the shared algebra of ``xs`` or raise AlgebraMismatch."""
    if len(xs) == 0:
        raise ValueError("need at least one element")
    alg = xs[0].algebra
    for x in xs[1:]:
        if not isinstance(x, AlgebraElement):
            raise TypeError(f"expected AlgebraElement, got {type(x).__name__}")
        if x.algebra is not alg and x.algebra != alg:
            raise AlgebraMismatch(f"block structures differ: {alg.blocks} vs {x.algebra.blocks}")
    return alg
