"""Functional calculus, singular value functions and traces of functions.

Two independent routes compute ``tau(f(|x|))``:

* ``trace_function_spectral`` sums ``w_b f(s_i)`` block by block over the
  singular values ``s_i`` of each block;
* ``trace_function_mu`` builds the decreasing rearrangement ``mu_t(x)`` as a
  :class:`StepFunction` and integrates ``f(mu_t(x))`` over ``[0, tau(1))``.

``mu`` is represented on ``[0, tau(1))`` only.  Past ``tau(1)`` the
distribution function is 0, so ``mu_t(x) = 0`` there and the tail adds
nothing to any integral of an ``f`` with ``f(0) = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .algebra import AlgebraElement, same_algebra
from .errors import NegativeSpectrum, NonpositiveP, NotPositive, NotSelfAdjoint
from .functions import ScalarFunction

HERMITICITY_TOL = 1e-12
CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class StepFunction:
    """Decreasing right-continuous step function on ``[0, sum(lengths))``.

    ``values[k]`` is taken on ``[c_{k-1}, c_k)`` with ``c_k`` the cumulative
    lengths.  Instances built through :meth:`from_spectrum` are canonical:
    values strictly decreasing, adjacent equal values merged.
    """

    values: np.ndarray
    lengths: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=float)
        ln = np.ascontiguousarray(self.lengths, dtype=float)
        if v.shape != ln.shape or v.ndim != 1:
            raise ValueError("values and lengths must be 1-d arrays of equal length")
        if np.any(ln <= 0):
            raise ValueError("step lengths must be positive")
        if np.any(v < 0):
            raise ValueError("step values must be nonnegative")
        if np.any(np.diff(v) > 0):
            raise ValueError("step values must be nonincreasing")
        v.flags.writeable = False
        ln.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "lengths", ln)

    @classmethod
    def from_spectrum(cls, values, lengths) -> "StepFunction":
        v, ln = _kernels.canonical_steps(
            np.ascontiguousarray(values, dtype=float), np.ascontiguousarray(lengths, dtype=float)
        )
        return cls(v, ln)

    @property
    def steps(self) -> list[tuple[float, float]]:
        return [(float(v), float(ln)) for v, ln in zip(self.values, self.lengths)]

    @property
    def total_length(self) -> float:
        return float(self.lengths.sum())

    @property
    def boundaries(self) -> np.ndarray:
        """Left endpoints of the steps."""
        return np.r_[0.0, np.cumsum(self.lengths)[:-1]]

    def __call__(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return _kernels.mu_eval(self.values, self.lengths, t)

    def integral(self, f: ScalarFunction | None = None) -> float:
        """Exact integral of ``f(mu_t)`` over the support."""
        fv = self.values if f is None else np.asarray(f(self.values), dtype=float)
        return float(_kernels.weighted_sum(np.ascontiguousarray(fv), self.lengths))

    def compose(self, f: ScalarFunction) -> "StepFunction":
        """The step function ``t -> f(mu_t)`` for increasing ``f``."""
        return StepFunction.from_spectrum(f(self.values), self.lengths)

    def distribution(self, lams) -> np.ndarray:
        lams = np.atleast_1d(np.asarray(lams, dtype=float))
        return _kernels.distribution(self.values, self.lengths, lams)


# ---------------------------------------------------------------------------
# per-element operations
# ---------------------------------------------------------------------------

def hermitian_eigen(x: AlgebraElement) -> list[tuple[np.ndarray, np.ndarray]]:
    """Blockwise eigendecomposition of a self-adjoint element, eigenvalues descending."""
    # Frobenius norm bounds the operator norm from above at no eigen cost
    norm = max(float(np.linalg.norm(a)) for a in x.blocks)
    if x.hermiticity_defect() > HERMITICITY_TOL * norm:
        raise NotSelfAdjoint(f"hermiticity defect {x.hermiticity_defect():.3e} exceeds tolerance")
    out = []
    for a in x.blocks:
        h = 0.5 * (a + a.conj().T)
        lam, vec = np.linalg.eigh(h)
        out.append((lam[::-1].copy(), vec[:, ::-1].copy()))
    return out


def _clamp(lam: np.ndarray, exc=NegativeSpectrum) -> np.ndarray:
    """Clamp round-off negatives of a PSD spectrum; ``lam`` has shape (..., d)."""
    d = lam.shape[-1]
    top = np.abs(lam).max(axis=-1, keepdims=True)
    floor = -d * CLAMP_TOL * top
    if np.any(lam < floor):
        raise exc(f"eigenvalue {float(lam.min()):.3e} below round-off floor")
    return np.maximum(lam, 0.0)


def _psd_eigen(a: AlgebraElement, exc=NotPositive):
    out = []
    for lam, vec in hermitian_eigen(a):
        out.append((_clamp(lam, exc), vec))
    return out


def abs_op(x: AlgebraElement) -> AlgebraElement:
    """|x| = (x* x)^{1/2}."""
    x2 = AlgebraElement(x.algebra, [a.conj().T @ a for a in x.blocks])
    blocks = []
    for lam, vec in _psd_eigen(x2, NegativeSpectrum):
        blocks.append((vec * np.sqrt(lam)) @ vec.conj().T)
    return AlgebraElement(x.algebra, blocks)


def apply_scalar_function(f: ScalarFunction, a: AlgebraElement) -> AlgebraElement:
    """f(a) for positive ``a`` through its eigenbasis."""
    blocks = []
    for lam, vec in _psd_eigen(a):
        fl = np.where(lam == 0.0, 0.0, f(lam))
        blocks.append((vec * fl) @ vec.conj().T)
    return AlgebraElement(a.algebra, blocks)


def _block_singular_values(x: AlgebraElement) -> list[np.ndarray]:
    return [np.linalg.svd(a, compute_uv=False) for a in x.blocks]


def _flat_spectrum(x: AlgebraElement):
    svals = _block_singular_values(x)
    values = np.concatenate(svals)
    lengths = np.concatenate([np.full(s.size, w) for s, w in zip(svals, x.algebra.weights)])
    return values, lengths


def distribution_function(x: AlgebraElement, lam: float) -> float:
    """tau(e^{|x|}(lam, inf)): total weight of singular values strictly above ``lam``."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    values, lengths = _flat_spectrum(x)
    return float(_kernels.distribution(values, lengths, np.array([float(lam)]))[0])


def singular_values(x: AlgebraElement) -> StepFunction:
    """mu(x) as a canonical step function of total length tau(1)."""
    values, lengths = _flat_spectrum(x)
    return StepFunction.from_spectrum(values, lengths)


def mu_from_distribution(x: AlgebraElement, ts) -> np.ndarray:
    """mu_t(x) = inf{lam >= 0 : tau(e^{|x|}(lam, inf)) <= t}, evaluated literally.

    Test oracle only; :func:`singular_values` is the production path.
    """
    values, lengths = _flat_spectrum(x)
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    return _kernels.mu_inf(values, lengths, ts)


def trace_function_spectral(f: ScalarFunction, x: AlgebraElement) -> float:
    total = 0.0
    for s, w in zip(_block_singular_values(x), x.algebra.weights):
        total += w * float(np.sum(f(s)))
    return total


def trace_function_mu(f: ScalarFunction, x: AlgebraElement) -> float:
    return singular_values(x).integral(f)


def schatten_p_norm(x: AlgebraElement, p: float) -> float:
    """||x||_p = tau(|x|^p)^{1/p}; a quasi-norm when p < 1."""
    if not p > 0:
        raise NonpositiveP(f"p must be > 0, got {p!r}")
    total = 0.0
    for s, w in zip(_block_singular_values(x), x.algebra.weights):
        total += w * float(np.sum(s ** p))
    return total ** (1.0 / p)


# ---------------------------------------------------------------------------
# batched evaluation for the checkers
# ---------------------------------------------------------------------------

def _stacks(xs: Sequence[AlgebraElement]) -> list[np.ndarray]:
    nblocks = len(xs[0].blocks)
    return [np.stack([x.blocks[b] for x in xs]) for b in range(nblocks)]


def trace_phi_abs(phi: ScalarFunction, xs: Sequence[AlgebraElement]) -> np.ndarray:
    """tau(phi(|x|)) for every x in ``xs`` with one batched SVD per block."""
    alg = same_algebra(xs)
    out = np.zeros(len(xs))
    for stack, w in zip(_stacks(xs), alg.weights):
        s = np.linalg.svd(stack, compute_uv=False)
        out += w * np.asarray(phi(s)).sum(axis=-1)
    return out


def trace_f_positive(f: ScalarFunction, xs: Sequence[AlgebraElement]) -> np.ndarray:
    """tau(f(a)) for positive elements ``a`` with one batched eigensolve per block."""
    alg = same_algebra(xs)
    out = np.zeros(len(xs))
    for stack, w in zip(_stacks(xs), alg.weights):
        adj = np.conj(np.swapaxes(stack, -1, -2))
        defect = np.abs(stack - adj).max(axis=(-2, -1))
        if np.any(defect > HERMITICITY_TOL * np.linalg.norm(stack, axis=(-2, -1))):
            raise NotPositive("element is not self-adjoint")
        lam = _clamp(np.linalg.eigvalsh(0.5 * (stack + adj)), NotPositive)
        out += w * np.asarray(f(lam)).sum(axis=-1)
    return out


def is_positive(x: AlgebraElement) -> bool:
    try:
        _psd_eigen(x)
    except (NotPositive, NotSelfAdjoint):
        return False
    return True
