"""Dense matrix functions and spectral estimation.

Centrality measures weight walks of length ``p`` by coefficients ``c_p``
and evaluate ``f(T) = sum_p c_p T^p`` either on the flattened tensor of a
small network or on the small projected matrix produced by an Arnoldi
process.  This module provides those dense evaluations: the matrix
exponential, the resolvent ``(I - alpha*H)^-1``, their modified variants
with the identity subtracted, truncated power series, a coefficient-decay
diagnostic, and a power-iteration estimate of the dominant eigenvalue used
to validate resolvent parameters.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConditioningError, ConvergenceError, DomainError, NumericError
from .tensor import AdjacencyTensor

__all__ = [
    "FunctionKind",
    "FunctionSpec",
    "SpectralEstimate",
    "dense_expm",
    "dense_resolvent",
    "apply_spec",
    "effective_diameter",
    "estimate_lambda_max",
]

RESOLVENT_RESIDUAL_TOL = 1e-10


class FunctionKind(str, enum.Enum):
    """Supported walk-weighting function families."""

    EXP = "exp"                    # exp(beta*H)
    EXP0 = "exp0"                  # exp(beta*H) - I
    RESOLVENT = "resolvent"        # (I - alpha*H)^-1
    RESOLVENT0 = "resolvent0"      # (I - alpha*H)^-1 - I
    POWER_SERIES = "power_series"  # sum_{p>=1} c_p H^p, truncated


@dataclass(frozen=True)
class FunctionSpec:
    """A concrete matrix function: a kind plus exactly its relevant parameters.

    Use the constructors :meth:`exp`, :meth:`exp0`, :meth:`resolvent`,
    :meth:`resolvent0` and :meth:`power_series` rather than filling fields
    by hand.
    """

    kind: FunctionKind
    beta: float | None = None
    alpha: float | None = None
    coefficients: tuple[float, ...] | None = None

    def __post_init__(self):
        kind = FunctionKind(self.kind)
        object.__setattr__(self, "kind", kind)
        wants_beta = kind in (FunctionKind.EXP, FunctionKind.EXP0)
        wants_alpha = kind in (FunctionKind.RESOLVENT, FunctionKind.RESOLVENT0)
        wants_coeffs = kind is FunctionKind.POWER_SERIES
        if wants_beta:
            if self.beta is None or not (self.beta > 0 and math.isfinite(self.beta)):
                raise DomainError(f"{kind.value} requires a positive finite beta")
        elif self.beta is not None:
            raise DomainError(f"beta is not a parameter of {kind.value}")
        if wants_alpha:
            if self.alpha is None or not (self.alpha > 0 and math.isfinite(self.alpha)):
                raise DomainError(f"{kind.value} requires a positive finite alpha")
        elif self.alpha is not None:
            raise DomainError(f"alpha is not a parameter of {kind.value}")
        if wants_coeffs:
            if self.coefficients is None or len(self.coefficients) == 0:
                raise DomainError("power_series requires a nonempty coefficient sequence")
            coeffs = tuple(float(c) for c in self.coefficients)
            if not all(math.isfinite(c) for c in coeffs):
                raise DomainError("power series coefficients must be finite")
            object.__setattr__(self, "coefficients", coeffs)
        elif self.coefficients is not None:
            raise DomainError(f"coefficients are not a parameter of {kind.value}")

    @classmethod
    def exp(cls, beta=1.0):
        return cls(FunctionKind.EXP, beta=beta)

    @classmethod
    def exp0(cls, beta=1.0):
        return cls(FunctionKind.EXP0, beta=beta)

    @classmethod
    def resolvent(cls, alpha):
        return cls(FunctionKind.RESOLVENT, alpha=alpha)

    @classmethod
    def resolvent0(cls, alpha):
        return cls(FunctionKind.RESOLVENT0, alpha=alpha)

    @classmethod
    def power_series(cls, coefficients):
        return cls(FunctionKind.POWER_SERIES, coefficients=tuple(coefficients))

    @property
    def is_resolvent_family(self):
        return self.kind in (FunctionKind.RESOLVENT, FunctionKind.RESOLVENT0)

    @property
    def is_shifted(self):
        """True when the identity term is subtracted from the series."""
        return self.kind in (FunctionKind.EXP0, FunctionKind.RESOLVENT0)

    def walk_coefficients(self, count):
        """The first ``count`` series coefficients ``c_1, ..., c_count``."""
        if count < 1:
            raise DomainError("count must be positive")
        if self.kind in (FunctionKind.EXP, FunctionKind.EXP0):
            return [self.beta**p / math.factorial(p) for p in range(1, count + 1)]
        if self.is_resolvent_family:
            return [self.alpha**p for p in range(1, count + 1)]
        coeffs = list(self.coefficients[:count])
        coeffs += [0.0] * (count - len(coeffs))
        return coeffs

    def describe(self):
        if self.kind in (FunctionKind.EXP, FunctionKind.EXP0):
            return f"{self.kind.value}(beta={self.beta})"
        if self.is_resolvent_family:
            return f"{self.kind.value}(alpha={self.alpha})"
        return f"power_series(degree={len(self.coefficients)})"


def _as_square(h):
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise DomainError("matrix entries must be finite")
    return h


def dense_expm(h, beta=1.0):
    """Matrix exponential ``exp(beta*H)`` of a dense square matrix.

    Evaluated by scaling-and-squaring with diagonal Pade approximants and
    norm-based scaling selection (scipy's expm).
    """
    h = _as_square(h)
    if beta < 0:
        raise DomainError("beta must be nonnegative")
    result = scipy.linalg.expm(beta * h)
    if not np.all(np.isfinite(result)):
        raise NumericError("matrix exponential overflowed; beta * ||H|| is too large")
    return result


def dense_resolvent(h, alpha):
    """Resolvent ``(I - alpha*H)^-1`` via an LU-factorized solve.

    Never forms an explicit inverse by cofactors.  Raises
    :class:`ConditioningError` when ``I - alpha*H`` is singular or so
    ill-conditioned that the residual check fails.
    """
    h = _as_square(h)
    if not (alpha > 0 and math.isfinite(alpha)):
        raise DomainError("alpha must be a positive finite real")
    n = h.shape[0]
    system = np.eye(n) - alpha * h
    try:
        result = _lu_solve(system, np.eye(n))
    except (scipy.linalg.LinAlgError, scipy.linalg.LinAlgWarning) as exc:
        raise ConditioningError(f"resolvent system is singular: {exc}") from exc
    if not np.all(np.isfinite(result)):
        raise ConditioningError(
            "resolvent system is numerically singular",
            condition=float(np.linalg.cond(system, 1)),
        )
    residual = np.linalg.norm(system @ result - np.eye(n))
    if residual > RESOLVENT_RESIDUAL_TOL * max(1.0, np.linalg.norm(result)):
        raise ConditioningError(
            f"resolvent solve residual {residual:.3e} exceeds tolerance",
            condition=float(np.linalg.cond(system, 1)),
        )
    return result


def _lu_solve(system, rhs):
    """LU solve where an exact-singularity warning becomes a hard failure."""
    with warnings.catch_warnings():
        warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(system)
        return scipy.linalg.lu_solve((lu, piv), rhs)


def resolvent_apply(h, alpha, rhs):
    """Solve ``(I - alpha*H) X = rhs`` without forming the resolvent."""
    h = _as_square(h)
    rhs = np.asarray(rhs, dtype=float)
    system = np.eye(h.shape[0]) - alpha * h
    try:
        result = _lu_solve(system, rhs)
    except (scipy.linalg.LinAlgError, scipy.linalg.LinAlgWarning) as exc:
        raise ConditioningError(f"resolvent system is singular: {exc}") from exc
    if not np.all(np.isfinite(result)):
        raise ConditioningError(
            "resolvent system is numerically singular",
            condition=float(np.linalg.cond(system, 1)),
        )
    resid = np.linalg.norm(system @ result - rhs)
    if resid > RESOLVENT_RESIDUAL_TOL * max(1.0, np.linalg.norm(result)):
        raise ConditioningError(
            f"resolvent solve residual {resid:.3e} exceeds tolerance",
            condition=float(np.linalg.cond(system, 1)),
        )
    return result


def _power_series(h, coefficients):
    """Horner evaluation of ``sum_{p=1}^{P} c_p H^p`` (no constant term)."""
    n = h.shape[0]
    eye = np.eye(n)
    acc = coefficients[-1] * eye
    for c in reversed(coefficients[:-1]):
        acc = h @ acc + c * eye
    return h @ acc


def apply_spec(h, spec: FunctionSpec):
    """Evaluate the matrix function described by ``spec`` on a square matrix."""
    h = _as_square(h)
    kind = spec.kind
    if kind is FunctionKind.EXP:
        return dense_expm(h, spec.beta)
    if kind is FunctionKind.EXP0:
        return dense_expm(h, spec.beta) - np.eye(h.shape[0])
    if kind is FunctionKind.RESOLVENT:
        return dense_resolvent(h, spec.alpha)
    if kind is FunctionKind.RESOLVENT0:
        return dense_resolvent(h, spec.alpha) - np.eye(h.shape[0])
    return _power_series(h, spec.coefficients)


def effective_diameter(coefficients, delta):
    """Smallest ``k`` past which series coefficients are negligible.

    Returns the smallest integer ``k`` with
    ``max_{l > k} |c_l| / max_{1 <= j <= k} |c_j| <= delta``, scanning the
    1-indexed finite sequence ``c_1, ..., c_P``.  Walks longer than ``k``
    then contribute little to the function; the whole length is returned
    when only the empty tail satisfies the bound.
    """
    coeffs = [abs(float(c)) for c in coefficients]
    if not coeffs:
        raise DomainError("coefficient sequence must be nonempty")
    if not (0 < delta < 1):
        raise DomainError("delta must lie strictly between 0 and 1")
    if max(coeffs) == 0.0:
        raise DomainError("all coefficients vanish; decay ratio is undefined")
    head_max = 0.0
    # suffix maxima of the tail beyond each k
    tail_max = [0.0] * (len(coeffs) + 1)
    for i in range(len(coeffs) - 1, -1, -1):
        tail_max[i] = max(tail_max[i + 1], coeffs[i])
    for k in range(1, len(coeffs) + 1):
        head_max = max(head_max, coeffs[k - 1])
        if head_max == 0.0:
            continue  # ratio undefined (infinite) until a nonzero coefficient appears
        if tail_max[k] <= delta * head_max:
            return k
    return len(coeffs)


@dataclass(frozen=True)
class SpectralEstimate:
    """Dominant-eigenvalue estimate with its verified residual."""

    lambda_max: float
    residual: float
    iterations: int


_STALL_WINDOW = 250
_RESTART_SEED = 20240817


def estimate_lambda_max(a: AdjacencyTensor, tol=1e-8, max_iter=5000):
    """Dominant-magnitude eigenvalue of the flattened tensor by power iteration.

    Starts from the normalized all-ones vector.  For tensors with
    nonnegative entries the iteration runs on the diagonally shifted
    flattening, which makes the dominant (Perron) eigenvalue strictly
    separated even for bipartite structures; the returned value and
    residual always refer to the unshifted operator.  On stagnation the
    iteration restarts once from a fixed-seed perturbed vector; if the
    residual still does not reach ``tol`` within ``max_iter`` steps a
    :class:`ConvergenceError` carrying the best estimate is raised (this
    typically signals a complex or plus/minus dominant pair).
    """
    if a.nnz == 0:
        raise DomainError("cannot estimate the dominant eigenvalue of the zero tensor")
    if tol <= 0:
        raise DomainError("tol must be positive")
    # tensors are immutable; memoize per (tol, max_iter) so repeated
    # parameter checks do not redo the iteration
    cache = getattr(a, "_lambda_cache", None)
    key = (float(tol), int(max_iter))
    if cache is not None and key in cache:
        return cache[key]
    mat = a.mat
    n = a.dim
    nonnegative = bool(np.all(mat.data >= 0.0))
    # Perron shift: half the max absolute row sum, an upper bound on the radius.
    shift = 0.5 * float(np.max(np.abs(mat).sum(axis=1))) if nonnegative else 0.0

    x = np.full(n, 1.0 / math.sqrt(n))
    best = None
    prev_residual = math.inf
    stall = 0
    restarted = False
    for it in range(1, max_iter + 1):
        z = mat @ x
        lam = float(x @ z)
        residual = float(np.linalg.norm(z - lam * x))
        if best is None or residual < best.residual:
            best = SpectralEstimate(lambda_max=lam, residual=residual, iterations=it)
        if residual <= tol:
            result = SpectralEstimate(lambda_max=lam, residual=residual, iterations=it)
            if cache is not None:
                cache[key] = result
            return result
        if residual >= prev_residual * (1.0 - 1e-9):
            stall += 1
        else:
            stall = 0
        prev_residual = residual
        if stall >= _STALL_WINDOW:
            if restarted:
                break
            rng = np.random.default_rng(_RESTART_SEED)
            x = x + 0.5 * rng.standard_normal(n)
            x /= np.linalg.norm(x)
            prev_residual = math.inf
            stall = 0
            restarted = True
            continue
        y = z + shift * x
        norm_y = np.linalg.norm(y)
        if norm_y == 0.0:
            # landed in the kernel; perturb deterministically
            rng = np.random.default_rng(_RESTART_SEED + it)
            y = rng.standard_normal(n)
            norm_y = np.linalg.norm(y)
        x = y / norm_y
    raise ConvergenceError(
        f"power iteration did not reach tol={tol:g} within {max_iter} iterations "
        f"(best residual {best.residual:.3e}); the dominant eigenvalue may be "
        "complex or a plus/minus pair",
        estimate=best,
    )
