"""Arnoldi processes over the tensor contraction, global and block variants.

Both processes build an orthonormal basis of a Krylov space generated by
repeatedly contracting the adjacency tensor against a starting block.  The
global variant treats one ``(N, L)`` block as a single vector under the
trace inner product and yields a scalar Hessenberg matrix; the block
variant starts from ``R`` blocks at once, orthonormalizes them by QR at
every step, and yields a block Hessenberg matrix.  Matrix functions of the
full tensor applied to the start block are then approximated by evaluating
the function on the small projected matrix:

    f(T) * V  ~=  basis_m * f(H_m) * e1 * ||V||           (global)
    f(T) * V  ~=  basis_m * f(H_m) * E1 * chi0            (block)

which is exact whenever f is a polynomial of degree below the number of
completed steps.

Internally all blocks are handled as flattened columns of length ``N*L``;
decompositions keep that layout and expose block-shaped views.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .matfun import FunctionSpec, apply_spec
from .tensor import AdjacencyTensor, unvec_block, vec_block

__all__ = [
    "GlobalKrylovDecomposition",
    "BlockKrylovDecomposition",
    "global_arnoldi",
    "block_arnoldi",
    "block_qr",
    "BlockQRResult",
    "approx_function_times_block",
    "block_approx_function",
    "FunctionApproximation",
    "BlockFunctionApproximation",
    "breakdown_tolerance",
    "augmentation_slice",
]

BREAKDOWN_RELTOL = 1e-12
_AUGMENT_SEED = 74250913


def breakdown_tolerance(a: AdjacencyTensor) -> float:
    """Threshold below which a new basis vector counts as numerically zero."""
    return BREAKDOWN_RELTOL * max(1.0, a.frobenius_norm())


def _orthogonalize(basis, w):
    """Project ``w`` against the orthonormal columns of ``basis`` (two passes).

    Classical Gram-Schmidt with one full reorthogonalization keeps the basis
    orthonormal to roundoff for the modest step counts used here.  Returns
    the combined coefficients and the remainder.
    """
    c1 = basis.T @ w
    w = w - basis @ c1
    c2 = basis.T @ w
    w = w - basis @ c2
    return c1 + c2, w


@dataclass(frozen=True, eq=False)
class GlobalKrylovDecomposition:
    """Outcome of the global Arnoldi process.

    ``basis`` holds the orthonormal flattened blocks as columns.  When no
    breakdown occurs after ``m`` steps it has ``m + 1`` columns and
    ``hessenberg`` has shape ``(m + 1, m)``; when the process breaks down at
    step ``j`` the decomposition is truncated: ``basis`` has ``j`` columns,
    ``hessenberg`` is ``j x j`` and ``breakdown_at = j``.  In both cases

        mat(T) @ basis[:, :n_steps] == basis @ hessenberg

    holds to working precision.
    """

    n_nodes: int
    n_layers: int
    basis: np.ndarray
    hessenberg: np.ndarray
    v_norm: float
    breakdown_at: int | None = None

    @property
    def n_steps(self):
        """Completed Arnoldi steps (columns of the Hessenberg matrix)."""
        return self.hessenberg.shape[1]

    @property
    def reduced_hessenberg(self):
        """The square projected matrix ``H_m`` (last row dropped if present)."""
        m = self.n_steps
        return self.hessenberg[:m, :m]

    def block(self, j):
        """The ``j``-th basis block (0-based) as an ``(N, L)`` array."""
        return unvec_block(self.basis[:, j], self.n_nodes, self.n_layers)

    @property
    def blocks(self):
        return [self.block(j) for j in range(self.basis.shape[1])]


def global_arnoldi(a: AdjacencyTensor, start_block, m, breakdown_tol=None):
    """Run ``m`` steps of the global Arnoldi process on tensor ``a``.

    Parameters
    ----------
    a : AdjacencyTensor
    start_block : array, shape (N, L)
        Nonzero starting block; it is normalized internally.
    m : int
        Number of steps, ``1 <= m <= N*L``.
    breakdown_tol : float, optional
        Override for the breakdown threshold.

    Returns
    -------
    GlobalKrylovDecomposition
    """
    v = vec_block(np.asarray(start_block, dtype=float))
    if v.shape[0] != a.dim:
        raise DomainError(
            f"start block shape {np.shape(start_block)} does not match "
            f"({a.n_nodes}, {a.n_layers})"
        )
    if not np.all(np.isfinite(v)):
        raise DomainError("start block must be finite")
    v_norm = float(np.linalg.norm(v))
    if v_norm == 0.0:
        raise DomainError("start block must be nonzero")
    if not (1 <= m <= a.dim):
        raise DomainError(f"step count m={m} must lie in [1, {a.dim}]")
    tol = breakdown_tolerance(a) if breakdown_tol is None else float(breakdown_tol)

    mat = a.mat
    basis = np.empty((a.dim, m + 1))
    basis[:, 0] = v / v_norm
    hess = np.zeros((m + 1, m))
    for j in range(m):
        w = mat @ basis[:, j]
        coeffs, w = _orthogonalize(basis[:, : j + 1], w)
        hess[: j + 1, j] = coeffs
        h_next = float(np.linalg.norm(w))
        if h_next <= tol:
            return GlobalKrylovDecomposition(
                n_nodes=a.n_nodes,
                n_layers=a.n_layers,
                basis=basis[:, : j + 1].copy(),
                hessenberg=hess[: j + 1, : j + 1].copy(),
                v_norm=v_norm,
                breakdown_at=j + 1,
            )
        hess[j + 1, j] = h_next
        basis[:, j + 1] = w / h_next
    return GlobalKrylovDecomposition(
        n_nodes=a.n_nodes,
        n_layers=a.n_layers,
        basis=basis,
        hessenberg=hess,
        v_norm=v_norm,
        breakdown_at=None,
    )


@dataclass(frozen=True, eq=False)
class FunctionApproximation:
    """A Krylov approximation of ``f(T) * V`` with its provenance."""

    block: np.ndarray
    decomposition: GlobalKrylovDecomposition

    @property
    def breakdown_at(self):
        return self.decomposition.breakdown_at

    @property
    def broke_down(self):
        return self.decomposition.breakdown_at is not None


def approx_function_times_block(a, start_block, m, spec: FunctionSpec,
                                decomposition=None, breakdown_tol=None):
    """Approximate ``f(T) * V`` from a global Krylov decomposition.

    Reuses ``decomposition`` when given (it must come from the same tensor
    and start block); otherwise runs :func:`global_arnoldi` first.  When the
    process broke down early the available smaller decomposition is used and
    the result is flagged via ``broke_down`` -- if the space became invariant
    the value is exact, but a sparse start may simply have stalled.
    """
    dec = decomposition
    if dec is None:
        dec = global_arnoldi(a, start_block, m, breakdown_tol=breakdown_tol)
    m_eff = dec.n_steps
    fh = apply_spec(dec.reduced_hessenberg, spec)
    weights = dec.v_norm * fh[:, 0]
    flat = dec.basis[:, :m_eff] @ weights
    return FunctionApproximation(
        block=unvec_block(flat, dec.n_nodes, dec.n_layers),
        decomposition=dec,
    )


# -- block variant -----------------------------------------------------


class BlockQRResult(NamedTuple):
    """Thin QR of a block of columns, with a numerical-rank report."""

    q: np.ndarray
    r: np.ndarray
    rank: int


def block_qr(block, rank_tol=None):
    """Thin QR factorization of an ``(N, L, R)`` tensor (or ``(NL, R)`` matrix).

    The flattened columns of ``q`` are orthonormal, ``r`` is upper
    triangular with nonnegative diagonal, and ``q @ r`` reconstructs the
    input to roundoff.  ``rank`` counts diagonal entries of ``r`` above a
    relative threshold; a deficit signals (numerically) dependent columns,
    which the block Arnoldi process handles by deflation.
    """
    arr = np.asarray(block, dtype=float)
    tensor_input = arr.ndim == 3
    if tensor_input:
        n_nodes, n_layers, r_cols = arr.shape
        flat = arr.reshape((n_nodes * n_layers, r_cols), order="F")
    elif arr.ndim == 2:
        flat = arr
        r_cols = arr.shape[1]
    else:
        raise DomainError(f"expected an (N, L, R) or (NL, R) array, got shape {arr.shape}")
    q, r = np.linalg.qr(flat)
    signs = np.where(np.diagonal(r) < 0.0, -1.0, 1.0)
    q = q * signs
    r = signs[:, None] * r
    diag = np.abs(np.diagonal(r))
    scale = diag.max() if diag.size else 0.0
    if rank_tol is None:
        rank_tol = max(flat.shape) * np.finfo(float).eps * max(scale, 1e-300)
    rank = int(np.count_nonzero(diag > rank_tol))
    if tensor_input:
        q = q.reshape((n_nodes, n_layers, r_cols), order="F")
    return BlockQRResult(q=q, r=r, rank=rank)


def _deflating_qr(w, tol, against=None):
    """Column-wise orthonormalization dropping numerically dependent columns.

    Each column is orthogonalized (two Gram-Schmidt passes) against the
    previously accepted columns and, when ``against`` is given, against that
    outer basis too; columns whose remainder falls below ``tol`` are
    deflated.  Returns ``(q, t, kept)`` with ``q`` the accepted orthonormal
    columns and ``t`` upper triangular on the kept columns so that
    ``w ~= q @ t`` up to the deflated residuals.
    """
    n, cols = w.shape
    q = np.empty((n, cols))
    t = np.zeros((cols, cols))
    kept = []
    for c in range(cols):
        vec = w[:, c].copy()
        if against is not None:
            _, vec = _orthogonalize(against, vec)
        if kept:
            accepted = q[:, : len(kept)]
            coeffs, vec = _orthogonalize(accepted, vec)
            t[: len(kept), c] = coeffs
        norm = float(np.linalg.norm(vec))
        if norm <= tol:
            continue
        t[len(kept), c] = norm
        q[:, len(kept)] = vec / norm
        kept.append(c)
    width = len(kept)
    return q[:, :width].copy(), t[:width, :].copy(), kept


@dataclass(frozen=True, eq=False)
class BlockKrylovDecomposition:
    """Outcome of the block Arnoldi process.

    ``basis`` stores the orthonormal flattened columns of all basis blocks
    side by side; ``widths[k]`` is the number of columns contributed by
    block ``k`` (widths shrink when deflation drops dependent columns).
    ``block_hessenberg`` collects the projection blocks: with ``p``
    completed steps its column count is ``sum(widths[:p])`` and

        mat(T) @ basis[:, :n_cols] == basis @ block_hessenberg

    holds to working precision.  ``chi0`` are the triangular coefficients
    of the initial QR, i.e. the start tensor equals the first basis block
    times ``chi0``.  ``breakdown_at`` records the first step at which
    deflation occurred (0 for a rank-deficient start); ``deflations`` lists
    ``(step, dropped_columns)`` events.
    """

    n_nodes: int
    n_layers: int
    block_size: int
    basis: np.ndarray
    widths: tuple[int, ...]
    block_hessenberg: np.ndarray
    chi0: np.ndarray
    breakdown_at: int | None = None
    deflations: tuple[tuple[int, int], ...] = field(default=())

    @property
    def n_steps(self):
        """Completed steps: Hessenberg block-columns produced."""
        offsets = np.cumsum((0,) + self.widths)
        return int(np.searchsorted(offsets, self.block_hessenberg.shape[1]))

    @property
    def n_cols(self):
        """Total basis columns spanning the projection space (Hessenberg columns)."""
        return self.block_hessenberg.shape[1]

    @property
    def reduced_hessenberg(self):
        """Square leading part of the block Hessenberg matrix."""
        c = self.n_cols
        return self.block_hessenberg[:c, :c]

    def block(self, k):
        """The ``k``-th basis block (0-based), shape ``(N, L, widths[k])``."""
        start = sum(self.widths[:k])
        stop = start + self.widths[k]
        return self.basis[:, start:stop].reshape(
            (self.n_nodes, self.n_layers, self.widths[k]), order="F"
        )

    @property
    def blocks(self):
        return [self.block(k) for k in range(len(self.widths))]


def _flatten_slices(tensor, n_nodes, n_layers):
    arr = np.asarray(tensor, dtype=float)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3 or arr.shape[:2] != (n_nodes, n_layers):
        raise DomainError(
            f"start tensor shape {np.shape(tensor)} does not match "
            f"({n_nodes}, {n_layers}, R)"
        )
    if not np.all(np.isfinite(arr)):
        raise DomainError("start tensor must be finite")
    return arr.reshape((n_nodes * n_layers, arr.shape[2]), order="F")


def block_arnoldi(a: AdjacencyTensor, start_tensor, m, breakdown_tol=None):
    """Run ``m`` steps of the block Arnoldi process on tensor ``a``.

    ``start_tensor`` holds ``R`` starting blocks as frontal slices of an
    ``(N, L, R)`` array.  Rank-deficient QR factorizations trigger
    deflation: dependent columns are dropped and the iteration continues
    with a narrower block; if every column deflates the decomposition is
    truncated.  Either event records ``breakdown_at``.
    """
    s = _flatten_slices(start_tensor, a.n_nodes, a.n_layers)
    r_init = s.shape[1]
    if r_init < 1:
        raise DomainError("start tensor must have at least one slice")
    if np.linalg.norm(s) == 0.0:
        raise DomainError("start tensor must be nonzero")
    if not (1 <= m <= a.dim):
        raise DomainError(f"step count m={m} must lie in [1, {a.dim}]")
    tol = breakdown_tolerance(a) if breakdown_tol is None else float(breakdown_tol)

    mat = a.mat
    q0, chi0, _ = _deflating_qr(s, tol)
    deflations = []
    breakdown_at = None
    if q0.shape[1] < r_init:
        deflations.append((0, r_init - q0.shape[1]))
        breakdown_at = 0

    max_cols = min(a.dim + r_init, r_init * (m + 1))
    basis = np.empty((a.dim, max_cols))
    basis[:, : q0.shape[1]] = q0
    widths = [q0.shape[1]]
    hess = np.zeros((max_cols, max_cols))
    total = q0.shape[1]  # columns in basis so far
    col_off = 0          # Hessenberg columns filled so far

    for j in range(1, m + 1):
        wj = widths[-1]
        current = basis[:, total - wj : total]
        w = mat @ current
        prior = basis[:, :total]
        coeffs, w = _orthogonalize(prior, w)
        hess[:total, col_off : col_off + wj] = coeffs
        q_next, t_next, _ = _deflating_qr(w, tol, against=prior)
        w_next = q_next.shape[1]
        if w_next < wj:
            deflations.append((j, wj - w_next))
            if breakdown_at is None:
                breakdown_at = j
        col_off += wj
        if w_next == 0:
            break
        hess[total : total + w_next, col_off - wj : col_off] = t_next
        basis[:, total : total + w_next] = q_next
        widths.append(w_next)
        total += w_next

    return BlockKrylovDecomposition(
        n_nodes=a.n_nodes,
        n_layers=a.n_layers,
        block_size=r_init,
        basis=basis[:, :total].copy(),
        widths=tuple(widths),
        block_hessenberg=hess[:total, :col_off].copy(),
        chi0=chi0,
        breakdown_at=breakdown_at,
        deflations=tuple(deflations),
    )


def augmentation_slice(n_nodes, n_layers, kind="random"):
    """A dense slice appended to sparse start tensors to stave off breakdown.

    ``kind="random"`` draws a fixed-seed uniform(0, 1) block (deterministic
    across runs); ``kind="ones"`` uses the all-ones block, which makes the
    block process reproduce the global-process quantities for an all-ones
    start.
    """
    if kind == "ones":
        return np.ones((n_nodes, n_layers))
    if kind == "random":
        rng = np.random.default_rng(_AUGMENT_SEED)
        return rng.uniform(0.0, 1.0, size=(n_nodes, n_layers))
    raise DomainError(f"unknown augmentation kind {kind!r}")


@dataclass(frozen=True, eq=False)
class BlockFunctionApproximation:
    """A block-Krylov approximation of ``f(T) * V`` for an R-slice start."""

    tensor: np.ndarray
    decomposition: BlockKrylovDecomposition
    augmented: bool = False

    @property
    def breakdown_at(self):
        return self.decomposition.breakdown_at

    @property
    def broke_down(self):
        return self.decomposition.breakdown_at is not None


def block_approx_function(a, start_tensor, m, spec: FunctionSpec,
                          augment=None, decomposition=None, breakdown_tol=None):
    """Approximate ``f(T) * V`` for an ``(N, L, R)`` start tensor.

    With ``augment`` set to ``"random"`` or ``"ones"`` a dense extra slice
    is appended to the start before the Arnoldi run and its read-out column
    is discarded from the result, so the returned tensor always has the
    original ``R`` slices.
    """
    s = _flatten_slices(start_tensor, a.n_nodes, a.n_layers)
    r_orig = s.shape[1]
    augmented = False
    if decomposition is None:
        if augment is not None:
            extra = vec_block(augmentation_slice(a.n_nodes, a.n_layers, kind=augment))
            s = np.column_stack([s, extra])
            augmented = True
        dec = block_arnoldi(
            a,
            s.reshape((a.n_nodes, a.n_layers, s.shape[1]), order="F"),
            m,
            breakdown_tol=breakdown_tol,
        )
    else:
        dec = decomposition
        augmented = dec.block_size > r_orig
    c = dec.n_cols
    if c == 0:
        raise DomainError("block decomposition has no completed steps")
    fh = apply_spec(dec.reduced_hessenberg, spec)
    w1 = dec.widths[0]
    read = fh[:, :w1] @ dec.chi0          # (c, R_input)
    flat = dec.basis[:, :c] @ read        # (NL, R_input)
    flat = flat[:, :r_orig]
    tensor = flat.reshape((a.n_nodes, a.n_layers, r_orig), order="F")
    return BlockFunctionApproximation(tensor=tensor, decomposition=dec, augmented=augmented)
