"""Discrete Laplace-Beltrami operator and its low-frequency eigenbasis.

The operator is kept in the ``L = -A^{-1} M`` form: ``M`` holds the
cotangent weights with a negated row-sum diagonal, ``A`` the lumped
barycentric vertex areas. Eigenpairs solve ``M phi = -lambda A phi``, which is
handed to the solvers as the positive semidefinite pencil ``(W, A)`` with
``W = -M``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, eigsh

from .errors import ConvergenceError, DimensionError, NumericalError
from .mesh import TriangleMesh, vertex_areas

logger = logging.getLogger(__name__)

__all__ = [
    "LaplaceOperator",
    "SpectralBasis",
    "assemble_operator",
    "eigendecompose",
    "eigen_gap_flags",
    "parity_oracle",
    "write_basis",
    "read_basis",
    "DEFAULT_K",
    "DENSE_LIMIT",
]

DEFAULT_K = 13
DENSE_LIMIT = 3000
REGULARIZATION = 1e-10


@dataclass(frozen=True)
class LaplaceOperator:
    M: sparse.csr_matrix
    A: np.ndarray

    @property
    def n(self) -> int:
        return int(self.A.shape[0])

    @property
    def stiffness(self) -> sparse.csr_matrix:
        """``W = -M``, positive semidefinite on Delaunay meshes."""
        return (-self.M).tocsr()

    @property
    def L(self) -> sparse.csr_matrix:
        return (-sparse.diags(1.0 / self.A) @ self.M).tocsr()


@dataclass(frozen=True)
class SpectralBasis:
    """Eigenvalues (ascending as produced) and A-orthonormal eigenfunctions.

    ``phi[:, i]`` is the eigenfunction of ``eigenvalues[i]``. Bases built by
    :meth:`permuted` are no longer sorted; consumers that need "the second
    eigenvalue" use :meth:`sorted_eigenvalues`.
    """

    eigenvalues: np.ndarray
    phi: np.ndarray

    @property
    def k(self) -> int:
        return int(self.eigenvalues.shape[0])

    @property
    def n(self) -> int:
        return int(self.phi.shape[0])

    def sorted_eigenvalues(self) -> np.ndarray:
        return np.sort(self.eigenvalues)

    @property
    def constant_index(self) -> int:
        """Column holding the constant (kernel) eigenfunction."""
        return int(np.argmin(self.eigenvalues))

    def permuted(self, order: Sequence[int]) -> "SpectralBasis":
        order = np.asarray(order)
        return SpectralBasis(self.eigenvalues[order].copy(), self.phi[:, order].copy())

    def sign_flipped(self, signs: Sequence[float]) -> "SpectralBasis":
        signs = np.asarray(signs, dtype=np.float64)
        return SpectralBasis(self.eigenvalues.copy(), self.phi * signs[np.newaxis, :])

    def subset(self, columns: Sequence[int]) -> "SpectralBasis":
        return self.permuted(columns)


# ───────────────────────────── Assembly ─────────────────────────────
def assemble_operator(mesh: TriangleMesh) -> LaplaceOperator:
    """Cotangent stiffness ``M`` and lumped mass ``A``.

    ``M[j, j'] = (cot alpha + cot beta) / 2`` on edges (a single angle on
    boundary edges), ``M[j, j] = -sum_{j'' != j} M[j, j'']``. Negative weights
    from obtuse triangles are kept.
    """
    v = mesh.vertices
    f = mesh.faces
    n = mesh.n
    rows, cols, vals = [], [], []
    for shift in range(3):
        i, j, k = f[:, shift], f[:, (shift + 1) % 3], f[:, (shift + 2) % 3]
        # angle at k is opposite edge (i, j)
        e1 = v[i] - v[k]
        e2 = v[j] - v[k]
        cross = np.linalg.norm(np.cross(e1, e2), axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            cot = np.sum(e1 * e2, axis=1) / cross
        if not np.all(np.isfinite(cot)):
            bad = int(np.argmax(~np.isfinite(cot)))
            raise NumericalError(f"non-finite cotangent at corner {int(k[bad])} of face {bad}")
        rows.extend((i, j))
        cols.extend((j, i))
        vals.extend((0.5 * cot, 0.5 * cot))

    off = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()
    off.sum_duplicates()
    diag = -np.asarray(off.sum(axis=1)).ravel()
    M = (off + sparse.diags(diag)).tocsr()
    A = vertex_areas(mesh)
    A.setflags(write=False)
    logger.debug("Assembled cotangent operator n=%d nnz=%d", n, M.nnz)
    return LaplaceOperator(M=M, A=A)


# ───────────────────────────── Eigenproblem ─────────────────────────────
def _normalize_signs(phi: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(phi), axis=0)
    signs = np.sign(phi[idx, np.arange(phi.shape[1])])
    signs[signs == 0] = 1.0
    return phi * signs[np.newaxis, :]


def _a_orthonormalize(phi: np.ndarray, A: np.ndarray) -> np.ndarray:
    gram = phi.T @ (A[:, np.newaxis] * phi)
    if np.max(np.abs(gram - np.eye(gram.shape[0]))) <= 1e-12:
        return phi
    chol = np.linalg.cholesky(gram)
    return scipy.linalg.solve_triangular(chol, phi.T, lower=True).T


def eigendecompose(op: LaplaceOperator, k: int = DEFAULT_K) -> SpectralBasis:
    """The ``k`` smallest generalized eigenpairs of ``(W, A)``.

    Dense solve up to :data:`DENSE_LIMIT` vertices, shift-invert Lanczos
    about 0 above it. Columns are A-orthonormal, sorted ascending and
    sign-normalised so their largest-magnitude entry is positive.
    """
    n = op.n
    if k < 1 or k >= n:
        raise DimensionError(f"k must satisfy 1 <= k < n (k={k}, n={n})")
    W = op.stiffness
    A = np.asarray(op.A)

    if n <= DENSE_LIMIT:
        try:
            evals, phi = scipy.linalg.eigh(W.toarray(), np.diag(A), subset_by_index=[0, k - 1])
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"dense generalized eigensolver failed: {exc}") from exc
        solver = "dense"
    else:
        reg = REGULARIZATION * float(np.mean(A))
        shifted = (W + reg * sparse.identity(n, format="csr")).tocsc()
        # fixed start vector keeps repeated solves identical
        v0 = np.random.default_rng(0).uniform(-1.0, 1.0, n)
        try:
            evals, phi = eigsh(shifted, k=k, M=sparse.diags(A).tocsc(), sigma=0.0, which="LM", v0=v0)
        except (ArpackNoConvergence, ArpackError) as exc:
            raise ConvergenceError(f"shift-invert eigensolver failed: {exc}") from exc
        solver = "shift-invert"

    order = np.argsort(evals)
    phi = _a_orthonormalize(phi[:, order], A)
    # Rayleigh quotients against the unregularised pencil
    evals = np.einsum("ij,ij->j", phi, W @ phi) / np.einsum("ij,ij->j", phi, A[:, np.newaxis] * phi)
    evals = np.maximum(evals, 0.0)
    order = np.argsort(evals, kind="stable")
    phi = _normalize_signs(phi[:, order])
    evals = evals[order]
    logger.info("Eigendecomposition (%s) n=%d k=%d lambda_2=%.6g lambda_k=%.6g",
                solver, n, k, evals[1] if k > 1 else 0.0, evals[-1])
    return SpectralBasis(eigenvalues=evals, phi=phi)


def eigen_gap_flags(basis: SpectralBasis, tau_gap: float = 1e-3) -> np.ndarray:
    """Flag eigenvalues too close to a neighbour to have a well-defined parity.

    Neighbours are taken in ascending order, so the result is valid for
    permuted bases too.
    """
    lam = basis.eigenvalues
    k = basis.k
    order = np.argsort(lam, kind="stable")
    s = lam[order]
    lam2 = s[1] if k > 1 else s[0]
    flags_sorted = np.zeros(k, dtype=bool)
    for pos in range(k):
        gaps = []
        if pos > 0:
            gaps.append(abs(s[pos] - s[pos - 1]))
        if pos < k - 1:
            gaps.append(abs(s[pos + 1] - s[pos]))
        if not gaps:
            continue
        scale = max(s[pos], lam2)
        if scale <= 0:
            continue
        flags_sorted[pos] = min(gaps) / scale < tau_gap
    flags = np.zeros(k, dtype=bool)
    flags[order] = flags_sorted
    return flags


def parity_oracle(basis: SpectralBasis, areas: np.ndarray, involution: np.ndarray) -> np.ndarray:
    """``<phi_i o pi, phi_i>_A`` per column for a known vertex involution."""
    phi = basis.phi
    return np.einsum("j,ji,ji->i", np.asarray(areas), phi[np.asarray(involution)], phi)


# ───────────────────────────── Debug dump ─────────────────────────────
def write_basis(basis: SpectralBasis, path: str | Path) -> Path:
    """Text dump: ``"n k"`` header, eigenvalue line, then ``n`` rows of ``k`` values."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(f"{basis.n} {basis.k}\n")
        fh.write(" ".join(repr(float(x)) for x in basis.eigenvalues) + "\n")
        np.savetxt(fh, basis.phi, fmt="%.17g")
    return path


def read_basis(path: str | Path) -> SpectralBasis:
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        n, k = (int(t) for t in fh.readline().split())
        evals = np.array([float(t) for t in fh.readline().split()])
        phi = np.loadtxt(fh, ndmin=2)
    if evals.shape != (k,) or phi.shape != (n, k):
        raise DimensionError(f"basis dump {path} does not match header n={n} k={k}")
    return SpectralBasis(eigenvalues=evals, phi=phi)
