"""Eigenvalue extraction and gap quantities on invariant subspaces.

Dense diagonalization is the oracle below dimension 64 and the workhorse
for every tiling block; the iterative path is seeded restarted Krylov
(ARPACK) with post-hoc residual certificates, so a reported pair is
always backed by an explicit ||Av - theta v|| check. Kernels are never
hunted iteratively: they are deflated with a penalty shift built from an
analytically known basis.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fock import Sector, SparseState
from .hamiltonian import HamiltonianParams, SparseMatrix, build_matrix
from .tiling import (Rejection, TilingFamily, enumerate_roots, expand_class,
                     recognize)

DEFAULT_SEED = 0x5EED
KERNEL_TOL = 1e-10
DENSE_LIMIT = 64
_DENSE_COMFORT = 2000  # dense is simply faster below this


class NonConvergence(RuntimeError):
    """Iterative eigensolve failed its residual certificate."""


class KernelCertificateError(ValueError):
    """A claimed kernel vector is not annihilated by the matrix."""


@dataclass
class SpectralResult:
    eigenvalues: list[float]
    kernel_dim: int
    gap: float | None
    residual_norms: list[float]
    method: str
    n_max: int | None = None
    seed: int | None = None

    def to_json(self) -> dict:
        return {
            "eigenvalues": list(map(float, self.eigenvalues)),
            "kernel_dim": self.kernel_dim,
            "gap": None if self.gap is None else float(self.gap),
            "method": self.method,
            "residuals": list(map(float, self.residual_norms)),
            "n_max": self.n_max,
            "seed": self.seed,
        }


def _as_csr(A) -> sp.csr_matrix:
    if isinstance(A, SparseMatrix):
        if not A.hermitian:
            raise ValueError("eigensolvers here need a Hermitian matrix")
        return A.mat
    if sp.issparse(A):
        return A.tocsr()
    return sp.csr_matrix(np.asarray(A))


def _residuals(mat, vals, vecs) -> list[float]:
    out = []
    for j, th in enumerate(vals):
        v = vecs[:, j]
        out.append(float(np.linalg.norm(mat @ v - th * v)))
    return out


def _finish(vals, vecs, mat, method, kernel_tol, seed=None) -> SpectralResult:
    order = np.argsort(vals)
    vals = np.asarray(vals)[order].real
    vecs = vecs[:, order]
    res = _residuals(mat, vals, vecs)
    kdim = int(np.sum(np.abs(vals) <= kernel_tol))
    above = [v for v in vals if v > kernel_tol]
    gap = float(above[0]) if above else None
    return SpectralResult(
        eigenvalues=[float(v) for v in vals],
        kernel_dim=kdim,
        gap=gap,
        residual_norms=res,
        method=method,
        seed=seed,
    )


def eigen_lowest(A, k: int = 1, *, seed: int = DEFAULT_SEED,
                 kernel_tol: float = KERNEL_TOL) -> SpectralResult:
    """k smallest eigenvalues with residual certificates.

    Dense below DENSE_LIMIT (and whenever Krylov cannot run); otherwise
    seeded ARPACK, certified afterwards against 1e-11 * ||A||_1.
    """
    mat = _as_csr(A)
    dim = mat.shape[0]
    if k < 1:
        raise ValueError("k must be >= 1")
    k = min(k, dim)

    if dim <= max(DENSE_LIMIT, _DENSE_COMFORT) or k >= dim - 1:
        vals, vecs = np.linalg.eigh(mat.toarray())
        return _finish(vals[:k], vecs[:, :k], mat, "dense", kernel_tol)

    rng = np.random.RandomState(seed)
    v0 = rng.standard_normal(dim)
    v0 /= np.linalg.norm(v0)
    try:
        vals, vecs = spla.eigsh(mat, k=k, which="SA", v0=v0,
                                maxiter=200 * dim, tol=0)
    except spla.ArpackNoConvergence as exc:
        raise NonConvergence(
            f"Krylov iteration did not converge for dim {dim}: {exc}") from exc
    result = _finish(vals, vecs, mat, "iterative", kernel_tol, seed=seed)
    bound = max(1e-10, 1e-11 * float(abs(mat).sum(axis=0).max()))
    bad = [r for r in result.residual_norms if r > bound]
    if bad:
        raise NonConvergence(
            f"residual certificate failed: max {max(bad):.3e} > {bound:.3e}")
    return result


def state_vector(psi: SparseState, configs) -> np.ndarray:
    """Coefficient vector of psi over an ordered config list."""
    index = {tuple(c): i for i, c in enumerate(configs)}
    v = np.zeros(len(configs), dtype=complex)
    for occ, amp in psi.amps.items():
        i = index.get(occ)
        if i is None:
            raise ValueError(f"state has support outside the basis: {occ}")
        v[i] = amp
    return v


def gap_above_kernel(A, kernel_vectors, *, kernel_tol: float = KERNEL_TOL,
                     seed: int = DEFAULT_SEED) -> float | None:
    """Smallest eigenvalue orthogonal to span(kernel_vectors).

    Every claimed kernel vector is certified (||Av|| <= 1e-10 ||v||) and
    the span is deflated by the penalty A + c V V* with c = ||A||_1 + 1.
    None when the kernel exhausts the space.
    """
    mat = _as_csr(A)
    dim = mat.shape[0]
    if not kernel_vectors:
        V = np.zeros((dim, 0))
    else:
        V = np.column_stack([np.asarray(v, dtype=complex)
                             for v in kernel_vectors])
    for j in range(V.shape[1]):
        v = V[:, j]
        nv = np.linalg.norm(v)
        if nv == 0:
            raise KernelCertificateError("zero vector offered as kernel")
        if np.linalg.norm(mat @ v) > 1e-10 * nv:
            raise KernelCertificateError(
                f"vector {j} is not in the kernel "
                f"(residual {np.linalg.norm(mat @ v) / nv:.3e})")
    if V.shape[1]:
        Q, R = np.linalg.qr(V)
        keep = np.abs(np.diag(R)) > 1e-12 * max(1.0, np.abs(R).max())
        Q = Q[:, keep]
    else:
        Q = V
    rank = Q.shape[1]
    if rank >= dim:
        return None
    c = float(abs(mat).sum(axis=0).max()) + 1.0
    if dim <= _DENSE_COMFORT:
        dense = mat.toarray() + c * (Q @ Q.conjugate().T)
        vals = np.linalg.eigvalsh(dense)
        return float(vals[0])
    op = spla.LinearOperator(
        (dim, dim),
        matvec=lambda x: mat @ x + c * (Q @ (Q.conjugate().T @ x)),
        dtype=complex)
    rng = np.random.RandomState(seed)
    v0 = rng.standard_normal(dim)
    try:
        vals = spla.eigsh(op, k=1, which="SA", v0=v0 / np.linalg.norm(v0),
                          maxiter=200 * dim, tol=0,
                          return_eigenvectors=False)
    except spla.ArpackNoConvergence as exc:
        raise NonConvergence(str(exc)) from exc
    return float(vals[0])


def _block_eigenvalues(root, family: TilingFamily, p: HamiltonianParams
                       ) -> np.ndarray:
    configs = sorted(t.config() for t in expand_class(root, family))
    H = build_matrix(configs, p)
    return np.linalg.eigvalsh(H.to_dense())


def subspace_gap(L: int, p: HamiltonianParams, family: TilingFamily,
                 *, kernel_tol: float = KERNEL_TOL) -> float:
    """Smallest nonzero block eigenvalue over all roots of a ground-state
    family: the gap of H restricted to the tiling space."""
    best = None
    for root in enumerate_roots(L, family):
        vals = _block_eigenvalues(root, family, p)
        if vals[0] > kernel_tol:
            raise AssertionError(
                f"block of {root.text} has no kernel (e0={vals[0]:.3e})")
        above = vals[vals > kernel_tol]
        if above.size:
            cand = float(above[0])
            best = cand if best is None or cand < best else best
    if best is None:
        raise ValueError(f"no block with a nonzero level at L={L}")
    return best


def family_ground_energy(L: int, p: HamiltonianParams, family: TilingFamily
                         ) -> float:
    """Smallest block eigenvalue over all roots (excited/edge families,
    whose blocks have no kernel)."""
    best = None
    for root in enumerate_roots(L, family):
        vals = _block_eigenvalues(root, family, p)
        cand = float(vals[0])
        best = cand if best is None or cand < best else best
    if best is None:
        raise ValueError(f"family has no roots at L={L}")
    return best


def complement_basis(sector: Sector, bc: str) -> list[tuple[int, ...]]:
    return [occ for occ in sector.configs
            if isinstance(recognize(occ, bc), Rejection)]


def complement_ground_energy(L: int, p: HamiltonianParams, sector: Sector
                             ) -> float | None:
    """Ground energy of H compressed to the non-tiling configs of a capped
    sector; None when every config in the sector tiles. Restricting to the
    complement can only raise the infimum, so one-sided checks stay safe.
    """
    if sector.L != L:
        raise ValueError("sector length disagrees with L")
    basis = complement_basis(sector, p.bc)
    if not basis:
        return None
    H = build_matrix(basis, p, projected=True)
    if H.dim <= _DENSE_COMFORT:
        return float(np.linalg.eigvalsh(H.to_dense())[0])
    return eigen_lowest(H, 1).eigenvalues[0]
