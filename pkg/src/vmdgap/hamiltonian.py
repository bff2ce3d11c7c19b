"""Hamiltonian action, invariant closures, matrix assembly, classifier.

H = sum_x n_x n_{x+1} + kappa * sum_x q_x^dag q_x with
q_x = a_x^2 - lambda a_{x-1} a_{x+1}. Expanding the hopping sum,

    H = E + kappa*(P2 + |lambda|^2 * NN - lambda*Tdag - conj(lambda)*T)

with E the electrostatic diagonal, P2 = sum n_x(n_x-1), NN = sum
n_{x-1} n_{x+1}, and T = sum a_{x-1}^dag a_{x+1}^dag a_x^2 the pair-split.
The split form lets one assembly serve a whole (kappa, lambda) grid.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .fock import OBC, PER, Config, SparseState, config_text
from .tiling import Rejection, Tiling, recognize

DEFAULT_BUDGET = 2_000_000


def _budget() -> int:
    try:
        return int(os.environ.get("VMDGAP_BUDGET_DIM", DEFAULT_BUDGET))
    except ValueError:
        return DEFAULT_BUDGET


@dataclass(frozen=True)
class HamiltonianParams:
    kappa: float
    lam: complex
    bc: str = OBC
    allow_lambda_zero: bool = False

    def __post_init__(self):
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")
        if self.lam == 0 and not self.allow_lambda_zero:
            raise ValueError(
                "lambda = 0 needs allow_lambda_zero=True (degenerate limit)")
        if self.bc not in (OBC, PER):
            raise ValueError(f"unknown boundary condition {self.bc!r}")

    @property
    def real_lambda(self) -> bool:
        return complex(self.lam).imag == 0.0


class BudgetExceeded(RuntimeError):
    def __init__(self, size, budget, frontier):
        self.size, self.budget, self.frontier = size, budget, frontier
        super().__init__(
            f"closure grew past the budget ({size} > {budget}); "
            f"frontier holds {len(frontier)} configs")


class NotInvariant(ValueError):
    def __init__(self, offender):
        self.offender = offender
        super().__init__(f"basis is not H-invariant: leaks onto {offender}")


def hop_sites(L: int, bc: str) -> range:
    """Sites x where q_x acts: interior for open chains, all for rings."""
    return range(2, L) if bc == OBC else range(1, L + 1)


def electrostatic_energy(mu, bc: str | None = None) -> float:
    if isinstance(mu, Config):
        occ, bc = mu.occ, mu.bc
    else:
        occ = tuple(mu)
        bc = bc or OBC
    e = sum(occ[i] * occ[i + 1] for i in range(len(occ) - 1))
    if bc == PER:
        e += occ[-1] * occ[0]
    return float(e)


def apply_qx(psi: SparseState, x: int, lam: complex) -> SparseState:
    """(q_x psi)(nu) = sqrt((nu_x+1)(nu_x+2)) psi(nu + 2e_x)
    - lambda sqrt((nu_{x-1}+1)(nu_{x+1}+1)) psi(nu + e_{x-1} + e_{x+1})."""
    L, bc = psi.L, psi.bc
    if bc == OBC and not 2 <= x <= L - 1:
        raise ValueError(f"open-chain hopping needs x in [2, {L - 1}], got {x}")
    xm = (x - 2) % L
    xi = (x - 1) % L
    xp = x % L
    out: dict = {}
    for occ, amp in psi.amps.items():
        n = occ[xi]
        if n >= 2:
            nu = list(occ)
            nu[xi] = n - 2
            key = tuple(nu)
            out[key] = out.get(key, 0.0) + math.sqrt(n * (n - 1)) * amp
        nl, nr = occ[xm], occ[xp]
        if nl >= 1 and nr >= 1:
            nu = list(occ)
            nu[xm] = nl - 1
            nu[xp] = nr - 1
            key = tuple(nu)
            out[key] = out.get(key, 0.0) - lam * math.sqrt(nl * nr) * amp
    return SparseState(L, bc, out).prune()


def apply_qx_dag(psi: SparseState, x: int, lam: complex) -> SparseState:
    L, bc = psi.L, psi.bc
    if bc == OBC and not 2 <= x <= L - 1:
        raise ValueError(f"open-chain hopping needs x in [2, {L - 1}], got {x}")
    xm = (x - 2) % L
    xi = (x - 1) % L
    xp = x % L
    lamc = complex(lam).conjugate()
    out: dict = {}
    for occ, amp in psi.amps.items():
        n = occ[xi]
        mu = list(occ)
        mu[xi] = n + 2
        key = tuple(mu)
        out[key] = out.get(key, 0.0) + math.sqrt((n + 1) * (n + 2)) * amp
        nl, nr = occ[xm], occ[xp]
        mu = list(occ)
        mu[xm] = nl + 1
        mu[xp] = nr + 1
        key = tuple(mu)
        out[key] = out.get(key, 0.0) - lamc * math.sqrt((nl + 1) * (nr + 1)) * amp
    return SparseState(L, bc, out).prune()


def apply_H(psi: SparseState, p: HamiltonianParams) -> SparseState:
    """Two-pass form: diagonal + kappa * sum_x q_x^dag (q_x psi)."""
    if p.bc != psi.bc:
        raise ValueError("state and params disagree on the boundary condition")
    out = SparseState(psi.L, psi.bc,
                      {occ: electrostatic_energy(occ, psi.bc) * amp
                       for occ, amp in psi.amps.items()})
    for x in hop_sites(psi.L, psi.bc):
        out = out.add(apply_qx_dag(apply_qx(psi, x, p.lam), x, p.lam), p.kappa)
    return out.prune()


def _row_terms(occ: tuple[int, ...], L: int, bc: str):
    """Matrix elements of one column, split by coupling: returns
    (e, p2, nn, splits, merges) where splits/merges are lists of
    (target_config, positive amplitude). Column = |occ>; H_{nu,occ} =
    e + kappa*p2 + kappa|lam|^2*nn on the diagonal, -kappa*conj(lam)*amp for
    splits (T direction), -kappa*lam*amp for merges (T^dag direction).
    """
    if bc == PER and L < 3:
        raise ValueError("ring hopping terms need L >= 3")
    e = electrostatic_energy(occ, bc)
    p2 = 0
    nn = 0
    splits = []
    merges = []
    for x in hop_sites(L, bc):
        xm, xi, xp = (x - 2) % L, (x - 1) % L, x % L
        n = occ[xi]
        p2 += n * (n - 1)
        nn += occ[xm] * occ[xp]
        if n >= 2:
            nu = list(occ)
            nu[xi] = n - 2
            nu[xm] += 1
            nu[xp] += 1
            amp = math.sqrt(n * (n - 1) * (occ[xm] + 1) * (occ[xp] + 1))
            splits.append((tuple(nu), amp))
        if occ[xm] >= 1 and occ[xp] >= 1 and (xm != xp):
            nu = list(occ)
            nu[xm] -= 1
            nu[xp] -= 1
            nu[xi] = n + 2
            amp = math.sqrt(occ[xm] * occ[xp] * (n + 1) * (n + 2))
            merges.append((tuple(nu), amp))
    return e, p2, nn, splits, merges


def invariant_closure(seeds, p=None, budget: int | None = None
                      ) -> list[tuple[int, ...]]:
    """Smallest config set containing the seeds and closed under nonzero
    matrix elements of every q_x^dag q_x, in lexicographic order.

    p may be HamiltonianParams or a bare boundary-condition string; the
    closure shape only depends on lambda being nonzero.
    """
    seeds = [s.occ if isinstance(s, Config) else tuple(s) for s in seeds]
    if p is None:
        bc = OBC
        lam_zero = False
    elif isinstance(p, str):
        bc = p
        lam_zero = False
    else:
        bc = p.bc
        lam_zero = complex(p.lam) == 0
    L = len(seeds[0])
    if any(len(s) != L for s in seeds):
        raise ValueError("seeds must share the site count")
    if lam_zero:
        return sorted(set(seeds))
    budget = budget if budget is not None else _budget()
    seen = set(seeds)
    frontier = list(seeds)
    while frontier:
        nxt = []
        for occ in frontier:
            _, _, _, splits, merges = _row_terms(occ, L, bc)
            for nu, _ in splits + merges:
                if nu not in seen:
                    seen.add(nu)
                    nxt.append(nu)
            if len(seen) > budget:
                raise BudgetExceeded(len(seen), budget, nxt)
        frontier = nxt
    return sorted(seen)


# ------------------------------------------------------- exact scalars

_SQRT2 = math.sqrt(2.0)


def _exact_sqrt(m: int):
    """sqrt(m) as (rational, rational*sqrt2) if m = 2^k * square, else None."""
    if m == 0:
        return Fraction(0), Fraction(0)
    root = math.isqrt(m)
    if root * root == m:
        return Fraction(root), Fraction(0)
    if m % 2 == 0:
        half = m // 2
        root = math.isqrt(half)
        if root * root == half:
            return Fraction(0), Fraction(root)
    return None


class Q2:
    """Exact numbers a + b*sqrt(2), a and b rational."""

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        self.a = Fraction(a)
        self.b = Fraction(b)

    def __add__(self, o):
        return Q2(self.a + o.a, self.b + o.b)

    def __sub__(self, o):
        return Q2(self.a - o.a, self.b - o.b)

    def __mul__(self, o):
        if isinstance(o, Q2):
            return Q2(self.a * o.a + 2 * self.b * o.b,
                      self.a * o.b + self.b * o.a)
        return Q2(self.a * o, self.b * o)

    __rmul__ = __mul__

    def __eq__(self, o):
        if isinstance(o, Q2):
            return self.a == o.a and self.b == o.b
        return self.b == 0 and self.a == o

    def __bool__(self):
        return self.a != 0 or self.b != 0

    def __float__(self):
        return float(self.a) + float(self.b) * _SQRT2

    def __repr__(self):
        return f"Q2({self.a}, {self.b})"


def _exact_params(p: HamiltonianParams):
    """(kappa, lam) as Fractions when the exact route applies, else None."""
    if not p.real_lambda:
        return None
    try:
        kap = Fraction(p.kappa).limit_denominator(10 ** 12)
        lam = Fraction(complex(p.lam).real).limit_denominator(10 ** 12)
    except (OverflowError, ValueError):
        return None
    if float(kap) != float(p.kappa) or float(lam) != complex(p.lam).real:
        return None
    return kap, lam


# ------------------------------------------------------- matrix assembly


@dataclass
class SparseMatrix:
    """CSR wrapper carrying dimension, a Hermitian flag, and optionally the
    exact Q2 entries from rational assembly."""

    mat: sp.csr_matrix
    hermitian: bool = True
    exact: dict | None = None

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @property
    def nnz(self) -> int:
        return self.mat.nnz

    def to_dense(self) -> np.ndarray:
        return self.mat.toarray()

    def export_text(self) -> str:
        coo = self.mat.tocoo()
        order = np.lexsort((coo.col, coo.row))
        lines = [f"{self.dim} {self.nnz} {int(self.hermitian)}"]
        for k in order:
            v = coo.data[k]
            lines.append(f"{coo.row[k]} {coo.col[k]} {v.real:.17g} {v.imag:.17g}")
        return "\n".join(lines) + "\n"


def build_matrix(basis, p: HamiltonianParams, *, projected: bool = False,
                 exact: bool | None = None) -> SparseMatrix:
    """Matrix of H on an ordered config basis.

    The basis must be H-invariant unless projected=True, in which case the
    operator is compressed to the span (the occupation-cap truncation).
    Exact Q2 assembly is used automatically for real rational parameters
    when every amplitude lives in Q[sqrt2]; it makes the leakage check
    binary and fills .exact.
    """
    basis = [b.occ if isinstance(b, Config) else tuple(b) for b in basis]
    L = len(basis[0])
    index = {occ: i for i, occ in enumerate(basis)}
    if len(index) != len(basis):
        raise ValueError("basis has duplicates")

    ex = _exact_params(p) if exact in (None, True) else None
    if exact is True and ex is None:
        raise ValueError("exact assembly needs real rational kappa and lambda")

    if ex is not None:
        built = _build_exact(basis, index, p, projected, ex)
        if built is not None:
            return built
        if exact is True:
            raise ValueError(
                "exact assembly hit an amplitude outside Q[sqrt2]")
    return _build_float(basis, index, p, projected)


def _build_exact(basis, index, p, projected, ex) -> SparseMatrix | None:
    """Q2 assembly; None when an amplitude falls outside Q[sqrt2]."""
    kq, lq = ex
    L = len(basis[0])
    rows, cols, vals = [], [], []
    exact_entries: dict = {}
    for j, occ in enumerate(basis):
        e, p2, nn, splits, merges = _row_terms(occ, L, p.bc)
        entries = {j: Q2(Fraction(int(e)) + kq * p2 + kq * lq * lq * nn)}
        for nu, amp in splits + merges:
            m = round(amp * amp)
            s = _exact_sqrt(m)
            if s is None or abs(amp * amp - m) > 1e-9:
                return None
            coeff = Q2(-kq * lq * s[0], -kq * lq * s[1])
            i = index.get(nu)
            if i is None:
                if coeff == Q2(0) or projected:
                    continue
                raise NotInvariant(config_text(nu, p.bc))
            entries[i] = entries.get(i, Q2()) + coeff
        for i, v in entries.items():
            if v:
                rows.append(i)
                cols.append(j)
                vals.append(float(v))
                exact_entries[(i, j)] = v
    mat = sp.csr_matrix(
        (np.array(vals, dtype=complex), (rows, cols)),
        shape=(len(basis), len(basis)))
    out = SparseMatrix(mat, hermitian=True, exact=exact_entries)
    _check_hermitian(out)
    return out


def _assemble_float_row(j, occ, L, p, index, projected, rows, cols, vals,
                        lam, kap):
    e, p2, nn, splits, merges = _row_terms(occ, L, p.bc)
    diag = e + kap * p2 + kap * abs(lam) ** 2 * nn
    acc = {j: complex(diag)}
    for coupling, moves in ((-kap * lam.conjugate(), splits),
                            (-kap * lam, merges)):
        for nu, amp in moves:
            i = index.get(nu)
            if i is None:
                if projected or abs(coupling * amp) <= 1e-14:
                    continue
                raise NotInvariant(config_text(nu, p.bc))
            acc[i] = acc.get(i, 0.0) + coupling * amp
    for i, v in acc.items():
        if v != 0:
            rows.append(i)
            cols.append(j)
            vals.append(v)


def _build_float(basis, index, p, projected) -> SparseMatrix:
    rows, cols, vals = [], [], []
    lam = complex(p.lam)
    for j, occ in enumerate(basis):
        _assemble_float_row(j, occ, len(occ), p, index, projected,
                            rows, cols, vals, lam, p.kappa)
    mat = sp.csr_matrix(
        (np.array(vals, dtype=complex), (rows, cols)),
        shape=(len(basis), len(basis)))
    out = SparseMatrix(mat, hermitian=True, exact=None)
    _check_hermitian(out)
    return out


def _check_hermitian(m: SparseMatrix):
    if not m.hermitian:
        return
    delta = (m.mat - m.mat.conjugate().transpose()).tocoo()
    if delta.nnz and np.max(np.abs(delta.data)) > 1e-14 * max(
            1.0, abs(m.mat).max()):
        raise AssertionError("assembled matrix is not Hermitian")


# ------------------------------------------------------- classifier


def classify_nontiling(mu, bc: str | None = None) -> int:
    """Which energy-estimate class a non-tiling configuration falls into.

    Rings (L >= 8): 1 = adjacent particles, 2 = triple occupancy,
    3 = doubly occupied pair at distance three, 4 = doubly occupied site
    with support at distance two. Open chains (L >= 5) add interior/edge
    splits: 2 and 4 are interior-only and 5 catches the boundary patterns.
    """
    if isinstance(mu, Config):
        occ, bc = mu.occ, mu.bc
    else:
        occ = tuple(mu)
        bc = bc or OBC
    L = len(occ)
    if bc == PER and L < 8:
        raise ValueError("periodic classifier needs L >= 8")
    if bc == OBC and L < 5:
        raise ValueError("open-chain classifier needs L >= 5")
    if isinstance(recognize(occ, bc), Tiling):
        raise ValueError(f"{config_text(occ, bc)} is a tiling configuration")

    if bc == PER:
        def at(x):
            return occ[(x - 1) % L]

        if any(at(x) * at(x + 1) >= 1 for x in range(1, L + 1)):
            return 1
        if any(at(x) >= 3 for x in range(1, L + 1)):
            return 2
        if any(at(x) == 2 and at(x + 3) == 2 for x in range(1, L + 1)):
            return 3
        if any(at(x) * at(x + 2) >= 2 for x in range(1, L + 1)):
            return 4
        raise RuntimeError(f"unclassifiable ring config {occ}")

    def at(x):  # open chain, zero outside
        return occ[x - 1] if 1 <= x <= L else 0

    if any(at(x) * at(x + 1) >= 1 for x in range(1, L)):
        return 1
    if any(at(x) >= 3 for x in range(2, L)):
        return 2
    if any(min(at(x), at(x + 3)) == 2 for x in range(1, L - 2)):
        return 3
    if any(at(x) == 2 and max(at(x - 2), at(x + 2)) >= 1 for x in range(2, L)):
        return 4
    if at(1) * at(3) >= 2 or at(L - 2) * at(L) >= 2:
        return 5
    raise RuntimeError(f"unclassifiable open-chain config {occ}")
