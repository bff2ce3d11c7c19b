"""Named vectors: tiling superpositions, squeezed Tao-Thouless states,
their excited companions, scars, and the variational bound state.

All constructors return unnormalized states with the root configuration at
amplitude one; norms are separate calls since every recursion identity in
the analysis is stated for unnormalized vectors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .fock import OBC, PER, SparseState, config_text
from .tiling import (M, M1, PER_FAMILY, Tile, Tiling, TilingFamily,
                     expand_class, obc_all)

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class NamedState:
    kind: str
    value: SparseState
    lam: complex
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        items = sorted(self.value.amps.items())
        return {
            "kind": self.kind,
            "lambda": [complex(self.lam).real, complex(self.lam).imag],
            "L": self.value.L,
            "bc": self.value.bc,
            "amplitudes": [
                {"config": config_text(occ, self.value.bc),
                 "re": complex(a).real, "im": complex(a).imag}
                for occ, a in items
            ],
            **self.meta,
        }


def _family_for(root: Tiling) -> TilingFamily:
    if root.bc == PER:
        return PER_FAMILY
    cap = max([t.n for t in root.tiles if t.n is not None] + [2])
    return obc_all(cap)


def bvmd_state(root: Tiling, lam: complex, family: TilingFamily | None = None
               ) -> SparseState:
    """Superposition over the root's class with weight (lam/sqrt2)^dimers."""
    fam = family or _family_for(root)
    w = complex(lam) / _SQRT2
    amps = {}
    for t in expand_class(root, fam):
        amps[t.config()] = w ** t.d
    return SparseState(root.L, root.bc, amps)


def bvmd_gram(root: Tiling, lam: complex, family: TilingFamily | None = None
              ) -> float:
    """Squared norm sum_T (|lam|^2/2)^d over the class, without the state."""
    fam = family or _family_for(root)
    s = abs(complex(lam)) ** 2 / 2.0
    return float(sum(s ** t.d for t in expand_class(root, fam)))


def monomer_root(n: int, i: int) -> Tiling:
    """n trailing monomers, the last full (i=2) or truncated (i=1)."""
    if i not in (1, 2):
        raise ValueError("i must be 1 or 2")
    if n < 1:
        raise ValueError("need at least one monomer")
    tiles = [M] * (n - 1) + [M if i == 2 else M1]
    return Tiling.chain(tiles)


def tao_thouless(n: int, i: int, lam: complex) -> SparseState:
    """phi_n^(i) on 2(n-1)+i sites; phi_0 is the empty-chain unit."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return SparseState.unit(OBC)
    return bvmd_state(monomer_root(n, i), lam)


def tt_norm2(n: int, r) -> Fraction | float:
    """|phi_n|^2 from the two-step recursion, r = |lambda|^2.

    Exact when r is a Fraction; independent of i.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    exact = isinstance(r, (int, Fraction))
    half = Fraction(r) / 2 if exact else r / 2.0
    one = Fraction(1) if exact else 1.0
    if n <= 1:
        return one
    a, b = one, one
    for _ in range(n - 1):
        a, b = b, b + half * a
    return b


def beta_ratio(n: int, r: float) -> float:
    """|phi_{n-1}|^2 / |phi_n|^2 in closed form."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if r < 0:
        raise ValueError("r must be >= 0")
    root = math.sqrt(1.0 + 2.0 * r)
    bp = (1.0 + root) / 2.0
    bm = (1.0 - root) / 2.0
    if r == 0:
        return 1.0
    q = bm / bp
    return (1.0 - q ** n) / (bp * (1.0 - q ** (n + 1)))


def beta_limit(r: float) -> float:
    return 2.0 / (1.0 + math.sqrt(1.0 + 2.0 * r))


_DIMER_TAIL = {1: (0, 2, 0), 2: (0, 2, 0, 0)}


def eta_state(n: int, i: int, lam: complex) -> SparseState:
    """eta_n^(i) = -(conj(lam)/sqrt2) beta_{n-1} phi_{n-1} x phi_1^(i)
    + phi_{n-2} x |dimer tail>; orthogonal companion to phi_n^(i)."""
    if n < 2:
        raise ValueError("eta needs n >= 2")
    if i not in (1, 2):
        raise ValueError("i must be 1 or 2")
    lam = complex(lam)
    beta = beta_ratio(n - 1, abs(lam) ** 2)
    a = tao_thouless(n - 1, 2, lam).tensor(tao_thouless(1, i, lam))
    b = tao_thouless(n - 2, 2, lam).tensor(
        SparseState.basis(_DIMER_TAIL[i], OBC))
    return a.scale(-lam.conjugate() / _SQRT2 * beta).add(b)


def eta_norm2(n: int, r: float) -> float:
    """|eta_n|^2 = |phi_{n-2}|^2 (1 + beta_{n-1} r / 2)."""
    if n < 2:
        raise ValueError("eta needs n >= 2")
    return float(tt_norm2(n - 2, float(r))) * (
        1.0 + beta_ratio(n - 1, r) * r / 2.0)


def trailing_monomers(root: Tiling) -> tuple[int, int]:
    """(n, i) of the maximal monomer run ending the root."""
    n = 0
    i = 2
    for k, t in enumerate(reversed(root.tiles)):
        if t.kind == "M1" and k == 0:
            i = 1
            n += 1
        elif t.kind == "M":
            n += 1
        else:
            break
    return n, i


def xi_state(root: Tiling, lam: complex) -> SparseState:
    """Excited companion on a root ending in >= 2 monomers: the class
    superposition on the head tensored with eta on the monomer tail."""
    if root.bc != OBC:
        raise ValueError("xi is an open-chain construction")
    n, i = trailing_monomers(root)
    if n < 2:
        raise ValueError(
            f"root {root.text} does not end in two monomers")
    head_tiles = root.tiles[:len(root.tiles) - n]
    if head_tiles:
        head = bvmd_state(Tiling.chain(head_tiles), lam)
    else:
        head = SparseState.unit(OBC)
    return head.tensor(eta_state(n, i, lam))


def eta_mirror(r: int, lam: complex) -> SparseState:
    """Left-defect variant used by the variational bound state:
    -(conj(lam)/sqrt2) beta_{r-1} |10> x phi_{r-1} + |0200> x phi_{r-2}."""
    if r < 2:
        raise ValueError("needs r >= 2")
    lam = complex(lam)
    beta = beta_ratio(r - 1, abs(lam) ** 2)
    a = SparseState.basis((1, 0), OBC).tensor(tao_thouless(r - 1, 2, lam))
    b = SparseState.basis((0, 2, 0, 0), OBC).tensor(
        tao_thouless(r - 2, 2, lam))
    return a.scale(-lam.conjugate() / _SQRT2 * beta).add(b)


def variational_excited(l: int, r: int, kappa: float, lam: complex
                        ) -> SparseState:
    """Trial state for the lowest particle-hole excitation,
    phi_l x |0> x psi with
    psi = (|101> + (sqrt2 k lam/(2k-1)) |020>) x phi_r
          + (sqrt2 lam/(2(2k-1))) |101> x eta_r.

    The correction coefficients are fixed by first-order perturbation
    theory in lam: the |020> head and the head-adjacent dimer see level
    spacing 2k-1 instead of the bulk 2k, so their weights deviate from the
    plain Tao-Thouless pattern. With these weights the Rayleigh quotient
    reproduces 1 - 2k/(2k-1) |lam|^2 up to O(lam^4).
    """
    if l < 3 or r < 3:
        raise ValueError("needs l, r >= 3")
    if kappa <= 0.5:
        raise ValueError("the expansion needs kappa > 1/2")
    lam = complex(lam)
    c = _SQRT2 * lam / (2.0 * kappa - 1.0)
    head = SparseState.basis((1, 0, 1), OBC).add(
        SparseState.basis((0, 2, 0), OBC), kappa * c)
    psi = head.tensor(tao_thouless(r, 2, lam)).add(
        SparseState.basis((1, 0, 1), OBC).tensor(eta_mirror(r, lam)), c / 2.0)
    return tao_thouless(l, 2, lam).tensor(
        SparseState.basis((0,), OBC)).tensor(psi)


def scar_state(l: int, r: int, lam: complex, n_excite: int = 1) -> SparseState:
    """phi_l x |(0110)^n 0> x phi_r^(1); eigenvector at energy n_excite."""
    if n_excite < 1:
        raise ValueError("n_excite must be >= 1")
    mid = (0, 1, 1, 0) * n_excite + (0,)
    return tao_thouless(l, 2, lam).tensor(
        SparseState.basis(mid, OBC)).tensor(tao_thouless(r, 1, lam))


def named(kind: str, value: SparseState, lam: complex, **meta) -> NamedState:
    return NamedState(kind, value, lam, dict(meta))
