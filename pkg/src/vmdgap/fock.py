"""Occupation-number configurations, particle sectors, and sparse Fock vectors.

Sites are indexed 1..L in the public API. Internally occupations are plain
tuples, index 0 = site 1.
"""
from __future__ import annotations

from collections import namedtuple
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator

OBC = "obc"
PER = "per"
_BCS = (OBC, PER)


@dataclass(frozen=True)
class Config:
    """A particle configuration: occupation numbers plus boundary condition."""

    occ: tuple[int, ...]
    bc: str = OBC

    def __post_init__(self):
        if not isinstance(self.occ, tuple):
            object.__setattr__(self, "occ", tuple(self.occ))
        if len(self.occ) < 1:
            raise ValueError("configuration needs at least one site")
        if any(n < 0 for n in self.occ):
            raise ValueError("occupations must be non-negative")
        if self.bc not in _BCS:
            raise ValueError(f"unknown boundary condition {self.bc!r}")

    @property
    def L(self) -> int:
        return len(self.occ)

    @property
    def text(self) -> str:
        return config_text(self.occ, self.bc)

    @classmethod
    def from_text(cls, s: str) -> "Config":
        occ, bc = parse_config_text(s)
        return cls(occ, bc)

    def __str__(self) -> str:
        return self.text


def config_text(occ: Iterable[int], bc: str = OBC) -> str:
    occ = tuple(occ)
    if all(n <= 9 for n in occ):
        body = "".join(str(n) for n in occ)
    else:
        body = ",".join(str(n) for n in occ)
    return f"{body}:{bc}"


def parse_config_text(s: str) -> tuple[tuple[int, ...], str]:
    body, _, bc = s.partition(":")
    bc = bc or OBC
    if bc not in _BCS:
        raise ValueError(f"unknown boundary condition suffix {bc!r}")
    if "," in body:
        occ = tuple(int(t) for t in body.split(","))
    else:
        occ = tuple(int(ch) for ch in body)
    if not occ:
        raise ValueError("empty configuration text")
    return occ, bc


def enumerate_configs(L: int, N: int, n_max: int) -> list[tuple[int, ...]]:
    """All occupation tuples with given site count, total N, per-site cap.

    Lexicographically ordered. Returns bare tuples; wrap in Config to attach
    a boundary condition.
    """
    if L < 1 or N < 0 or n_max < 0:
        raise ValueError("need L >= 1, N >= 0, n_max >= 0")
    out: list[tuple[int, ...]] = []
    buf = [0] * L

    def rec(i: int, left: int):
        if i == L - 1:
            if left <= n_max:
                buf[i] = left
                out.append(tuple(buf))
            return
        for n in range(min(left, n_max) + 1):
            buf[i] = n
            rec(i + 1, left - n)

    rec(0, N)
    return out


@lru_cache(maxsize=None)
def sector_dim(L: int, N: int, n_max: int) -> int:
    """Number of compositions of N into L parts, each part <= n_max."""
    if N < 0:
        return 0
    if L == 0:
        return 1 if N == 0 else 0
    return sum(sector_dim(L - 1, N - k, n_max) for k in range(min(N, n_max) + 1))


def _pack(occ: tuple[int, ...], width: int) -> int:
    key = 0
    for n in occ:
        key = (key << width) | n
    return key


@dataclass
class Sector:
    """Fixed (L, N) particle sector with a per-site occupation cap."""

    L: int
    N: int
    n_max: int
    configs: list[tuple[int, ...]] = field(init=False, repr=False)
    _index: dict[int, int] = field(init=False, repr=False)
    _width: int = field(init=False, repr=False)

    def __post_init__(self):
        self.configs = enumerate_configs(self.L, self.N, self.n_max)
        self._width = max(self.n_max.bit_length(), 1)
        self._index = {_pack(c, self._width): i for i, c in enumerate(self.configs)}

    @property
    def dim(self) -> int:
        return len(self.configs)

    def rank(self, occ: tuple[int, ...]) -> int:
        return self._index[_pack(occ, self._width)]

    def rank_or_none(self, occ: tuple[int, ...]):
        return self._index.get(_pack(occ, self._width))

    def unrank(self, i: int) -> tuple[int, ...]:
        return self.configs[i]

    def __contains__(self, occ: tuple[int, ...]) -> bool:
        return _pack(occ, self._width) in self._index if max(occ, default=0) <= self.n_max else False

    def __len__(self) -> int:
        return self.dim


def ladder(mu: Config, x: int, direction: str) -> Config | None:
    """Add or remove one particle at site x (1-based). Lowering the vacuum
    at x returns None."""
    if not 1 <= x <= mu.L:
        raise IndexError(f"site {x} outside 1..{mu.L}")
    occ = list(mu.occ)
    if direction == "raise":
        occ[x - 1] += 1
    elif direction == "lower":
        if occ[x - 1] == 0:
            return None
        occ[x - 1] -= 1
    else:
        raise ValueError(f"direction must be 'raise' or 'lower', got {direction!r}")
    return Config(tuple(occ), mu.bc)


Observables = namedtuple("Observables", "N dipole dipole_mod")


def observables(mu: Config | tuple[int, ...], bc: str | None = None) -> Observables:
    """Total particle number and dipole moment sum_x x*occ_x (1-based).

    dipole_mod is the dipole reduced mod L for periodic chains, else None.
    """
    if isinstance(mu, Config):
        occ, bc = mu.occ, mu.bc
    else:
        occ = tuple(mu)
        bc = bc or OBC
    N = sum(occ)
    dip = sum((x + 1) * n for x, n in enumerate(occ))
    return Observables(N, dip, dip % len(occ) if bc == PER else None)


class SparseState:
    """A vector in Fock space stored as a map occupation-tuple -> amplitude.

    L = 0 (the empty chain, amplitude keyed by ()) is allowed so that
    tensor-product recursions have a unit element.
    """

    __slots__ = ("L", "bc", "amps")

    def __init__(self, L: int, bc: str = OBC, amps: dict | None = None):
        if bc not in _BCS:
            raise ValueError(f"unknown boundary condition {bc!r}")
        self.L = L
        self.bc = bc
        self.amps: dict[tuple[int, ...], complex] = dict(amps) if amps else {}

    @classmethod
    def basis(cls, occ: Iterable[int], bc: str = OBC) -> "SparseState":
        occ = tuple(occ)
        return cls(len(occ), bc, {occ: 1.0})

    @classmethod
    def unit(cls, bc: str = OBC) -> "SparseState":
        """The empty-chain state (scalar 1)."""
        return cls(0, bc, {(): 1.0})

    def copy(self) -> "SparseState":
        return SparseState(self.L, self.bc, self.amps)

    def _check(self, other: "SparseState"):
        if self.L != other.L or self.bc != other.bc:
            raise ValueError(
                f"state mismatch: ({self.L},{self.bc}) vs ({other.L},{other.bc})")

    def add(self, other: "SparseState", coeff: complex = 1.0) -> "SparseState":
        self._check(other)
        out = dict(self.amps)
        for k, v in other.amps.items():
            w = out.get(k, 0.0) + coeff * v
            if w == 0:
                out.pop(k, None)
            else:
                out[k] = w
        return SparseState(self.L, self.bc, out)

    def __add__(self, other):
        return self.add(other)

    def sub(self, other: "SparseState", coeff: complex = 1.0) -> "SparseState":
        return self.add(other, -coeff)

    def __sub__(self, other):
        return self.add(other, -1.0)

    def scale(self, c: complex) -> "SparseState":
        if c == 0:
            return SparseState(self.L, self.bc)
        return SparseState(self.L, self.bc, {k: c * v for k, v in self.amps.items()})

    def __mul__(self, c):
        return self.scale(c)

    __rmul__ = __mul__

    def tensor(self, other: "SparseState") -> "SparseState":
        if self.bc != other.bc:
            raise ValueError("cannot tensor states with different boundary conditions")
        amps = {}
        for k1, v1 in self.amps.items():
            for k2, v2 in other.amps.items():
                amps[k1 + k2] = v1 * v2
        return SparseState(self.L + other.L, self.bc, amps)

    def inner(self, other: "SparseState") -> complex:
        """<self|other>, conjugate-linear in self."""
        self._check(other)
        a, b = self.amps, other.amps
        if len(b) < len(a):
            return sum(a[k].conjugate() * v for k, v in b.items() if k in a)
        return sum(v.conjugate() * b[k] for k, v in a.items() if k in b)

    def norm2(self) -> float:
        return sum(abs(v) ** 2 for v in self.amps.values())

    def norm(self) -> float:
        return self.norm2() ** 0.5

    def prune(self, tol: float = 0.0) -> "SparseState":
        return SparseState(
            self.L, self.bc, {k: v for k, v in self.amps.items() if abs(v) > tol})

    def to_vector(self, sector: Sector):
        import numpy as np

        v = np.zeros(sector.dim, dtype=complex)
        for occ, amp in self.amps.items():
            v[sector.rank(occ)] = amp
        return v

    def __iter__(self) -> Iterator[tuple[tuple[int, ...], complex]]:
        return iter(self.amps.items())

    def __len__(self) -> int:
        return len(self.amps)

    def __repr__(self) -> str:
        terms = ", ".join(
            f"{config_text(k, self.bc)}: {v:.6g}" for k, v in sorted(self.amps.items()))
        return f"SparseState(L={self.L}, {{{terms}}})"


def inner(psi: SparseState, phi: SparseState) -> complex:
    """<psi|phi> = sum_mu conj(psi(mu)) phi(mu)."""
    return psi.inner(phi)
