"""Tiles, root tilings, replacement-rule closures, and config recognition.

The dictionary: a void V=(0), a monomer M=(10), a truncated monomer M1=(1)
allowed at the right boundary, a dimer D=(0200) and its truncated form
D1=(020) at the right boundary, and boundary tiles Bl(n)=(n00), Br(n)=(0n)
for n >= 2. Edge families add tiles with an extra particle stuck to the
boundary; the excited family adds the displaced-monomer tile Q01=(01).

Replacement rules (bidirectional, realized by the dipole hopping):
    bulk       (1010) <-> (0200)            anywhere
    right edge (101)  <-> (020)             last three sites, open bc
    edge left  (a,0,1,0) <-> (a-1,2,0,0)    first four sites, a >= 2
    edge right (1,0,b) <-> (0,2,b-1)        last three sites, b >= 2
    excited    (10200) <-> (02100)  and  (02010) <-> (01200)   anywhere
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .fock import OBC, PER, Config, config_text

# ---------------------------------------------------------------- tiles


@dataclass(frozen=True)
class Tile:
    kind: str
    n: int | None = None

    _FIXED = {
        "V": (0,),
        "M": (1, 0),
        "M1": (1,),
        "D": (0, 2, 0, 0),
        "D1": (0, 2, 0),
        "Q01": (0, 1),
    }

    def __post_init__(self):
        if self.kind in self._FIXED:
            if self.n is not None:
                raise ValueError(f"tile {self.kind} takes no parameter")
        elif self.kind in ("Bl", "Br", "En010", "Enm1_200", "En0200", "En0020",
                           "E10n", "E02nm1", "E0200n"):
            if self.n is None or self.n < 2:
                raise ValueError(f"tile {self.kind} needs parameter n >= 2")
        else:
            raise ValueError(f"unknown tile kind {self.kind!r}")

    @property
    def pattern(self) -> tuple[int, ...]:
        if self.kind in self._FIXED:
            return self._FIXED[self.kind]
        n = self.n
        return {
            "Bl": (n, 0, 0),
            "Br": (0, n),
            "En010": (n, 0, 1, 0),
            "Enm1_200": (n - 1, 2, 0, 0),
            "En0200": (n, 0, 0, 2, 0, 0),
            # right-truncated form of the above, against a truncated monomer
            "En0020": (n, 0, 0, 2, 0),
            "E10n": (1, 0, n),
            "E02nm1": (0, 2, n - 1),
            "E0200n": (0, 2, 0, 0, n),
        }[self.kind]

    @property
    def length(self) -> int:
        return len(self.pattern)

    @property
    def text(self) -> str:
        return "(" + "".join(str(x) for x in self.pattern) + ")"

    def __str__(self):
        return self.text


V = Tile("V")
M = Tile("M")
M1 = Tile("M1")
D = Tile("D")
D1 = Tile("D1")
Q01 = Tile("Q01")


def Bl(n: int) -> Tile:
    return Tile("Bl", n)


def Br(n: int) -> Tile:
    return Tile("Br", n)


B2L = Bl(2)
B2R = Br(2)

_DIMER_KINDS = ("D", "D1")


@dataclass(frozen=True)
class Tiling:
    """An ordered tile cover of [1, L]; periodic covers wrap around."""

    tiles: tuple[Tile, ...]
    L: int
    bc: str
    starts: tuple[int, ...]

    def __post_init__(self):
        cover = [0] * self.L
        for t, s in zip(self.tiles, self.starts):
            for k in range(t.length):
                cover[(s - 1 + k) % self.L] += 1
        if any(c != 1 for c in cover):
            raise ValueError("tiles do not partition the chain")

    @classmethod
    def chain(cls, tiles, bc: str = OBC) -> "Tiling":
        """Open-chain tiling: tiles laid end to end from site 1."""
        tiles = tuple(tiles)
        starts, s = [], 1
        for t in tiles:
            starts.append(s)
            s += t.length
        return cls(tiles, s - 1, bc, tuple(starts))

    @classmethod
    def ring(cls, placed, L: int) -> "Tiling":
        """Periodic tiling from (start, tile) pairs; sorted by start."""
        placed = sorted(placed)
        return cls(tuple(t for _, t in placed), L, PER,
                   tuple(s for s, _ in placed))

    @property
    def d(self) -> int:
        return sum(1 for t in self.tiles if t.kind in _DIMER_KINDS)

    def config(self) -> tuple[int, ...]:
        occ = [0] * self.L
        for t, s in zip(self.tiles, self.starts):
            for k, v in enumerate(t.pattern):
                occ[(s - 1 + k) % self.L] = v
        return tuple(occ)

    def config_obj(self) -> Config:
        return Config(self.config(), self.bc)

    @property
    def text(self) -> str:
        if self.bc == PER:
            return " ".join(f"{t.text}@{s}"
                            for t, s in zip(self.tiles, self.starts))
        return "".join(t.text for t in self.tiles)

    def to_json(self) -> dict:
        return {
            "tiles": [
                {"kind": t.kind, "n": t.n, "pattern": t.text, "start": s}
                for t, s in zip(self.tiles, self.starts)
            ],
            "config": config_text(self.config(), self.bc),
            "d": self.d,
        }

    def __str__(self):
        return self.text


# ---------------------------------------------------------------- families


@dataclass(frozen=True)
class TilingFamily:
    """Selector for one of the invariant tiling families."""

    kind: str  # obc_all | obc_bulk | per | edge | excited
    n_cap: int | None = None
    l: int | None = None
    r: int | None = None
    m: int | None = None

    def __post_init__(self):
        if self.kind in ("obc_all", "edge"):
            if self.n_cap is None or self.n_cap < 2:
                raise ValueError(f"family {self.kind} needs n_cap >= 2")
        elif self.kind == "excited":
            if any(v is None for v in (self.l, self.r, self.m)):
                raise ValueError("excited family needs l, r, m")
            if self.l < 0 or self.r < 1 or self.m < 1:
                raise ValueError("excited family needs l >= 0, r >= 1, m >= 1")
        elif self.kind not in ("obc_bulk", "per"):
            raise ValueError(f"unknown family {self.kind!r}")


def obc_all(n_cap: int) -> TilingFamily:
    return TilingFamily("obc_all", n_cap=n_cap)


def edge_family(n_cap: int) -> TilingFamily:
    return TilingFamily("edge", n_cap=n_cap)


def excited_family(l: int, r: int, m: int) -> TilingFamily:
    return TilingFamily("excited", l=l, r=r, m=m)


OBC_BULK = TilingFamily("obc_bulk")
PER_FAMILY = TilingFamily("per")


# ---------------------------------------------------------------- recognition


@dataclass(frozen=True)
class Rejection:
    condition: int
    site: int

    @property
    def message(self) -> str:
        return f"Condition {self.condition} violated at x={self.site}"

    def __str__(self):
        return self.message


class UnsupportedLength(ValueError):
    pass


def recognize(mu: Config | tuple[int, ...], bc: str | None = None):
    """Parse a configuration as a tiling, or report the violated condition.

    Open chains: (1) occupations >= 3 only at the boundary sites, (2) a
    particle forces empty neighbors, (3) a doubly-occupied site forces empty
    sites at distance 2 and at most one particle at distance 3. Periodic
    chains: the last two conditions with cyclic distances (occupation >= 3
    never occurs on a ring and is reported against condition 2).
    """
    if isinstance(mu, Config):
        occ, bc = mu.occ, mu.bc
    else:
        occ = tuple(mu)
        bc = bc or OBC
    L = len(occ)
    if L < 4:
        raise UnsupportedLength(f"recognition needs L >= 4, got {L}")
    return _recognize_obc(occ) if bc == OBC else _recognize_per(occ)


def _recognize_obc(occ: tuple[int, ...]):
    L = len(occ)

    def at(x):  # 1-based, zero outside
        return occ[x - 1] if 1 <= x <= L else 0

    for x in range(1, L + 1):
        if at(x) >= 3 and x not in (1, L):
            return Rejection(1, x)
    for x in range(1, L + 1):
        if at(x) >= 1 and (at(x - 1) >= 1 or at(x + 1) >= 1):
            return Rejection(2, x)
    for x in range(1, L + 1):
        if at(x) >= 2:
            if at(x - 2) != 0 or at(x + 2) != 0 or at(x - 3) >= 2 or at(x + 3) >= 2:
                return Rejection(3, x)

    placed: list[tuple[int, Tile]] = []
    covered = [False] * (L + 1)

    def put(start: int, tile: Tile):
        placed.append((start, tile))
        for k in range(tile.length):
            covered[start + k] = True

    for x in range(1, L + 1):
        n = at(x)
        if n == 0:
            continue
        if n >= 3:
            put(1 if x == 1 else L - 1, Bl(n) if x == 1 else Br(n))
        elif n == 2:
            if x == 1:
                put(1, B2L)
            elif x == L:
                put(L - 1, B2R)
            elif x == L - 1:
                put(L - 2, D1)
            else:
                put(x - 1, D)
        else:
            put(x, M1 if x == L else M)
    for x in range(1, L + 1):
        if not covered[x] and at(x) == 0:
            put(x, V)
    placed.sort()
    tiling = Tiling(tuple(t for _, t in placed), L, OBC,
                    tuple(s for s, _ in placed))
    assert tiling.config() == occ
    return tiling


def _recognize_per(occ: tuple[int, ...]):
    L = len(occ)

    def at(x):  # cyclic, 1-based
        return occ[(x - 1) % L]

    for x in range(1, L + 1):
        if at(x) >= 1 and at(x + 1) >= 1:
            return Rejection(1, x)
    for x in range(1, L + 1):
        if at(x) >= 3:
            return Rejection(2, x)
        if at(x) == 2:
            if at(x - 2) != 0 or at(x + 2) != 0 or at(x - 3) >= 2 or at(x + 3) >= 2:
                return Rejection(2, x)

    placed = []
    for x in range(1, L + 1):
        n = at(x)
        if n == 1:
            placed.append((x, M))
        elif n == 2:
            placed.append(((x - 2) % L + 1, D))
    covered = set()
    for s, t in placed:
        covered.update((s - 1 + k) % L for k in range(t.length))
    for x in range(L):
        if x not in covered:
            placed.append((x + 1, V))
    tiling = Tiling.ring(placed, L)
    assert tiling.config() == occ
    return tiling


def is_tiling_config(mu, bc: str | None = None) -> bool:
    return isinstance(recognize(mu, bc), Tiling)


# ---------------------------------------------------------------- roots


@lru_cache(maxsize=None)
def count_roots(L: int) -> int:
    """Number of void/monomer strings of total length L (r_0 = 1, r_1 = 1,
    r_2 = 2, then the Fibonacci recursion)."""
    if L < 0:
        return 0
    a, b = 1, 1  # r_0, r_1
    for _ in range(L):
        a, b = b, a + b
    return a


def count_roots_binet(L: int) -> int:
    """Closed form ((1+sqrt5)/2)^(L+1) - ((1-sqrt5)/2)^(L+1) over sqrt5,
    evaluated exactly in integer arithmetic on Z[(1+sqrt5)/2]."""
    if L < 0:
        return 0
    # (a + b*sqrt5)/2 ** k, stored as (a, b)
    a, b = 1, 1  # (1+sqrt5)/2
    pa, pb = 2, 0  # 1
    k = L + 1
    while k:
        if k & 1:
            pa, pb = (pa * a + 5 * pb * b) // 2, (pa * b + pb * a) // 2
        a, b = (a * a + 5 * b * b) // 2, a * b
        k >>= 1
    # result = pb (the sqrt5 coefficient doubles as the division by sqrt5)
    return pb


@lru_cache(maxsize=None)
def _vm_strings(n: int) -> tuple[tuple[Tile, ...], ...]:
    """All void/monomer tile strings of total length n."""
    if n < 0:
        return ()
    if n == 0:
        return ((),)
    out = [(V,) + rest for rest in _vm_strings(n - 1)]
    out += [(M,) + rest for rest in _vm_strings(n - 2)]
    return tuple(out)


def enumerate_roots(L: int, family: TilingFamily) -> list[Tiling]:
    """All dimer-free root tilings of the family on L sites."""
    if L < 4:
        raise UnsupportedLength(f"root enumeration needs L >= 4, got {L}")
    if family.kind == "per":
        return _per_roots(L)
    if family.kind == "excited":
        l, r, m = family.l, family.r, family.m
        if L != 2 * (l + r + m):
            raise ValueError(
                f"excited({l},{r},{m}) lives on {2*(l+r+m)} sites, got {L}")
        return [Tiling.chain((M,) * l + (Q01,) * m + (M,) * r)]

    if family.kind == "obc_bulk":
        firsts = [V, M, B2L]
        lasts = [V, M, M1, B2R]
    elif family.kind == "obc_all":
        ns = range(2, family.n_cap + 1)
        firsts = [V, M] + [Bl(n) for n in ns]
        lasts = [V, M, M1] + [Br(n) for n in ns]
    elif family.kind == "edge":
        ns = range(2, family.n_cap + 1)
        firsts = [V, M] + [Bl(n) for n in ns] + [Tile("En010", n) for n in ns]
        lasts = [V, M, M1] + [Br(n) for n in ns] + [Tile("E10n", n) for n in ns]
    else:
        raise ValueError(f"unknown family {family.kind!r}")

    roots = []
    for f in firsts:
        for g in lasts:
            mid = L - f.length - g.length
            for interior in _vm_strings(mid):
                roots.append(Tiling.chain((f,) + interior + (g,)))
    if family.kind == "edge":
        roots = [R for R in roots
                 if R.tiles[0].kind == "En010" or R.tiles[-1].kind == "E10n"]
    return roots


def _per_roots(L: int) -> list[Tiling]:
    """Monomer/void ring covers = independent sets of monomer starts on the
    cycle (no two starts at cyclic distance < 2)."""
    roots = []

    def build(starts):
        placed = [(s, M) for s in starts]
        covered = set()
        for s in starts:
            covered.add((s - 1) % L)
            covered.add(s % L)
        placed += [(x + 1, V) for x in range(L) if x not in covered]
        roots.append(Tiling.ring(placed, L))

    def rec(x, chosen):
        if x > L:
            build(chosen)
            return
        rec(x + 1, chosen)  # no monomer starting at x
        if chosen and x - chosen[-1] < 2:
            return
        if x == L and chosen and chosen[0] == 1:
            return  # monomer at L covers site 1 too
        rec(x + 1, chosen + [x])

    rec(1, [])
    return roots


# ---------------------------------------------------------------- closure


def _family_rules(family: TilingFamily):
    """Config-window rewrite rules as (pattern, replacement, where) triples.

    where: 'any' = every window (cyclic for periodic chains),
           'right' = window ending at site L, 'left' = window starting at 1.
    Parameterized boundary rules are handled separately.
    """
    bulk = [((1, 0, 1, 0), (0, 2, 0, 0), "any"),
            ((0, 2, 0, 0), (1, 0, 1, 0), "any")]
    edge3 = [((1, 0, 1), (0, 2, 0), "right"),
             ((0, 2, 0), (1, 0, 1), "right")]
    if family.kind == "per":
        return bulk
    if family.kind in ("obc_all", "obc_bulk", "edge"):
        return bulk + edge3
    if family.kind == "excited":
        rules = bulk + [((1, 0, 2, 0, 0), (0, 2, 1, 0, 0), "any"),
                        ((0, 2, 1, 0, 0), (1, 0, 2, 0, 0), "any")]
        if family.m >= 2:
            rules += [((1, 0, 1), (0, 2, 0), "any"),
                      ((0, 2, 0), (1, 0, 1), "any"),
                      ((0, 2, 0, 1, 0), (0, 1, 2, 0, 0), "any"),
                      ((0, 1, 2, 0, 0), (0, 2, 0, 1, 0), "any")]
        return rules
    raise ValueError(f"unknown family {family.kind!r}")


def _neighbors(occ: tuple[int, ...], family: TilingFamily, bc: str):
    L = len(occ)
    out = []
    for pat, rep, where in _family_rules(family):
        w = len(pat)
        if where == "any":
            positions = range(L) if bc == PER else range(L - w + 1)
        elif where == "right":
            positions = [L - w]
        else:
            positions = [0]
        for p in positions:
            if bc == PER:
                window = tuple(occ[(p + k) % L] for k in range(w))
            else:
                window = occ[p:p + w]
            if window != pat:
                continue
            nxt = list(occ)
            for k in range(w):
                nxt[(p + k) % L] = rep[k]
            out.append(tuple(nxt))
    if family.kind == "edge":
        # left: (a,0,1,0) <-> (a-1,2,0,0) for a >= 2, first four sites
        a = occ[0]
        if a >= 2 and occ[1:4] == (0, 1, 0):
            out.append((a - 1, 2, 0, 0) + occ[4:])
        if a >= 1 and occ[1:4] == (2, 0, 0):
            out.append((a + 1, 0, 1, 0) + occ[4:])
        # right: (1,0,b) <-> (0,2,b-1) for b >= 2, last three sites
        b = occ[-1]
        if b >= 2 and occ[-3:-1] == (1, 0):
            out.append(occ[:-3] + (0, 2, b - 1))
        if b >= 1 and occ[-3:-1] == (0, 2):
            out.append(occ[:-3] + (1, 0, b + 1))
    return out


def expand_class(R: Tiling, family: TilingFamily) -> list[Tiling]:
    """BFS closure of a root under the family's replacement rules.

    Members are returned in lexicographic configuration order, each parsed
    back into a Tiling (so it carries its dimer count).
    """
    root = R.config()
    seen = {root}
    frontier = [root]
    while frontier:
        nxt = []
        for occ in frontier:
            for nb in _neighbors(occ, family, R.bc):
                if nb not in seen:
                    seen.add(nb)
                    nxt.append(nb)
        frontier = nxt
    members = sorted(seen)
    return [_parse_member(occ, R, family) for occ in members]


def _parse_member(occ: tuple[int, ...], R: Tiling, family: TilingFamily) -> Tiling:
    if family.kind in ("obc_all", "obc_bulk", "per"):
        if R.bc == OBC and len(occ) < 4:
            tiles = _backtrack_parse(occ, _bvmd_candidates)
            if tiles is None:
                raise RuntimeError(
                    f"closure left the tiling family: {config_text(occ, R.bc)}")
            return Tiling.chain(tiles)
        t = recognize(occ, R.bc)
        if not isinstance(t, Tiling):
            raise RuntimeError(
                f"closure left the tiling family: {config_text(occ, R.bc)} ({t})")
        return t
    if family.kind == "edge":
        tiles = _backtrack_parse(occ, _edge_candidates)
    else:
        tiles = _parse_excited(occ, family)
    if tiles is None:
        raise ValueError(f"cannot parse class member {occ}")
    starts, s = [], 1
    for t in tiles:
        starts.append(s)
        s += t.length
    tiling = Tiling(tuple(tiles), len(occ), OBC, tuple(starts))
    assert tiling.config() == occ
    return tiling


def _backtrack_parse(occ, candidates):
    """Parse occ into tiles, trying candidates(occ, i) in order at each cut."""
    L = len(occ)

    def rec(i):
        if i == L:
            return []
        for t in candidates(occ, i):
            p = t.pattern
            if occ[i:i + len(p)] == p:
                tail = rec(i + len(p))
                if tail is not None:
                    return [t] + tail
        return None

    return rec(0)


def _bvmd_candidates(occ, i):
    L = len(occ)
    out = []
    if i == 0 and occ[0] >= 2:
        out.append(Bl(occ[0]))
    last = occ[-1]
    if last >= 2 and i + 2 == L:
        out.append(Br(last))
    if L - i == 3:
        out.append(D1)
    if L - i == 1:
        out.append(M1)
    out += [D, M, V]
    return out


def _edge_candidates(occ, i):
    L = len(occ)
    out = []
    if i == 0 and occ[0] >= 2:
        n = occ[0]
        out += [Tile("En0200", n), Tile("En0020", n), Tile("En010", n), Bl(n)]
    if i == 0 and occ[0] >= 1:
        out.append(Tile("Enm1_200", occ[0] + 1))
    # tiles that must end exactly at the right boundary
    last = occ[-1]
    if last >= 2:
        for t in (Tile("E0200n", last), Tile("E02nm1", last + 1),
                  Tile("E10n", last), Br(last)):
            if i + t.length == L:
                out.append(t)
    if last == 1 and L - i == 3:
        out.append(Tile("E02nm1", 2))  # (0,2,1) against the boundary
    if L - i == 3:
        out.append(D1)
    if L - i == 1:
        out.append(M1)
    out += [D, M, V]
    return out


def _excited_candidates(occ, i):
    L = len(occ)
    out = [D, M]
    if L - i >= 3:
        out.append(D1)  # interior (020) is legal in this family
    out += [V, M1, Q01, B2R, B2L]
    return out


def _parse_excited(occ: tuple[int, ...], family: TilingFamily):
    """The class factors through the void left by the displaced monomers."""
    l = family.l
    cut = 2 * l
    if occ[cut] != 0:
        raise ValueError("excited member lost its interface void")
    left = _backtrack_parse(occ[:cut], _excited_candidates) if cut else []
    rest = _backtrack_parse(occ[cut + 1:], _excited_candidates)
    if left is None or rest is None:
        return None
    return left + [V] + rest
