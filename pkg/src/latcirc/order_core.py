"""Finite posets, lattices, meet-semilattices, filters, and isomorphism search."""

from __future__ import annotations

import json
from dataclasses import dataclass


class OrderError(ValueError):
    """Bad order-theoretic input: duplicate labels, cycles, missing bounds."""


class LatticeError(OrderError):
    """A poset lacks the meets or joins needed for the requested structure."""


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _bits(mask: int):
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


@dataclass(frozen=True)
class Poset:
    """A finite partial order over opaque element labels.

    ``up[i]`` is a bitmask whose bit ``j`` is set iff element ``i <= j``.
    Construction validates reflexivity, antisymmetry, and transitivity, so a
    ``Poset`` in hand is always a genuine partial order.
    """

    elements: tuple[str, ...]
    up: tuple[int, ...]

    def __post_init__(self):
        n = len(self.elements)
        if len(set(self.elements)) != n:
            seen = set()
            for lbl in self.elements:
                if lbl in seen:
                    raise OrderError(f"duplicate label {lbl!r}")
                seen.add(lbl)
        if len(self.up) != n:
            raise OrderError("up-mask table size mismatch")
        for i in range(n):
            if not self.up[i] >> i & 1:
                raise OrderError(f"missing reflexive pair for {self.elements[i]!r}")
            if self.up[i] >> n:
                raise OrderError("up mask references unknown element")
        for i in range(n):
            for j in range(i + 1, n):
                if self.up[i] >> j & 1 and self.up[j] >> i & 1:
                    raise OrderError(
                        "antisymmetry violation between "
                        f"{self.elements[i]!r} and {self.elements[j]!r}"
                    )
        for i in range(n):
            acc = self.up[i]
            for j in _bits(self.up[i]):
                acc |= self.up[j]
            if acc != self.up[i]:
                raise OrderError(f"leq not transitive at {self.elements[i]!r}")

    @property
    def n(self) -> int:
        return len(self.elements)

    def index(self, label: str) -> int:
        return self.elements.index(label)

    def leq(self, i: int, j: int) -> bool:
        return bool(self.up[i] >> j & 1)

    def down_masks(self) -> tuple[int, ...]:
        """Bitmask per element j of everything below-or-equal j."""
        down = [0] * self.n
        for i in range(self.n):
            for j in _bits(self.up[i]):
                down[j] |= 1 << i
        return tuple(down)

    def pairs(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in _bits(self.up[i])]

    def covers(self) -> list[tuple[int, int]]:
        """Hasse diagram edges (i, j) with j covering i."""
        out = []
        for i in range(self.n):
            for j in range(self.n):
                if i == j or not self.leq(i, j):
                    continue
                if any(
                    k not in (i, j) and self.leq(i, k) and self.leq(k, j)
                    for k in range(self.n)
                ):
                    continue
                out.append((i, j))
        return out


def _transitive_reflexive_closure(n: int, rel_pairs, elements) -> tuple[int, ...]:
    up = [1 << i for i in range(n)]
    for a, b in rel_pairs:
        up[a] |= 1 << b
    for k in range(n):
        bit = 1 << k
        for i in range(n):
            if up[i] & bit:
                up[i] |= up[k]
    for i in range(n):
        for j in range(i + 1, n):
            if up[i] >> j & 1 and up[j] >> i & 1:
                raise OrderError(
                    f"antisymmetry violation (cycle) between {elements[i]!r} "
                    f"and {elements[j]!r}"
                )
    return tuple(up)


def poset_from_pairs(elements, pairs, *, labels=True) -> Poset:
    """Build a poset as the reflexive-transitive closure of the given pairs.

    ``pairs`` may be cover pairs or arbitrary leq pairs; labels=False means
    the pairs are already index pairs.
    """
    elements = tuple(elements)
    seen = set()
    for lbl in elements:
        if lbl in seen:
            raise OrderError(f"duplicate label {lbl!r}")
        seen.add(lbl)
    idx = {lbl: i for i, lbl in enumerate(elements)}
    rel = []
    for a, b in pairs:
        if labels:
            if a not in idx:
                raise OrderError(f"unknown element {a!r} in pair")
            if b not in idx:
                raise OrderError(f"unknown element {b!r} in pair")
            rel.append((idx[a], idx[b]))
        else:
            rel.append((a, b))
    up = _transitive_reflexive_closure(len(elements), rel, elements)
    return Poset(elements, up)


def parse_poset(text) -> Poset:
    """Parse a poset from JSON text (or an already-decoded dict).

    Expected shape: ``{"elements": [...], "covers": [[a, b], ...]}`` or the
    same with a ``"leq"`` key listing arbitrary order pairs.
    """
    data = json.loads(text) if isinstance(text, (str, bytes)) else text
    if not isinstance(data, dict) or "elements" not in data:
        raise OrderError("input must be a JSON object with an 'elements' list")
    pairs = data.get("covers", data.get("leq", []))
    return poset_from_pairs(data["elements"], pairs)


@dataclass(frozen=True)
class FiniteLattice:
    """A finite lattice: poset plus total meet/join tables and bounds."""

    poset: Poset
    meet: tuple[tuple[int, ...], ...]
    join: tuple[tuple[int, ...], ...]
    bottom: int
    top: int

    @property
    def elements(self) -> tuple[str, ...]:
        return self.poset.elements

    @property
    def n(self) -> int:
        return self.poset.n

    def leq(self, i: int, j: int) -> bool:
        return self.poset.leq(i, j)

    def nontop(self) -> list[int]:
        """Indices of the coatom-and-below part: everything except the top."""
        return [i for i in range(self.n) if i != self.top]

    def as_meet_semilattice(self) -> "MeetSemilattice":
        return MeetSemilattice(self.poset, self.meet, self.bottom)


def as_lattice(p: Poset) -> FiniteLattice:
    """Check every pair for a meet and join; fill the tables and bounds.

    Raises ``LatticeError`` naming the first pair (in index order) that lacks
    a greatest lower bound or least upper bound.
    """
    n = p.n
    down = p.down_masks()
    up = p.up
    meet = [[0] * n for _ in range(n)]
    join = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            lower = down[i] & down[j]
            # greatest lower bound: the member of `lower` above all of `lower`
            m = None
            for k in _bits(lower):
                if lower & ~down[k] == 0:
                    m = k
                    break
            if m is None:
                raise LatticeError(
                    f"no meet for pair ({p.elements[i]!r}, {p.elements[j]!r})"
                )
            upper = up[i] & up[j]
            jn = None
            for k in _bits(upper):
                if upper & ~up[k] == 0:
                    jn = k
                    break
            if jn is None:
                raise LatticeError(
                    f"no join for pair ({p.elements[i]!r}, {p.elements[j]!r})"
                )
            meet[i][j] = meet[j][i] = m
            join[i][j] = join[j][i] = jn
    bottom = 0
    top = 0
    for i in range(1, n):
        bottom = meet[bottom][i]
        top = join[top][i]
    return FiniteLattice(
        p, tuple(map(tuple, meet)), tuple(map(tuple, join)), bottom, top
    )


@dataclass(frozen=True)
class MeetSemilattice:
    """A finite meet-semilattice: poset plus a total meet table."""

    poset: Poset
    meet: tuple[tuple[int, ...], ...]
    bottom: int | None = None

    @property
    def elements(self) -> tuple[str, ...]:
        return self.poset.elements

    @property
    def n(self) -> int:
        return self.poset.n

    def leq(self, i: int, j: int) -> bool:
        return self.poset.leq(i, j)


def as_meet_semilattice(p: Poset) -> MeetSemilattice:
    """Build a meet-semilattice from a poset in which every pair has a glb."""
    n = p.n
    down = p.down_masks()
    meet = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            lower = down[i] & down[j]
            m = None
            for k in _bits(lower):
                if lower & ~down[k] == 0:
                    m = k
                    break
            if m is None:
                raise LatticeError(
                    f"no meet for pair ({p.elements[i]!r}, {p.elements[j]!r})"
                )
            meet[i][j] = meet[j][i] = m
    bottom = 0
    for i in range(1, n):
        bottom = meet[bottom][i]
    return MeetSemilattice(p, tuple(map(tuple, meet)), bottom)


# ---------------------------------------------------------------------------
# Filters


def is_filter(m: MeetSemilattice, members: frozenset[int]) -> bool:
    """Up-closed and meet-closed; the empty set counts (vacuously)."""
    for a in members:
        if any(b not in members for b in _bits(m.poset.up[a])):
            return False
    for a in members:
        for b in members:
            if m.meet[a][b] not in members:
                return False
    return True


def filters(m: MeetSemilattice, include_empty: bool = False) -> list[frozenset[int]]:
    """All filters of ``m``, in ascending element-index-bitmask order."""
    n = m.n
    out = []
    for mask in range(1 << n):
        if mask == 0 and not include_empty:
            continue
        ok = True
        for a in _bits(mask):
            if m.poset.up[a] & ~mask:
                ok = False
                break
        if not ok:
            continue
        for a in _bits(mask):
            for b in _bits(mask):
                if not mask >> m.meet[a][b] & 1:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(frozenset(_bits(mask)))
    return out


def principal_filter(m: MeetSemilattice, a: int) -> frozenset[int]:
    return frozenset(_bits(m.poset.up[a]))


def generated_filter(m: MeetSemilattice, seed) -> frozenset[int]:
    """Smallest filter containing ``seed`` (up-closure then meet-closure)."""
    cur = set(seed)
    changed = True
    while changed:
        changed = False
        for a in list(cur):
            for b in _bits(m.poset.up[a]):
                if b not in cur:
                    cur.add(b)
                    changed = True
        for a in list(cur):
            for b in list(cur):
                c = m.meet[a][b]
                if c not in cur:
                    cur.add(c)
                    changed = True
    return frozenset(cur)


def filter_label(m: MeetSemilattice, members: frozenset[int]) -> str:
    inner = ",".join(sorted(m.elements[i] for i in members))
    return "{" + inner + "}"


def filter_lattice(m: MeetSemilattice, include_empty: bool = False) -> FiniteLattice:
    """The lattice of filters ordered by inclusion.

    Meets are intersections and joins are generated filters; both fall out of
    ``as_lattice`` on the inclusion order.
    """
    fs = filters(m, include_empty)
    labels = [filter_label(m, f) for f in fs]
    pairs = [
        (i, j)
        for i in range(len(fs))
        for j in range(len(fs))
        if fs[i] <= fs[j] and i != j
    ]
    # inclusion order: smaller filter below larger, matching subset order
    p = poset_from_pairs(labels, pairs, labels=False)
    return as_lattice(p)


# ---------------------------------------------------------------------------
# Isomorphism search


def _profiles(l: FiniteLattice) -> list[tuple]:
    down = l.poset.down_masks()
    covers = l.poset.covers()
    up_cov = [0] * l.n
    dn_cov = [0] * l.n
    for i, j in covers:
        up_cov[i] += 1
        dn_cov[j] += 1
    return [
        (
            _popcount(down[i]),
            _popcount(l.poset.up[i]),
            up_cov[i],
            dn_cov[i],
            i == l.bottom,
            i == l.top,
        )
        for i in range(l.n)
    ]


def iso(a: FiniteLattice, b: FiniteLattice) -> dict[int, int] | None:
    """A bijection preserving leq, join, bottom, and top, or None.

    Plain backtracking in element-index order with degree/height profile
    pruning; instances stay small so no fancier canonical form is needed.
    """
    if a.n != b.n:
        return None
    pa, pb = _profiles(a), _profiles(b)
    if sorted(pa) != sorted(pb):
        return None
    mapping: dict[int, int] = {}
    used = [False] * b.n

    def extend(i: int) -> bool:
        if i == a.n:
            return True
        for j in range(b.n):
            if used[j] or pa[i] != pb[j]:
                continue
            ok = True
            for i2, j2 in mapping.items():
                if a.leq(i, i2) != b.leq(j, j2) or a.leq(i2, i) != b.leq(j2, j):
                    ok = False
                    break
            if not ok:
                continue
            mapping[i] = j
            used[j] = True
            if extend(i + 1):
                return True
            del mapping[i]
            used[j] = False
        return False

    if not extend(0):
        return None
    # a profile-and-order-preserving bijection of finite lattices preserves
    # meets and joins, but verify join and bounds anyway before reporting
    for i in range(a.n):
        for j in range(a.n):
            if mapping[a.join[i][j]] != b.join[mapping[i]][mapping[j]]:
                return None
    if mapping[a.bottom] != b.bottom or mapping[a.top] != b.top:
        return None
    return dict(mapping)


# ---------------------------------------------------------------------------
# House lattices used throughout the tests and CLI docs


def chain(k: int, prefix: str = "c") -> FiniteLattice:
    """The k-element chain c0 < c1 < ... (k >= 1)."""
    labels = [f"{prefix}{i}" for i in range(k)]
    pairs = [(labels[i], labels[i + 1]) for i in range(k - 1)]
    return as_lattice(poset_from_pairs(labels, pairs))


def n5() -> FiniteLattice:
    """The pentagon: 0 < a < 1 and 0 < b < c < 1 with a incomparable to b, c."""
    return as_lattice(
        poset_from_pairs(
            ["0", "a", "b", "c", "1"],
            [("0", "a"), ("a", "1"), ("0", "b"), ("b", "c"), ("c", "1")],
        )
    )


def m3() -> FiniteLattice:
    """The diamond with three atoms."""
    return as_lattice(
        poset_from_pairs(
            ["0", "p", "q", "r", "1"],
            [("0", "p"), ("0", "q"), ("0", "r"), ("p", "1"), ("q", "1"), ("r", "1")],
        )
    )


def v_semilattice() -> MeetSemilattice:
    """The meet-semilattice {0, a, b} with a ^ b = 0 (no top)."""
    return as_meet_semilattice(
        poset_from_pairs(["0", "a", "b"], [("0", "a"), ("0", "b")])
    )


# ---------------------------------------------------------------------------
# Exhaustive small-lattice generation (verification corpus)


def all_posets_up_to_iso(n: int) -> list[Poset]:
    """All posets on n labeled points up to isomorphism.

    Enumerates strict orders compatible with the index order (every poset has
    a linear extension, so every isomorphism class appears) and dedupes by a
    brute-force canonical form.
    """
    from itertools import permutations as _perms

    upper = [(i, j) for i in range(n) for j in range(i + 1, n)]
    seen = set()
    out = []
    for mask in range(1 << len(upper)):
        rel = [upper[k] for k in range(len(upper)) if mask >> k & 1]
        up = [1 << i for i in range(n)]
        for a, b in rel:
            up[a] |= 1 << b
        ok = True
        for k in range(n):
            bit = 1 << k
            for i in range(n):
                if up[i] & bit and up[i] | up[k] != up[i]:
                    ok = False
                    break
            if not ok:
                break
        if not ok:
            continue
        canon = min(
            tuple(
                sorted(
                    sum(1 << perm[j] for j in _bits(up[i])) << n | 1 << perm[i]
                    for i in range(n)
                )
            )
            for perm in _perms(range(n))
        )
        if canon in seen:
            continue
        seen.add(canon)
        out.append(Poset(tuple(f"e{i}" for i in range(n)), tuple(up)))
    return out


def all_lattices_up_to_iso(n: int) -> list[FiniteLattice]:
    out = []
    for p in all_posets_up_to_iso(n):
        try:
            out.append(as_lattice(p))
        except LatticeError:
            continue
    return out
