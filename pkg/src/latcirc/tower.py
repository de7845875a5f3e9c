"""Finite truncations and symbolic limits of the infinite constructions.

Chains of soldered-input gates realize ordinal-shaped families of definable
sets; an extra three-gate gadget on top of a chain realizes an exact pair
with no meet.  Truncations are ordinary circuits; the limit families are
symbolic, answered by finite case analysis on an eventually-constant
per-gate state sequence, never by infinite enumeration.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from . import circuit as circuit_mod
from . import finspace
from .circuit import Circuit, definable_assignments
from .finspace import DiscreteSpace
from .order_core import MeetSemilattice


class TowerKind(enum.Enum):
    FORWARD_CHAIN = "forward"
    REVERSE_CHAIN = "reverse"
    EXACT_PAIR = "exact-pair"


EMPTY, E_STATE, FULL = "empty", "E", "full"


def truncate(kind: TowerKind, n: int) -> Circuit:
    """The n-stage truncation as a circuit.

    Forward: gate i reads node i and feeds node i+1.  Reverse: orientation
    flipped.  Exact pair: a forward chain plus the three-gate gadget pinned
    to the top node x_n, with side nodes a and b.
    """
    if n < 1:
        raise ValueError(f"truncation level must be >= 1, got {n}")
    nodes = [f"x{i}" for i in range(n + 1)]
    if kind is TowerKind.FORWARD_CHAIN:
        gates = [(i, i, i + 1) for i in range(n)]
        return Circuit(tuple(nodes), tuple(gates), ("tower", kind, n))
    if kind is TowerKind.REVERSE_CHAIN:
        gates = [(i + 1, i + 1, i) for i in range(n)]
        return Circuit(tuple(nodes), tuple(gates), ("tower", kind, n))
    if kind is TowerKind.EXACT_PAIR:
        a, b, x = n + 1, n + 2, n
        gates = [(i, i, i + 1) for i in range(n)]
        gates += [(x, x, a), (x, x, b), (a, b, x)]
        return Circuit(tuple(nodes + ["a", "b"]), tuple(gates), ("tower", kind, n))
    raise ValueError(kind)


def gadget_circuit() -> Circuit:
    """The exact-pair gadget alone: apex x with side nodes a, b."""
    return Circuit(("x", "a", "b"), ((0, 0, 1), (0, 0, 2), (1, 2, 0)))


# Per-gate terminal memberships: does the state contain the shared g-side
# vertex, and does it contain the out-side vertex?
_G_IN = {FULL: 1, E_STATE: 1, EMPTY: 0}
_OUT_IN = {FULL: 1, E_STATE: 0, EMPTY: 0}


@dataclass(frozen=True)
class LimitSet:
    """A definable set of the symbolic limit, by per-gate states.

    prefix lists the first few gates' states; tail is the state of every
    later gate.  Gate states are 'empty', 'E' (the one nonempty proper
    definable piece of a soldered-input gate), or 'full'.  For the exact
    pair, gadget records membership of the two side pieces.
    """

    kind: TowerKind
    prefix: tuple[str, ...]
    tail: str
    gadget: tuple[int, int] = (0, 0)

    def __post_init__(self):
        states = {EMPTY, E_STATE, FULL}
        if self.tail not in (EMPTY, FULL):
            raise ValueError("tail state must be 'empty' or 'full'")
        if any(s not in states for s in self.prefix):
            raise ValueError("bad gate state in prefix")
        # canonical form: the prefix never ends in the tail state, so equal
        # sets compare equal and prefix length is a usable rank
        prefix = self.prefix
        while prefix and prefix[-1] == self.tail:
            prefix = prefix[:-1]
        object.__setattr__(self, "prefix", prefix)
        # adjacent gates share a vertex; its membership must agree on both
        seq = list(self.prefix) + [self.tail, self.tail]
        for s, t in zip(seq, seq[1:]):
            if self.kind is TowerKind.REVERSE_CHAIN:
                ok = _G_IN[s] == _OUT_IN[t]  # gate i's g is gate i+1's out
            else:
                ok = _OUT_IN[s] == _G_IN[t]  # gate i's out is gate i+1's g
            if not ok:
                raise ValueError(f"state sequence {seq[:-1]} breaks the soldering")
        if self.kind is TowerKind.EXACT_PAIR:
            if self.gadget != (0, 0) and self.tail != FULL:
                raise ValueError("gadget pieces require the whole chain")
            if self.tail == FULL and self.gadget == (0, 0):
                raise ValueError("a full chain forces a nonempty gadget side")
        elif self.gadget != (0, 0):
            raise ValueError("only exact-pair sets carry a gadget")

    @property
    def contains_infinity(self) -> bool:
        """The compactification rule: co-compact sets hold the added point."""
        return self.tail == FULL

    def state(self, i: int) -> str:
        return self.prefix[i] if i < len(self.prefix) else self.tail

    def serialize(self) -> dict:
        out = {"prefix": list(self.prefix), "tail": self.tail}
        if self.kind is TowerKind.EXACT_PAIR:
            out["gadget"] = list(self.gadget)
        return out


class LimitFamily:
    """Order/join/meet queries over a symbolic limit family.

    Chains are totally ordered; the exact pair adds two incomparable sets on
    top of the chain.  Everything reduces to a finite case analysis on
    (prefix length, tail state, gadget flags).
    """

    def __init__(self, kind: TowerKind):
        self.kind = kind

    def bot(self) -> LimitSet:
        return LimitSet(self.kind, (), EMPTY)

    def top(self) -> LimitSet:
        if self.kind is TowerKind.EXACT_PAIR:
            return LimitSet(self.kind, (), FULL, (1, 1))
        return LimitSet(self.kind, (), FULL)

    def d(self, beta: int) -> LimitSet:
        """The beta-th proper set: forward D_beta, reverse D*_beta."""
        if beta < 0:
            raise ValueError("stage index must be >= 0")
        if self.kind is TowerKind.REVERSE_CHAIN:
            return LimitSet(self.kind, tuple([EMPTY] * beta + [E_STATE]), FULL)
        return LimitSet(self.kind, tuple([FULL] * beta + [E_STATE]), EMPTY)

    def side(self, which: str) -> LimitSet:
        if self.kind is not TowerKind.EXACT_PAIR:
            raise ValueError("side pieces exist only for the exact pair")
        return LimitSet(self.kind, (), FULL, (1, 0) if which == "a" else (0, 1))

    def elements(self, depth: int) -> list[LimitSet]:
        out = [self.bot()] + [self.d(b) for b in range(depth)]
        if self.kind is TowerKind.EXACT_PAIR:
            out += [self.side("a"), self.side("b")]
        out.append(self.top())
        return out

    def _chain_level(self, u: LimitSet):
        """Position along the chain part; None for exact-pair tail-full sets."""
        if u.tail == FULL:
            if self.kind is TowerKind.EXACT_PAIR:
                return None
            if self.kind is TowerKind.REVERSE_CHAIN:
                # top has empty prefix; D*_beta has prefix length beta+1
                return (2,) if not u.prefix else (1, -len(u.prefix))
            return (2,)
        if not u.prefix:
            return (0,)
        return (1, len(u.prefix))

    def leq(self, u: LimitSet, v: LimitSet) -> bool:
        lu, lv = self._chain_level(u), self._chain_level(v)
        if lu is not None and lv is not None:
            return lu <= lv
        if lu is None and lv is None:
            return all(x <= y for x, y in zip(u.gadget, v.gadget))
        # chain sets sit below every whole-chain set, never above
        return lv is None

    def join(self, u: LimitSet, v: LimitSet) -> LimitSet:
        if self.leq(u, v):
            return v
        if self.leq(v, u):
            return u
        # only incomparable pair shapes are exact-pair tail-full sets
        g = (max(u.gadget[0], v.gadget[0]), max(u.gadget[1], v.gadget[1]))
        return LimitSet(self.kind, (), FULL, g)

    def meet_exists(self, u: LimitSet, v: LimitSet) -> LimitSet | None:
        """The greatest lower bound when it exists, else None.

        The one failure is the exact pair's two side sets: their common
        lower bounds are the chain sets, a strictly increasing family with
        no maximum.
        """
        if self.leq(u, v):
            return u
        if self.leq(v, u):
            return v
        g = (min(u.gadget[0], v.gadget[0]), min(u.gadget[1], v.gadget[1]))
        if g == (0, 0):
            return None
        return LimitSet(self.kind, (), FULL, g)

    def lower_bounds(self, u: LimitSet, v: LimitSet, depth: int) -> list[LimitSet]:
        return [
            w for w in self.elements(depth) if self.leq(w, u) and self.leq(w, v)
        ]

    def strictly_between(self, w: LimitSet, u: LimitSet, v: LimitSet) -> LimitSet | None:
        """Some common lower bound of u and v strictly above w, if any.

        Chain sets always have the next chain set above them, so when the
        meet is missing every lower bound is strictly dominated: the
        lower-bound family has no maximum.
        """
        candidates = [self.d(len(w.prefix) + 1), self.d(0), self.bot()]
        for c in candidates:
            if (
                self.leq(w, c)
                and not self.leq(c, w)
                and self.leq(c, u)
                and self.leq(c, v)
            ):
                return c
        return None

    def meet_analysis(self, u: LimitSet, v: LimitSet, depth: int):
        """(meet or None, sampled lower bounds, lower bounds have a maximum).

        The maximum flag is symbolic: the lower-bound family has a maximum
        exactly when the meet exists; when it does not, every sampled lower
        bound is exhibited strictly below another lower bound.
        """
        meet = self.meet_exists(u, v)
        lbs = self.lower_bounds(u, v, depth)
        if meet is None:
            for w in lbs:
                if self.strictly_between(w, u, v) is None:
                    raise AssertionError(
                        "missing meet but a lower bound looks maximal"
                    )
        return meet, lbs, meet is not None


def limit_definables(kind: TowerKind) -> LimitFamily:
    return LimitFamily(kind)


def restrict(d: LimitSet, n: int) -> tuple:
    """The truncation of a limit set to the n-stage circuit, checked.

    Chain-node memberships come from the per-gate states.  The exact pair's
    top node stands in for the whole-chain limit point (the gadget hangs off
    it), so only sets containing the full chain occupy it.  The result is
    validated against the truncation's gate constraints.
    """
    if n < 1:
        raise ValueError("truncation level must be >= 1")
    kind = d.kind
    if kind is TowerKind.FORWARD_CHAIN:
        mem = [_G_IN[d.state(i)] for i in range(n)]
        mem.append(_OUT_IN[d.state(n - 1)])
    elif kind is TowerKind.REVERSE_CHAIN:
        mem = [_OUT_IN[d.state(i)] for i in range(n)]
        mem.append(_G_IN[d.state(n - 1)])
    else:
        chain_full = d.tail == FULL
        mem = [_G_IN[d.state(i)] if not chain_full else 1 for i in range(n)]
        mem.append(1 if chain_full else 0)
        mem += [d.gadget[0], d.gadget[1]]
    asg = tuple(mem)
    c = truncate(kind, n)
    if not circuit_mod.satisfies(c, asg):
        raise AssertionError(f"restriction {asg} violates the truncation gates")
    return asg


# ---------------------------------------------------------------------------
# Directed systems


@dataclass(frozen=True)
class DirectedSystemReport:
    crisp: bool
    eventually_open: bool
    crisp_violations: tuple[str, ...]
    embedding_violations: tuple[str, ...]
    open_stage: tuple[int, ...]  # per final-stage cell, first covering stage


def check_directed_system(stages, embeddings) -> DirectedSystemReport:
    """Crispness and eventual openness of a finite directed system.

    stages[i] embeds into stages[i+1] by embeddings[i] (old id -> new id).
    Crispness: the image of every earlier stage sits at distance 1 from all
    newer cells.  Eventual openness: each cell is interior to some stage's
    image inside the final stage; a finite system always has its last stage
    as a trivial witness, so the report records the first covering stage.
    """
    if len(embeddings) != len(stages) - 1:
        raise ValueError("need exactly one embedding per adjacent stage pair")
    emb_viol = []
    for k, emb in enumerate(embeddings):
        a, b = stages[k], stages[k + 1]
        if len(emb) != a.n:
            emb_viol.append(f"embedding {k} has wrong domain size")
            continue
        for i in range(a.n):
            for j in range(i + 1, a.n):
                if a.distance(i, j) != b.distance(emb[i], emb[j]):
                    emb_viol.append(
                        f"embedding {k} distorts d({i},{j})"
                    )
    # compose forward maps into the final stage
    last = stages[-1]
    images = []
    for k in range(len(stages)):
        ids = list(range(stages[k].n))
        for emb in embeddings[k:]:
            ids = [emb[i] for i in ids]
        images.append(finspace.cellset(ids))
    crisp_viol = []
    for k in range(len(stages) - 1):
        img = images[k]
        for (x, y), dval in last.dist.items():
            if bool(img >> x & 1) != bool(img >> y & 1):
                crisp_viol.append(
                    f"stage {k} image not crisp: d({x},{y})={dval} crosses it"
                )
    open_stage = []
    ok_open = True
    for cell in range(last.n):
        first = -1
        for k in range(len(stages)):
            if finspace.interior(last, images[k]) >> cell & 1:
                first = k
                break
        if first < 0:
            ok_open = False
        open_stage.append(first)
    return DirectedSystemReport(
        not crisp_viol,
        ok_open,
        tuple(crisp_viol),
        tuple(emb_viol),
        tuple(open_stage),
    )


# ---------------------------------------------------------------------------
# The "taking turns" metric


@dataclass(frozen=True)
class PiecewiseLinearFn:
    """Exact piecewise-linear function on [0, x_max], positive into (0, 1]."""

    points: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        if len(self.points) < 1:
            raise ValueError("need at least one breakpoint")
        xs = [p[0] for p in self.points]
        if xs != sorted(set(xs)):
            raise ValueError("breakpoint x values must be strictly increasing")
        for _, v in self.points:
            if not 0 < v <= 1:
                raise ValueError(f"value {v} outside (0, 1]")

    @property
    def x_max(self) -> Fraction:
        return self.points[-1][0]

    def __call__(self, x) -> Fraction:
        x = Fraction(x)
        pts = self.points
        if x <= pts[0][0]:
            return pts[0][1]
        if x >= pts[-1][0]:
            return pts[-1][1]
        for k in range(len(pts) - 1):
            (x0, y0), (x1, y1) = pts[k], pts[k + 1]
            if x0 <= x <= x1:
                return y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        raise AssertionError


def default_turn_functions(x_max: int) -> tuple[PiecewiseLinearFn, PiecewiseLinearFn]:
    """The alternating pair: h1 is 1 at odd integers, h2 at even ones, and
    their min is 1/x at every integer slice from 1 up."""
    if x_max < 1:
        raise ValueError("x_max must be >= 1")
    p1 = [(Fraction(0), Fraction(1))]
    p2 = [(Fraction(0), Fraction(1))]
    for k in range(1, x_max + 1):
        if k % 2 == 1:
            p1.append((Fraction(k), Fraction(1)))
            p2.append((Fraction(k), Fraction(1, k)))
        else:
            p1.append((Fraction(k), Fraction(1, k)))
            p2.append((Fraction(k), Fraction(1)))
    return PiecewiseLinearFn(tuple(p1)), PiecewiseLinearFn(tuple(p2))


@dataclass(frozen=True)
class WSpace:
    space: DiscreteSpace
    copy_of: tuple[int, ...]
    base_cell: tuple[int, ...]


def build_W(
    s: DiscreteSpace, f1: PiecewiseLinearFn, f2: PiecewiseLinearFn
) -> WSpace:
    """Three copies of a sliced space under the taking-turns metric.

    Within a copy the metric is unchanged; same-slice cross-copy distances
    are max(d, f) with f = f1, f2, or min(f1+f2, 1) by copy pair; distinct
    slices stay at distance 1, so the extended slicing is still crisp.
    """
    if s.slices is None:
        raise ValueError("build_W needs a crisply sliced base space")
    n = s.n
    cells = []
    min_open = []
    copy_of = []
    base_cell = []
    slices = []
    for i in range(3):
        off = i * n
        for c in s.cells:
            tag = f"c{i}:{c.tag}" if c.tag else f"c{i}:{c.id}"
            cells.append(finspace.Cell(off + c.id, c.dim, tag))
            copy_of.append(i)
            base_cell.append(c.id)
            slices.append(s.slices[c.id])
        min_open.extend(m << off for m in s.min_open)
    dist: dict = {}
    for i in range(3):
        off = i * n
        for (a, b), d in s.dist.items():
            dist[(a + off, b + off)] = d

    def cross(i: int, j: int, v: Fraction) -> Fraction:
        if (i, j) in ((0, 1), (1, 0)):
            return f1(v)
        if (i, j) in ((0, 2), (2, 0)):
            return f2(v)
        return min(f1(v) + f2(v), Fraction(1))

    for i in range(3):
        for j in range(i + 1, 3):
            for a in range(n):
                for b in range(n):
                    if s.slices[a] != s.slices[b]:
                        continue
                    f = cross(i, j, s.slices[a])
                    d = max(s.distance(a, b), f)
                    if d < 1:
                        dist[(i * n + a, j * n + b)] = d
    w = DiscreteSpace(
        tuple(cells), tuple(min_open), dist, tuple(slices), s.resolution
    )
    return WSpace(w, tuple(copy_of), tuple(base_cell))


@dataclass(frozen=True)
class CoverReport:
    ok: bool
    witnesses: tuple[tuple[int, Fraction], ...]  # uncovered copy-0 cells


def check_cover_radius(w: WSpace, r: Fraction) -> CoverReport:
    """Copy-0 cells on slices above 1/r must be strictly r-close to a side copy."""
    s = w.space
    bad = []
    for c in range(s.n):
        if w.copy_of[c] != 0:
            continue
        v = s.slices[c]
        if v * r <= 1:
            continue
        best = Fraction(1)
        for other in range(s.n):
            if w.copy_of[other] in (1, 2):
                d = s.distance(c, other)
                if d < best:
                    best = d
        if not best < r:
            bad.append((c, best))
    return CoverReport(not bad, tuple(bad))


# ---------------------------------------------------------------------------
# Soldered three-copy rail truncation


@dataclass(frozen=True)
class YTruncation:
    circuit: Circuit
    node_class: tuple[int, ...]  # per (copy, rail) flattened: class node index
    k: int

    def copy_nodes(self, copy: int) -> set[int]:
        return {self.node_class[copy * self.k + i] for i in range(self.k)}


def solder_Y_truncation(m: MeetSemilattice, enumeration, k: int) -> YTruncation:
    """Three rail-circuit copies with the turn-taking identifications.

    Odd stages up to k collapse copy 1's first rails together, even stages
    collapse copy 2's, and the three stage-0 rails merge; rails are
    all-or-nothing, so identified rails become a single circuit node.
    """
    base = circuit_mod.build_Y0(m, enumeration, k)
    total = 3 * k
    parent = list(range(total))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: int, b: int):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    def node(copy: int, rail: int) -> int:
        return copy * k + rail

    for stage in range(1, k + 1):
        copy = 1 if stage % 2 == 1 else 2
        for rail in range(min(stage, k - 1)):
            union(node(copy, rail), node(copy, rail + 1))
    union(node(0, 0), node(1, 0))
    union(node(0, 0), node(2, 0))

    roots = sorted({find(x) for x in range(total)})
    root_index = {r: i for i, r in enumerate(roots)}
    node_class = tuple(root_index[find(x)] for x in range(total))
    labels = []
    for r in roots:
        copy, rail = divmod(r, k)
        labels.append(f"c{copy}:Xi({rail})")
    gates = []
    for copy in range(3):
        for i, j, g in base.gates:
            gates.append(
                (
                    node_class[node(copy, i)],
                    node_class[node(copy, j)],
                    node_class[node(copy, g)],
                )
            )
    gates = tuple(dict.fromkeys(gates))
    return YTruncation(
        Circuit(tuple(labels), gates, ("Y", m, tuple(enumeration), k)),
        node_class,
        k,
    )


@dataclass(frozen=True)
class ShortCircuitReport:
    ok: bool
    offending: tuple | None  # (assignment, side node index) if any


def verify_short_circuit(yt: YTruncation) -> ShortCircuitReport:
    """Every nonempty definable assignment must fill both side copies."""
    side_nodes = yt.copy_nodes(1) | yt.copy_nodes(2)
    for a in definable_assignments(yt.circuit):
        if all(x == 0 for x in a):
            continue
        for node in side_nodes:
            if a[node] == 0:
                return ShortCircuitReport(False, (a, node))
    return ShortCircuitReport(True, None)
