"""Finite discretized topometric spaces.

A space couples a finite Alexandrov topology (minimal-open-neighborhood map
over cells) with an exact rational [0,1] metric.  Cell sets are plain int
bitmasks throughout; the exhaustive oracles depend on that staying cheap.

Distance storage is sparse: only pairs at distance < 1 are recorded, every
other distinct pair is at distance exactly 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import gcd


class BudgetExceeded(RuntimeError):
    """An exhaustive enumeration would exceed the configured candidate bound."""


def bits(mask: int):
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


def cellset(ids) -> int:
    m = 0
    for i in ids:
        m |= 1 << i
    return m


def members(mask: int) -> tuple[int, ...]:
    return tuple(bits(mask))


@dataclass(frozen=True)
class Cell:
    id: int
    dim: int
    tag: str | None = None


@dataclass(frozen=True)
class DiscreteSpace:
    """Cells with an Alexandrov base and a sparse exact metric.

    min_open[i] is the bitmask of cell i's minimal open neighborhood.
    dist holds Fraction distances strictly below 1 keyed by (i, j), i < j.
    slices, when present, is the crisp slicing value per cell.
    resolution is the threshold pitch used by the openness checks.
    """

    cells: tuple[Cell, ...]
    min_open: tuple[int, ...]
    dist: dict
    slices: tuple[Fraction, ...] | None = None
    resolution: Fraction = Fraction(1)

    @property
    def n(self) -> int:
        return len(self.cells)

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def distance(self, i: int, j: int) -> Fraction:
        if i == j:
            return Fraction(0)
        return self.dist.get((i, j) if i < j else (j, i), Fraction(1))

    def closure_masks(self) -> tuple[int, ...]:
        """cl({x}) per cell: everything whose minimal open contains x."""
        cl = [1 << i for i in range(self.n)]
        for y in range(self.n):
            for x in bits(self.min_open[y]):
                cl[x] |= 1 << y
        return tuple(cl)


def _near_table(s: DiscreteSpace) -> list[list[tuple[int, Fraction]]]:
    table: list[list[tuple[int, Fraction]]] = [[] for _ in range(s.n)]
    for (a, b), d in s.dist.items():
        table[a].append((b, d))
        table[b].append((a, d))
    return table


def validate(s: DiscreteSpace) -> list[str]:
    """Invariant diagnostics; empty list means the space is well formed."""
    diags = []
    ids = [c.id for c in s.cells]
    if ids != list(range(s.n)):
        diags.append("cell ids are not dense 0..n-1")
    for i in range(s.n):
        if not s.min_open[i] >> i & 1:
            diags.append(f"min_open({i}) does not contain {i}")
        for y in bits(s.min_open[i]):
            if s.min_open[y] & ~s.min_open[i]:
                diags.append(
                    f"Alexandrov base violated: {y} in min_open({i}) but "
                    f"min_open({y}) is not contained in it"
                )
    for (a, b), d in s.dist.items():
        if not (a < b < s.n):
            diags.append(f"bad distance key ({a},{b})")
        if not (0 < d < 1):
            diags.append(f"stored distance d({a},{b})={d} outside (0,1)")
    near = _near_table(s)
    for y in range(s.n):
        for x, dxy in near[y]:
            for z, dyz in near[y]:
                if x >= z:
                    continue
                if s.distance(x, z) > dxy + dyz:
                    diags.append(
                        f"triangle inequality violated on ({x},{y},{z}): "
                        f"{s.distance(x, z)} > {dxy} + {dyz}"
                    )
    if s.slices is not None:
        if len(s.slices) != s.n:
            diags.append("slice table size mismatch")
        else:
            for (a, b), d in s.dist.items():
                if s.slices[a] != s.slices[b]:
                    diags.append(
                        f"crisp slicing violated: slice({a})={s.slices[a]} != "
                        f"slice({b})={s.slices[b]} but d={d} < 1"
                    )
    return diags


def closure(s: DiscreteSpace, a: int) -> int:
    out = a
    cl = s.closure_masks()
    for x in bits(a):
        out |= cl[x]
    return out


def interior(s: DiscreteSpace, a: int) -> int:
    out = 0
    for x in bits(a):
        if s.min_open[x] & ~a == 0:
            out |= 1 << x
    return out


def is_closed(s: DiscreteSpace, a: int) -> bool:
    return closure(s, a) == a


def is_open(s: DiscreteSpace, a: int) -> bool:
    return interior(s, a) == a


def expand(s: DiscreteSpace, a: int, r: Fraction) -> int:
    """The open r-expansion: cells strictly within r of the set."""
    if r <= 0:
        raise ValueError("expansion radius must be positive")
    if r > 1:
        return s.full_mask
    out = a
    near = _near_table(s)
    for x in bits(a):
        for y, d in near[x]:
            if d < r:
                out |= 1 << y
    return out


def distance_values(s: DiscreteSpace) -> list[Fraction]:
    """Distinct positive distances, ascending.

    Unstored distinct pairs sit at distance 1, so 1 belongs to the value set
    exactly when some distinct pair is missing from the sparse table.
    """
    vals = set(s.dist.values())
    if len(s.dist) < s.n * (s.n - 1) // 2:
        vals.add(Fraction(1))
    return sorted(vals)


def thresholds(s: DiscreteSpace, r_min: Fraction) -> list[Fraction]:
    return [v for v in distance_values(s) if r_min < v <= 1]


def why_not_definable(s: DiscreteSpace, d: int, r_min: Fraction) -> str | None:
    """None when definable; otherwise a reason, distinguishing non-closedness."""
    if d == 0 or d == s.full_mask:
        return None
    if not is_closed(s, d):
        missing = closure(s, d) & ~d
        return f"not closed: missing cells {members(missing)}"
    for r in thresholds(s, r_min):
        if d & ~interior(s, expand(s, d, r)):
            bad = d & ~interior(s, expand(s, d, r))
            x = next(bits(bad))
            return f"fails containment in int(expand) at threshold {r} (cell {x})"
    return None


def is_definable(s: DiscreteSpace, d: int, r_min: Fraction) -> bool:
    """Closed and contained in the interior of each of its expansions.

    Thresholds run over the space's distance values in (r_min, 1]; the empty
    set and the whole space pass outright.
    """
    if r_min < 0:
        raise ValueError("r_min must be nonnegative")
    if d == 0 or d == s.full_mask:
        return True
    if not is_closed(s, d):
        return False
    for r in thresholds(s, r_min):
        if d & ~interior(s, expand(s, d, r)):
            return False
    return True


def openness_thresholds(s: DiscreteSpace, r_min: Fraction) -> list[Fraction]:
    """Multiples of the resolution pitch in (r_min, 1].

    Openness of expansions is only meaningful on the coarse grid: a cut
    between a 0-cell and its flanking 1-cell (a half-pitch threshold) leaves
    a dangling closed point that no discretization at this pitch can avoid.
    """
    h = s.resolution
    out = []
    k = 1
    while k * h <= 1:
        if k * h > r_min:
            out.append(k * h)
        k += 1
    if not out or out[-1] != 1:
        if 1 > r_min:
            out.append(Fraction(1))
    return out


def is_open_metric(s: DiscreteSpace, r_min: Fraction) -> bool:
    """Expansions of minimal opens are open at every resolution-grid threshold.

    Unions reduce the general open-set case to minimal opens.
    """
    for r in openness_thresholds(s, r_min):
        for x in range(s.n):
            if not is_open(s, expand(s, s.min_open[x], r)):
                return False
    return True


def is_crisp(s: DiscreteSpace, a: int) -> bool:
    """Everything in the set is at distance exactly 1 from everything outside."""
    for (i, j) in s.dist:
        if bool(a >> i & 1) != bool(a >> j & 1):
            return False
    return True


def coproduct(x: DiscreteSpace, y: DiscreteSpace) -> DiscreteSpace:
    """Disjoint union; all cross distances are 1; topology is the disjoint sum."""
    off = x.n
    cells = list(x.cells) + [
        Cell(off + c.id, c.dim, c.tag) for c in y.cells
    ]
    min_open = list(x.min_open) + [m << off for m in y.min_open]
    dist = dict(x.dist)
    for (a, b), d in y.dist.items():
        dist[(a + off, b + off)] = d
    slices = None
    if x.slices is not None and y.slices is not None:
        slices = x.slices + y.slices
    res = _frac_gcd(x.resolution, y.resolution)
    return DiscreteSpace(tuple(cells), tuple(min_open), dist, slices, res)


def _frac_gcd(a: Fraction, b: Fraction) -> Fraction:
    num = gcd(a.numerator * b.denominator, b.numerator * a.denominator)
    return Fraction(num, a.denominator * b.denominator)


def solder(
    s: DiscreteSpace, groups, tags=None
) -> tuple[DiscreteSpace, tuple[int, ...]]:
    """Quotient identifying each group of crisply embedded 0-cells to one cell.

    Returns the quotient space and the old-id -> new-id map.  The merged
    cell's minimal open is the union of the members'; its distance to any
    other cell is the minimum over members (all 1 here, by crispness).
    """
    groups = [tuple(g) for g in groups]
    seen: set[int] = set()
    for g in groups:
        if len(g) != len(set(g)):
            raise ValueError(f"group {g} repeats a cell")
        for c in g:
            if c in seen:
                raise ValueError(f"cell {c} appears in two solder groups")
            seen.add(c)
            if s.cells[c].dim != 0:
                raise ValueError(f"cannot solder cell {c}: not a 0-cell")
            if not is_crisp(s, 1 << c):
                raise ValueError(f"cannot solder cell {c}: not crisply embedded")
    group_of = {}
    for gi, g in enumerate(groups):
        for c in g:
            group_of[c] = gi
    # new ids: first occurrence order; a group materializes at its least member
    old_to_new = [-1] * s.n
    new_cells: list[Cell] = []
    group_new: dict[int, int] = {}
    for i, c in enumerate(s.cells):
        gi = group_of.get(i)
        if gi is not None and gi in group_new:
            old_to_new[i] = group_new[gi]
            continue
        nid = len(new_cells)
        tag = c.tag
        if gi is not None:
            group_new[gi] = nid
            if tags is not None and tags[gi] is not None:
                tag = tags[gi]
        new_cells.append(Cell(nid, c.dim, tag))
        old_to_new[i] = nid
    n_new = len(new_cells)
    min_open = [0] * n_new
    for i in range(s.n):
        m = 0
        for y in bits(s.min_open[i]):
            m |= 1 << old_to_new[y]
        min_open[old_to_new[i]] |= m
    dist: dict = {}
    for (a, b), d in s.dist.items():
        na, nb = old_to_new[a], old_to_new[b]
        if na == nb:
            continue
        key = (na, nb) if na < nb else (nb, na)
        if key not in dist or d < dist[key]:
            dist[key] = d
    slices = None
    if s.slices is not None:
        vals: list = [None] * n_new
        for i in range(s.n):
            vals[old_to_new[i]] = s.slices[i]
        slices = tuple(vals)
    out = DiscreteSpace(tuple(new_cells), tuple(min_open), dist, slices, s.resolution)
    return out, tuple(old_to_new)


def all_closed_sets(s: DiscreteSpace, budget: int) -> list[int]:
    if 1 << s.n > budget:
        raise BudgetExceeded(
            f"2^{s.n} closed-set candidates exceed the budget of {budget}"
        )
    cl = s.closure_masks()
    out = []
    for mask in range(1 << s.n):
        c = mask
        for x in bits(mask):
            c |= cl[x]
        if c == mask:
            out.append(mask)
    return out


def enumerate_definable(
    s: DiscreteSpace,
    r_min: Fraction,
    candidates=None,
    budget: int = 1 << 20,
) -> list[int]:
    """Members of the candidate family passing is_definable, ascending by mask.

    With candidates=None the family is every closed set, enumerable only for
    small spaces; the budget guards the blowup either way.
    """
    if candidates is None:
        pool = all_closed_sets(s, budget)
    else:
        pool = list(candidates)
        if len(pool) > budget:
            raise BudgetExceeded(
                f"{len(pool)} candidates exceed the budget of {budget}"
            )
    out = [d for d in pool if is_definable(s, d, r_min)]
    out.sort()
    return out


def random_closed_sets(s: DiscreteSpace, count: int, seed: int) -> list[int]:
    """Seeded down-closures of random cell subsets (definability probes)."""
    import random

    rng = random.Random(seed)
    cl = s.closure_masks()
    probs = [0.15, 0.3, 0.5, 0.7, 0.85]
    out = []
    for k in range(count):
        p = probs[k % len(probs)]
        mask = 0
        for i in range(s.n):
            if rng.random() < p:
                mask |= 1 << i
        c = mask
        for x in bits(mask):
            c |= cl[x]
        out.append(c)
    return out


# ---------------------------------------------------------------------------
# Serialization


def _frac_str(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def _parse_frac(s: str) -> Fraction:
    num, den = s.split("/")
    return Fraction(int(num), int(den))


def to_json(s: DiscreteSpace) -> str:
    """JSON form; distances below 1 only, as exact 'p/q' strings."""
    data = {
        "cells": [[c.id, c.dim, c.tag] for c in s.cells],
        "min_open": [sorted(bits(m)) for m in s.min_open],
        "dist": [[a, b, _frac_str(d)] for (a, b), d in sorted(s.dist.items())],
        "resolution": _frac_str(s.resolution),
    }
    if s.slices is not None:
        data["slices"] = [_frac_str(v) for v in s.slices]
    return json.dumps(data, sort_keys=True)


def from_json(text: str) -> DiscreteSpace:
    data = json.loads(text)
    cells = tuple(Cell(i, d, t) for i, d, t in data["cells"])
    min_open = tuple(cellset(ids) for ids in data["min_open"])
    dist = {(a, b): _parse_frac(v) for a, b, v in data["dist"]}
    slices = None
    if "slices" in data:
        slices = tuple(_parse_frac(v) for v in data["slices"])
    return DiscreteSpace(
        cells, min_open, dist, slices, _parse_frac(data["resolution"])
    )


def to_dot(s: DiscreteSpace) -> str:
    """DOT rendering of the specialization preorder (edges: face -> coface)."""
    lines = ["digraph specialization {"]
    for c in s.cells:
        label = c.tag if c.tag else f"cell{c.id}"
        shape = "circle" if c.dim == 0 else "box"
        lines.append(f'  c{c.id} [label="{label}", shape={shape}];')
    for y in range(s.n):
        for x in bits(s.min_open[y]):
            if x != y:
                lines.append(f"  c{x} -> c{y};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def point_space(tag: str = "pt") -> DiscreteSpace:
    return DiscreteSpace((Cell(0, 0, tag),), (1,), {})
