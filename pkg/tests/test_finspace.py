from fractions import Fraction as F

import pytest

from latcirc import finspace as fs
from latcirc import gate
from latcirc.finspace import Cell, DiscreteSpace


def edge_with_ends():
    """Three cells: vertex u - edge e - vertex v."""
    cells = (Cell(0, 0, "u"), Cell(1, 1, "e"), Cell(2, 0, "v"))
    min_open = (0b011, 0b010, 0b110)
    return DiscreteSpace(cells, min_open, {})


def crisp_points(k):
    cells = tuple(Cell(i, 0, f"p{i}") for i in range(k))
    return DiscreteSpace(cells, tuple(1 << i for i in range(k)), {})


class TestValidate:
    def test_one_point_ok(self):
        assert fs.validate(fs.point_space()) == []

    def test_triangle_violation_reported(self):
        cells = tuple(Cell(i, 0) for i in range(3))
        dist = {(0, 1): F(3, 10), (1, 2): F(3, 10)}
        # d(0,2) defaults to 1 > 3/10 + 3/10
        s = DiscreteSpace(cells, (1, 2, 4), dist)
        diags = fs.validate(s)
        assert any("triangle" in d for d in diags)

    def test_slicing_violation_reported(self):
        cells = (Cell(0, 0), Cell(1, 0))
        s = DiscreteSpace(cells, (1, 2), {(0, 1): F(1, 2)}, (F(0), F(1)))
        diags = fs.validate(s)
        assert any("slicing" in d for d in diags)

    def test_bad_alexandrov_base(self):
        cells = (Cell(0, 0), Cell(1, 1))
        s = DiscreteSpace(cells, (0b11, 0b11), {})
        # 0 in min_open(1) but min_open(0) holds 1 as well: nesting fine; break it
        s2 = DiscreteSpace(cells, (0b01, 0b11), {})
        assert fs.validate(s2) == []
        s3 = DiscreteSpace((Cell(0, 0), Cell(1, 1), Cell(2, 0)), (0b011, 0b010, 0b110), {})
        assert fs.validate(s3) == []
        s4 = DiscreteSpace((Cell(0, 0), Cell(1, 1), Cell(2, 0)), (0b011, 0b110, 0b100), {})
        assert any("Alexandrov" in d for d in fs.validate(s4))


class TestClosureInterior:
    def test_whole_space(self):
        s = edge_with_ends()
        assert fs.closure(s, 0b111) == 0b111
        assert fs.interior(s, 0b111) == 0b111

    def test_edge_cell(self):
        s = edge_with_ends()
        assert fs.closure(s, 0b010) == 0b111
        assert fs.interior(s, 0b010) == 0b010

    def test_interior_vertex_is_empty(self):
        s = edge_with_ends()
        assert fs.interior(s, 0b001) == 0
        assert fs.closure(s, 0b001) == 0b001


class TestExpand:
    def test_radius_above_one_is_everything(self):
        s = crisp_points(3)
        assert fs.expand(s, 0b001, F(3, 2)) == 0b111

    def test_diamond_partner_strictness(self):
        dg = gate.discretize(2)
        ur_half = next(
            i for i, c in enumerate(dg.space.cells) if c.tag == "UR.v0"
        )
        a = 1 << ur_half
        assert fs.expand(dg.space, a, F(1, 2)) == a
        grown = fs.expand(dg.space, a, F(3, 4))
        assert bin(grown).count("1") == 3  # the two same-x partners join

    def test_matches_metric_formula(self):
        dg = gate.discretize(4)
        s = dg.space
        for (i, j), d in s.dist.items():
            (x1, y1), (x2, y2) = dg.reps[i], dg.reps[j]
            assert x1 == x2
            assert d == max(abs(y1), abs(y2))

    def test_rejects_nonpositive_radius(self):
        with pytest.raises(ValueError):
            fs.expand(crisp_points(2), 1, F(0))


class TestDistanceValues:
    def test_crisp_space(self):
        assert fs.distance_values(crisp_points(3)) == [F(1)]

    def test_gate_n4(self):
        dg = gate.discretize(4)
        assert fs.distance_values(dg.space) == [F(j, 8) for j in range(1, 9)]

    def test_point(self):
        assert fs.distance_values(fs.point_space()) == []


class TestIsDefinable:
    def test_empty_and_whole(self):
        dg = gate.discretize(3)
        assert fs.is_definable(dg.space, 0, F(0))
        assert fs.is_definable(dg.space, dg.space.full_mask, F(0))

    def test_top_lobe_definable_n8(self):
        dg = gate.discretize(8)
        lobe = gate.state_to_cells(dg, gate.GateState(1, 0, 0))
        assert fs.is_definable(dg.space, lobe, F(2, 8))

    def test_out_segment_fails(self):
        dg = gate.discretize(8)
        os_closure = gate.edge_mask(dg, "OS")
        assert not fs.is_definable(dg.space, os_closure, F(2, 8))
        assert "threshold" in fs.why_not_definable(dg.space, os_closure, F(2, 8))

    def test_non_closed_reported_distinctly(self):
        dg = gate.discretize(3)
        # a whole edge closure with one endpoint dropped is not closed
        chopped = gate.edge_mask(dg, "TL") & ~(1 << dg.terminals["in1"])
        reason = fs.why_not_definable(dg.space, chopped, F(0))
        assert reason is not None and "not closed" in reason
        assert not fs.is_definable(dg.space, chopped, F(0))

    def test_monotone_in_threshold(self):
        dg = gate.discretize(4)
        s = dg.space
        lobe = gate.state_to_cells(dg, gate.GateState(0, 1, 0))
        vals = fs.thresholds(s, F(0))
        passing = [
            r for r in vals if not lobe & ~fs.interior(s, fs.expand(s, lobe, r))
        ]
        # once a threshold passes, every larger one passes
        if passing:
            first = vals.index(passing[0])
            assert passing == vals[first:]


class TestIsOpenMetric:
    def test_crisp_space(self):
        assert fs.is_open_metric(crisp_points(4), F(0))

    def test_gate_default_floor(self):
        for n in (3, 4, 6):
            dg = gate.discretize(n)
            assert fs.is_open_metric(dg.space, dg.r_min)

    def test_constructed_failure(self):
        # an edge-cell ball picks up a lone 0-cell whose own flank stays out
        cells = (Cell(0, 1, "e"), Cell(1, 0, "u"), Cell(2, 1, "f"))
        min_open = (0b001, 0b111, 0b100)
        s = DiscreteSpace(cells, min_open, {(0, 1): F(1, 2)}, None, F(1, 2))
        assert fs.validate(s) == []
        assert not fs.is_open_metric(s, F(0))


class TestIsCrisp:
    def test_whole_space(self):
        dg = gate.discretize(3)
        assert fs.is_crisp(dg.space, dg.space.full_mask)

    def test_gate_vertices(self):
        dg = gate.discretize(4)
        for v in dg.vertices:
            assert fs.is_crisp(dg.space, 1 << v)

    def test_diamond_cell_not_crisp(self):
        dg = gate.discretize(2)
        mid = next(i for i, c in enumerate(dg.space.cells) if c.tag == "UR.v0")
        assert not fs.is_crisp(dg.space, 1 << mid)


class TestCoproduct:
    def test_two_points(self):
        s = fs.coproduct(fs.point_space("x"), fs.point_space("y"))
        assert s.n == 2 and fs.validate(s) == []
        assert s.distance(0, 1) == 1
        assert fs.is_crisp(s, 0b01)

    def test_point_plus_gate_family(self):
        dg = gate.discretize(3)
        s = fs.coproduct(fs.point_space(), dg.space)
        fam = fs.enumerate_definable(
            s,
            F(2, 3),
            candidates=[
                (d << 1) | p
                for d in gate.oracle(dg).definable
                for p in (0, 1)
            ],
        )
        assert len(fam) == 14

    def test_gate_pair_decomposition(self):
        dg = gate.discretize(3)
        a = dg.space
        s = fs.coproduct(a, a)
        defs = gate.oracle(dg).definable
        for d1 in defs:
            for d2 in defs:
                assert fs.is_definable(s, d1 | (d2 << a.n), F(2, 3))
        bad = gate.edge_mask(dg, "OS")
        assert not fs.is_definable(s, defs[1] | (bad << a.n), F(2, 3))

    def test_random_sets_decompose(self):
        dg = gate.discretize(3)
        a = dg.space
        s = fs.coproduct(a, a)
        for d in fs.random_closed_sets(s, 60, seed=7):
            left = d & a.full_mask
            right = d >> a.n
            assert fs.is_definable(s, d, F(2, 3)) == (
                fs.is_definable(a, left, F(2, 3))
                and fs.is_definable(a, right, F(2, 3))
            )


class TestSolder:
    def test_two_crisp_points(self):
        s = fs.coproduct(fs.point_space("x"), fs.point_space("y"))
        out, mapping = fs.solder(s, [(0, 1)], tags=["xy"])
        assert out.n == 1 and mapping == (0, 0)
        assert fs.is_crisp(out, 0b1)
        assert fs.validate(out) == []

    def test_dagger_has_three_definable_sets(self):
        dd = gate.discretize_dagger(8)
        res = gate.oracle(dd)
        assert len(res.definable) == 3

    def test_non_crisp_rejected(self):
        dg = gate.discretize(2)
        mid = next(i for i, c in enumerate(dg.space.cells) if c.tag == "UR.v0")
        v = dg.terminals["in1"]
        with pytest.raises(ValueError, match="crisply"):
            fs.solder(dg.space, [(mid, v)])

    def test_one_cell_rejected(self):
        dg = gate.discretize(2)
        e = next(i for i, c in enumerate(dg.space.cells) if c.dim == 1)
        v = dg.terminals["in1"]
        with pytest.raises(ValueError, match="0-cell"):
            fs.solder(dg.space, [(e, v)])

    def test_preserves_open_metric(self):
        n = 4
        dg = gate.discretize(n)
        dd = gate.discretize_dagger(n)
        assert fs.is_open_metric(dg.space, dg.r_min) == fs.is_open_metric(
            dd.space, dd.r_min
        )


class TestEnumerateDefinable:
    def test_one_crisp_point(self):
        s = fs.point_space()
        assert fs.enumerate_definable(s, F(0)) == [0, 1]

    def test_gate_saturated_seven(self):
        dg = gate.discretize(8)
        fam = fs.enumerate_definable(
            dg.space, dg.r_min, candidates=gate.saturated_candidates(dg)
        )
        assert len(fam) == 7

    def test_budget_error(self):
        s = crisp_points(8)
        with pytest.raises(fs.BudgetExceeded, match="budget"):
            fs.enumerate_definable(s, F(0), budget=16)


class TestWireRule:
    def _isolated_components(self, s, r_min):
        """Connected cell groups all metrically isolated above r_min."""
        iso = []
        near = {i: [] for i in range(s.n)}
        for (a, b), d in s.dist.items():
            near[a].append(d)
            near[b].append(d)
        for i in range(s.n):
            if all(d > r_min for d in near[i]):
                iso.append(i)
        isoset = set(iso)
        seen = set()
        comps = []
        for start in iso:
            if start in seen:
                continue
            comp = {start}
            stack = [start]
            while stack:
                x = stack.pop()
                for y in fs.bits(s.min_open[x]):
                    if y in isoset and y not in comp:
                        comp.add(y)
                        stack.append(y)
                for y in range(s.n):
                    if x in fs.members(s.min_open[y]) and y in isoset and y not in comp:
                        comp.add(y)
                        stack.append(y)
            seen |= comp
            comps.append(comp)
        return comps

    def test_definable_sets_respect_wires(self):
        dg = gate.discretize(4)
        comps = self._isolated_components(dg.space, dg.r_min)
        assert comps
        for d in gate.oracle(dg).definable:
            for comp in comps:
                inside = sum(1 for c in comp if d >> c & 1)
                assert inside in (0, len(comp))


class TestUnionClosure:
    def test_unions_of_definable_are_definable(self):
        dg = gate.discretize(4)
        defs = gate.oracle(dg).definable
        for d1 in defs:
            for d2 in defs:
                assert fs.is_definable(dg.space, d1 | d2, dg.r_min)


class TestFact21Coherence:
    # discrete shadows of the continuum equivalence on open-metric spaces:
    # each direction keeps its natural threshold grid

    @pytest.mark.parametrize("n", [3, 4])
    def test_definable_implies_open_expansions_on_grid(self, n):
        dg = gate.discretize(n)
        s = dg.space
        assert fs.is_open_metric(s, dg.r_min)
        for d in gate.oracle(dg).definable:
            for r in fs.openness_thresholds(s, dg.r_min):
                assert fs.is_open(s, fs.expand(s, d, r)), (n, r, bin(d))

    @pytest.mark.parametrize("n", [3, 4])
    def test_open_expansions_at_all_values_implies_definable(self, n):
        dg = gate.discretize(n)
        s = dg.space
        pool = list(gate.saturated_candidates(dg))[:300]
        pool += fs.random_closed_sets(s, 100, seed=3)
        for d in pool:
            if d in (0, s.full_mask) or not fs.is_closed(s, d):
                continue
            if all(
                fs.is_open(s, fs.expand(s, d, r))
                for r in fs.thresholds(s, dg.r_min)
            ):
                assert fs.is_definable(s, d, dg.r_min), (n, bin(d))


class TestSerialization:
    def test_round_trip(self):
        dg = gate.discretize_dagger(3)
        text = fs.to_json(dg.space)
        back = fs.from_json(text)
        assert back == dg.space

    def test_dot_export(self):
        s = edge_with_ends()
        dot = fs.to_dot(s)
        assert dot.startswith("digraph") and "c0" in dot
