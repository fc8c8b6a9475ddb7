"""Tests for the moment relaxations, correlative sparsity and PSD decomposition."""

import networkx as nx
import numpy as np
import pytest
from scipy.optimize import fsolve

from polyopf.casedata import corpus_case
from polyopf.errors import BasisOverflowError, CoverageGapError, LevelTooLowError
from polyopf.network import build_network, build_opf_matrices, bus_injections, objective_value, residuals
from polyopf.poly import Monomial, Polynomial, PolyProgram, build_op2, build_op4
from polyopf.relax import (
    CliqueDecomposition,
    CspGraph,
    build_csp,
    build_lasserre,
    build_lavaei_low_dual,
    build_lavaei_low_primal,
    build_sparse_lasserre,
    chordal_cliques,
    decompose_psd,
    largest_psd_block,
    read_moment_map,
    relaxation_order,
)
from polyopf.sdp import BlockKind, SdpProblem, solve


def path_program(nvars=4):
    """min Σ x_i x_{i+1} over the box [-1, 1]^n with a redundant ball."""
    objective = Polynomial(nvars, {Monomial.from_indices([i, i + 1]): 1.0 for i in range(nvars - 1)})
    pp = PolyProgram(
        nvars=nvars,
        objective=objective,
        var_bounds=[(-1.0, 1.0)] * nvars,
        name="path",
    )
    for i in range(nvars):
        pp.add_inequality(Polynomial(nvars, {Monomial.one(): 1.0, Monomial.var(i, 2): -1.0}), f"box[{i}]")
    ball = {Monomial.var(i, 2): -1.0 for i in range(nvars)}
    ball[Monomial.one()] = float(nvars)
    pp.add_inequality(Polynomial(nvars, ball), "ball")
    return pp


def relative(a, b):
    return abs(a - b) / max(1.0, abs(b))


class TestOrder:
    def test_quadratic_program_starts_at_one(self, wb2_net):
        net, mats = wb2_net
        pp = build_op2(net, mats)
        assert relaxation_order(pp, 1) == 1
        assert relaxation_order(pp, 3) == 3

    def test_quartic_formulation_counts_from_four(self, wb2_net):
        net, mats = wb2_net
        pp = build_op4(net, mats)
        assert pp.degree == 2
        assert relaxation_order(pp, 1) == 2

    def test_level_zero_rejected(self, wb2_net):
        net, mats = wb2_net
        with pytest.raises(LevelTooLowError):
            relaxation_order(build_op2(net, mats), 0)

    def test_order_below_degree_rejected(self, lmbm3_net):
        net, mats = lmbm3_net
        with pytest.raises(LevelTooLowError):
            build_lasserre(build_op4(net, mats), 1)

    def test_basis_cap(self, wb2_net):
        net, mats = wb2_net
        with pytest.raises(BasisOverflowError):
            build_lasserre(build_op2(net, mats), 2, basis_cap=10)


class TestDense:
    def test_moment_map(self, wb2_net):
        net, mats = wb2_net
        sdp = build_lasserre(build_op2(net, mats), 1)
        moments = read_moment_map(sdp)
        assert len(moments.groups) == 1
        assert sdp.blocks[0].size == 1 + 4
        assert sdp.constraints[0].tag == "y0"

    def test_missing_moment_map(self):
        with pytest.raises(ValueError):
            read_moment_map(SdpProblem("bare"))

    @pytest.mark.parametrize("v2max, expected", [(1.022, 888.08), (0.976, 905.76)])
    def test_wb2_first_level(self, v2max, expected):
        net = build_network(corpus_case("WB2", V2max=v2max))
        solution = solve(build_lasserre(build_op2(net), 1))
        assert solution.optimal
        assert solution.bound == pytest.approx(expected, rel=1e-3)

    def test_path_program_bound(self):
        # the box makes x0x1 + x1x2 + x2x3 >= -3 attainable at alternating signs
        solution = solve(build_lasserre(path_program(), 1))
        assert solution.optimal
        assert solution.bound == pytest.approx(-3.0, abs=1e-5)


class TestSparsity:
    def test_complete_graph_is_one_clique(self):
        g = CspGraph.from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
        cd = chordal_cliques(g)
        assert cd.cliques == [(0, 1, 2, 3)]
        assert cd.parents == [-1]

    def test_path_needs_no_fill(self):
        cd = chordal_cliques(CspGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)]), merge_threshold=0)
        assert cd.cliques == [(0, 1), (1, 2), (2, 3)]
        assert cd.parents == [-1, 0, 1]
        assert cd.fill_edges == []
        assert cd.separator(2) == (2,)
        assert cd.satisfies_rip()
        assert cd.is_maximal()

    def test_cycle_gets_one_chord(self):
        g = CspGraph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
        cd = chordal_cliques(g, merge_threshold=0)
        assert cd.sizes == [3, 3]
        assert cd.fill_edges == [(1, 3)]
        assert cd.satisfies_rip()

    def test_small_cliques_merge(self):
        g = CspGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
        cd = chordal_cliques(g)
        assert cd.cliques == [(0, 1, 2, 3)]

    def test_spread_ball_is_left_unassigned(self):
        pp = path_program()
        g = build_csp(pp)
        assert g.num_edges() == 3
        assert g.spread == {4}
        cd = chordal_cliques(g, merge_threshold=0)
        assert len(cd) == 3
        assert cd.inequality_clique[:4] == [0, 0, 1, 2]
        assert cd.inequality_clique[4] is None

    def test_uncovered_support_falls_back(self):
        g = CspGraph.from_edges(3, [(0, 1), (1, 2)])
        g.equality_supports.append((0, 2))
        cd = chordal_cliques(g, merge_threshold=0)
        assert len(cd) == 1
        assert cd.equality_clique == [0]

    def test_dump(self):
        cd = chordal_cliques(CspGraph.from_edges(3, [(0, 1), (1, 2)]), merge_threshold=0)
        assert cd.dump(["a", "b", "c"]) == "0 parent=-1 size=2: a b\n1 parent=0 size=2: b c\n"

    def test_star_eliminates_leaves_first(self):
        g = CspGraph.from_edges(5, [(0, 1), (0, 2), (0, 3), (0, 4)])
        cd = chordal_cliques(g, merge_threshold=0)
        assert cd.ordering == [1, 2, 3, 0, 4]
        assert cd.fill_edges == []
        assert cd.sizes == [2, 2, 2, 2]

    def test_grid_extension_is_chordal(self):
        edges = [(3 * r + c, 3 * r + c + 1) for r in range(3) for c in range(2)]
        edges += [(3 * r + c, 3 * r + c + 3) for r in range(2) for c in range(3)]
        g = CspGraph.from_edges(9, edges)
        cd = chordal_cliques(g, merge_threshold=0)
        extended = nx.Graph(edges + cd.fill_edges)
        assert nx.is_chordal(extended)
        for clique in cd.cliques:
            assert all(extended.has_edge(a, b) for i, a in enumerate(clique) for b in clique[i + 1 :])
        assert cd.satisfies_rip()
        assert cd.is_maximal()
        assert sorted(cd.ordering) == list(range(9))

    def test_adjacency(self):
        g = CspGraph.from_edges(3, [(0, 2)])
        assert g.adjacency().tolist() == [[True, False, True], [False, True, False], [True, False, True]]


class TestSparse:
    def test_single_clique_matches_dense(self, wb2_net):
        net, mats = wb2_net
        pp = build_op2(net, mats)
        dense = build_lasserre(pp, 1)
        cd = CliqueDecomposition.single(pp.nvars, len(pp.inequalities), len(pp.equalities))
        sparse = build_sparse_lasserre(pp, 1, cd)
        assert sparse.num_constraints == dense.num_constraints
        assert solve(sparse).bound == pytest.approx(solve(dense).bound, rel=1e-6)

    def test_balls_per_clique(self):
        pp = path_program()
        cd = chordal_cliques(build_csp(pp), merge_threshold=0)
        sdp = build_sparse_lasserre(pp, 1, cd)
        tags = [con.tag for con in sdp.constraints if con.tag.startswith("ineq:ball")]
        assert tags == ["ineq:ball[0]", "ineq:ball[1]", "ineq:ball[2]"]
        assert sdp.metadata["cliques"] is cd
        assert [sdp.blocks[b].size for b in sdp.psd_blocks()] == [3, 3, 3]

    def test_uncovered_constraint_is_rejected(self):
        pp = path_program()
        pp.add_inequality(Polynomial(4, {Monomial.one(): 1.0, Monomial.from_indices([0, 3]): -1.0}), "link")
        cd = chordal_cliques(CspGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)]), merge_threshold=0)
        with pytest.raises(CoverageGapError) as excinfo:
            build_sparse_lasserre(pp, 1, cd)
        assert excinfo.value.label == "link"
        assert excinfo.value.support == (0, 3)

    def test_spread_ball_needs_variable_bounds(self):
        pp = path_program()
        pp.var_bounds = None
        cd = chordal_cliques(CspGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)]), merge_threshold=0)
        with pytest.raises(CoverageGapError) as excinfo:
            build_sparse_lasserre(pp, 1, cd)
        assert excinfo.value.label == "ball"

    def test_path_program_bound(self):
        pp = path_program()
        solution = solve(build_sparse_lasserre(pp, 1, chordal_cliques(build_csp(pp), merge_threshold=0)))
        assert solution.optimal
        assert solution.bound == pytest.approx(-3.0, abs=1e-5)

    def test_wb2_first_level(self, wb2_net):
        net, mats = wb2_net
        pp = build_op2(net, mats)
        solution = solve(build_sparse_lasserre(pp, 1, chordal_cliques(build_csp(pp))))
        assert solution.bound == pytest.approx(888.08, rel=1e-3)


class TestLavaeiLow:
    @pytest.mark.parametrize("fixture", ["wb2_net", "lmbm3_net"])
    def test_dual_and_primal_match_first_level(self, fixture, request):
        net, mats = request.getfixturevalue(fixture)
        dense = solve(build_lasserre(build_op2(net, mats), 1))
        dual = solve(build_lavaei_low_dual(net, mats))
        primal = solve(build_lavaei_low_primal(net, mats))
        assert dense.optimal and dual.optimal and primal.optimal
        assert relative(dual.bound, dense.bound) < 1e-5
        assert relative(primal.bound, dense.bound) < 1e-5

    def test_dual_layout(self, lmbm3_net):
        net, mats = lmbm3_net
        sdp = build_lavaei_low_dual(net, mats)
        assert sdp.maximize
        assert sdp.blocks[0].size == 2 * net.n
        assert sdp.metadata["voltage"] == {"block": 0, "source": "S"}
        assert {"a[3-2]", "a[2-3]"} <= set(sdp.metadata["multipliers"])

    def test_primal_layout(self, wb2_net):
        net, mats = wb2_net
        sdp = build_lavaei_low_primal(net, mats)
        assert not sdp.maximize
        assert sdp.metadata["voltage"]["source"] == "X"


class TestDecomposition:
    def test_tridiagonal_domain_conversion(self, rng):
        n = 5
        c = np.diag(rng.normal(size=n)) + np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1)
        sdp = SdpProblem("tri")
        blk = sdp.add_block(n)
        for i in range(n):
            sdp.add_objective(blk, i, i, float(c[i, i]))
        for i in range(n - 1):
            sdp.add_objective(blk, i, i + 1, 2.0)
        sdp.add_constraint({(blk, i, i): 1.0 for i in range(n)}, 1.0, tag="trace")

        out = decompose_psd(sdp, blk)
        assert out.metadata["decomposed"]["mode"] == "domain"
        assert [b.size for b in out.blocks] == [2, 2, 2, 2]
        assert sum(con.tag.startswith("overlap[") for con in out.constraints) == 3
        assert solve(out).bound == pytest.approx(np.linalg.eigvalsh(c)[0], abs=1e-5)

    def test_dense_block_is_kept(self, rng):
        sdp = SdpProblem("dense")
        blk = sdp.add_block(3)
        for j in range(3):
            for i in range(j + 1):
                sdp.add_objective(blk, i, j, float(rng.normal()))
        sdp.add_constraint({(blk, i, i): 1.0 for i in range(3)}, 1.0)
        assert decompose_psd(sdp, blk) is sdp

    def test_non_psd_block_rejected(self):
        sdp = SdpProblem()
        sdp.add_block(2, BlockKind.NONNEG)
        with pytest.raises(ValueError):
            decompose_psd(sdp, 0)

    def test_range_conversion_of_rank_relaxation(self):
        net = build_network(corpus_case("WB5"))
        sdp = build_lavaei_low_dual(net)
        block = largest_psd_block(sdp)
        assert block == 0
        out = decompose_psd(sdp, block)
        assert out.metadata["decomposed"]["mode"] == "range"
        assert "voltage" not in out.metadata
        assert len(out.psd_blocks()) > 1
        assert relative(solve(out).bound, solve(sdp).bound) < 1e-5

    def test_largest_block_ties_to_lowest_index(self):
        sdp = SdpProblem()
        sdp.add_block(2)
        sdp.add_block(3)
        sdp.add_block(3)
        assert largest_psd_block(sdp) == 1


@pytest.mark.slow
def test_lmbm3_quartic_sparse_first_level():
    net = build_network(corpus_case("LMBM3", S23max=28.35))
    pp = build_op4(net)
    order = relaxation_order(pp, 1)
    solution = solve(build_sparse_lasserre(pp, order, chordal_cliques(build_csp(pp), order)))
    assert solution.bound == pytest.approx(10294.88, rel=1e-3)


def case2_feasible_points(net, mats, rng, count=50):
    """Power-flow solutions of the 2-bus case for random slack magnitudes, feasible ones kept."""
    points = []
    for m in rng.uniform(0.95, 1.05, count):
        def mismatch(z):
            p, q = bus_injections(net, np.array([m, z[0], 0.0, z[1]]), mats)
            return [p[1], q[1]]

        e2, f2 = fsolve(mismatch, [m, 0.0], xtol=1e-13)
        x = np.array([m, e2, 0.0, f2])
        if residuals(net, x, mats).max_violation <= 1e-8:
            points.append(x)
    return points


class TestBoundOrdering:
    def test_bounds_never_exceed_feasible_costs(self, case2, rng):
        net = build_network(case2)
        mats = build_opf_matrices(net)
        pp = build_op2(net, mats)
        points = case2_feasible_points(net, mats, rng)
        assert points
        bounds = [
            solve(build_lasserre(pp, 1)).bound,
            solve(build_sparse_lasserre(pp, 1, chordal_cliques(build_csp(pp)))).bound,
            solve(build_lavaei_low_dual(net, mats)).bound,
        ]
        cheapest = min(objective_value(net, x, mats) for x in points)
        for bound in bounds:
            assert cheapest >= bound - 1e-5 * abs(bound)

    def test_higher_order_never_lowers_the_bound(self, wb2_net):
        net, mats = wb2_net
        pp = build_op2(net, mats)
        first = solve(build_lasserre(pp, 1)).bound
        second = solve(build_lasserre(pp, 2)).bound
        assert second >= first - 1e-5 * abs(first)

    @pytest.mark.parametrize("order", [1, 2])
    def test_sparse_never_exceeds_dense(self, order):
        pp = path_program(5)
        cd = chordal_cliques(build_csp(pp), order=order, merge_threshold=0)
        assert len(cd) > 1
        dense = solve(build_lasserre(pp, order)).bound
        sparse = solve(build_sparse_lasserre(pp, order, cd)).bound
        assert sparse <= dense + 1e-5 * max(1.0, abs(dense))

    def test_sparse_never_exceeds_dense_with_flow_limits(self, lmbm3_net):
        net, mats = lmbm3_net
        pp = build_op2(net, mats)
        dense = solve(build_lasserre(pp, 1)).bound
        sparse = solve(build_sparse_lasserre(pp, 1, chordal_cliques(build_csp(pp)))).bound
        assert sparse <= dense + 1e-5 * abs(dense)

    def test_multiplier_bound_matches_first_level_on_wb5(self):
        net = build_network(corpus_case("WB5"))
        mats = build_opf_matrices(net)
        dense = solve(build_lasserre(build_op2(net, mats), 1))
        dual = solve(build_lavaei_low_dual(net, mats))
        assert dense.optimal and dual.optimal
        assert relative(dual.bound, dense.bound) < 1e-5


@pytest.mark.slow
def test_multiplier_bound_matches_first_level_on_case9():
    net = build_network(corpus_case("case9mod"))
    mats = build_opf_matrices(net)
    dense = solve(build_lasserre(build_op2(net, mats), 1))
    dual = solve(build_lavaei_low_dual(net, mats))
    assert relative(dual.bound, dense.bound) < 1e-5
