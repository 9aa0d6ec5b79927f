from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from builders import (
    complete_framework,
    distances_by_loop,
    exact_general_position,
    exact_rank,
    exact_rigidity_rows,
    lateration,
    random_rotation,
    rigid_motion,
)
from unirigid.core import (
    DEFAULT_TOL,
    Configuration,
    Framework,
    Graph,
    Tolerances,
    align_onto,
    are_congruent,
    are_equivalent,
    edge_function,
    infinitesimal_rigidity,
    is_general_position,
    nontrivial_flex_space,
    numerical_rank,
    rigidity_matrix,
    rigidity_rank,
    trivial_flexes,
)
from unirigid.errors import DegenerateSpan, DimensionMismatch, IncompatibleDistances, InvalidInput

TRIANGLE = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


def fw_of(points, edges):
    pts = np.asarray(points, dtype=float)
    return Framework(Graph(len(pts), tuple(edges)), Configuration(pts))


# ------------------------------------------------------------------ types

class TestTypes:
    def test_graph_normalizes_and_sorts(self):
        g = Graph(4, ((3, 1), (0, 2), (1, 0)))
        assert g.edges == ((0, 1), (0, 2), (1, 3))
        assert g.has_edge(3, 1) and not g.has_edge(2, 3)

    @pytest.mark.parametrize("edges", [((0, 0),), ((0, 4),), ((0, 1), (1, 0)), ((-1, 2),)])
    def test_graph_rejects_bad_edges(self, edges):
        with pytest.raises(InvalidInput):
            Graph(4, edges)

    def test_graph_rejects_empty(self):
        with pytest.raises(InvalidInput):
            Graph(0)

    def test_complete_graph(self):
        g = Graph.complete(5)
        assert g.e == 10 and g.is_complete()
        assert not g.without_edges([(0, 1)]).is_complete()
        assert sorted(g.neighbors(2)) == [0, 1, 3, 4]

    def test_configuration_rejects_nonfinite(self):
        with pytest.raises(InvalidInput):
            Configuration(np.array([[0.0, np.nan]]))
        with pytest.raises(InvalidInput):
            Configuration(np.zeros(3))

    def test_configuration_is_read_only(self):
        cfg = Configuration(TRIANGLE)
        with pytest.raises(ValueError):
            cfg.points[0, 0] = 5.0

    def test_framework_vertex_count_must_match(self):
        with pytest.raises(DimensionMismatch):
            Framework(Graph(4), Configuration(TRIANGLE))

    @pytest.mark.parametrize("z,g", [(0.0, 1e-8), (1e-9, 1.0), (-1e-3, 1e-8), (1e-9, 2.0)])
    def test_tolerances_validated(self, z, g):
        with pytest.raises(InvalidInput):
            Tolerances(z, g)

    def test_default_tolerances(self):
        assert DEFAULT_TOL.zero_rel == 1e-9 and DEFAULT_TOL.geom_abs == 1e-8


# ------------------------------------------------------------------ edge function / df

class TestEdgeFunction:
    def test_single_edge_1d(self):
        assert edge_function(fw_of([[0.0], [1.0]], [(0, 1)])).tolist() == [0.5]

    def test_triangle(self):
        fw = fw_of(TRIANGLE, [(0, 1), (0, 2), (1, 2)])
        np.testing.assert_allclose(edge_function(fw), [0.5, 0.5, 1.0])

    def test_random_k4_matches_distance_loop(self):
        fw = complete_framework(4, 2, 3)
        oracle = distances_by_loop(fw.points.tolist())
        expected = [0.5 * oracle[e] ** 2 for e in fw.graph.edges]
        np.testing.assert_allclose(edge_function(fw), expected, rtol=1e-13)


class TestRigidityMatrix:
    def test_single_edge_row(self):
        rm = rigidity_matrix(fw_of([[0.0], [1.0]], [(0, 1)]))
        assert rm.matrix.tolist() == [[-1.0, 1.0]]
        assert rm.edge_order == ((0, 1),)

    def test_triangle_first_row(self):
        rm = rigidity_matrix(fw_of(TRIANGLE, [(1, 2), (0, 2), (0, 1)]))
        assert rm.edge_order == ((0, 1), (0, 2), (1, 2))
        assert rm.matrix[0].tolist() == [-1.0, 0.0, 1.0, 0.0, 0.0, 0.0]
        assert (rm.rows, rm.cols) == (3, 6)

    def test_k4_rank_is_five(self):
        assert rigidity_rank(complete_framework(4, 2, 0)) == 5

    def test_matches_exact_oracle_on_integer_points(self):
        pts = [[0, 0], [3, 1], [1, 4], [5, 5], [2, 7]]
        edges = [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (2, 4), (3, 4)]
        fw = fw_of(pts, edges)
        oracle = np.array(exact_rigidity_rows(pts, edges), dtype=float)
        np.testing.assert_array_equal(rigidity_matrix(fw).matrix, oracle)
        assert rigidity_rank(fw) == exact_rank(exact_rigidity_rows(pts, edges))

    def test_row_blocks_cancel_exactly(self):
        fw = complete_framework(6, 3, 5)
        m = rigidity_matrix(fw).matrix.reshape(fw.graph.e, fw.v, fw.d)
        assert np.all(m.sum(axis=1) == 0.0)

    def test_empty_graph(self):
        fw = fw_of(TRIANGLE, [])
        assert rigidity_matrix(fw).matrix.shape == (0, 6)
        assert rigidity_rank(fw) == 0


def test_numerical_rank_threshold():
    assert numerical_rank(np.array([1.0, 1e-8, 1e-10])) == 2
    assert numerical_rank(np.array([0.0, 0.0])) == 0
    assert numerical_rank(np.array([])) == 0


# ------------------------------------------------------------------ general position

class TestGeneralPosition:
    def test_collinear(self):
        assert not is_general_position(Configuration(np.array([[0.0, 0], [1, 0], [2, 0]])))

    def test_triangle(self):
        assert is_general_position(Configuration(TRIANGLE))

    def test_few_points_vacuous(self):
        assert is_general_position(Configuration(np.array([[0.0, 0], [0.0, 0]])))

    @pytest.mark.parametrize("seed", range(5))
    def test_random_six_points_match_determinant_oracle(self, seed):
        rng = np.random.default_rng(seed)
        pts = rng.uniform(size=(6, 2))
        brute = all(abs(np.linalg.det(np.column_stack([pts[list(t)], np.ones(3)]))) > 1e-12
                    for t in combinations(range(6), 3))
        assert is_general_position(Configuration(pts)) == brute

    @pytest.mark.parametrize("seed", range(5))
    def test_integer_points_match_exact_oracle(self, seed):
        rng = np.random.default_rng(seed)
        pts = rng.integers(0, 4, size=(6, 2))
        assert is_general_position(Configuration(pts.astype(float))) == exact_general_position(pts.tolist())

    def test_containing_only_checks_that_vertex(self):
        pts = np.array([[0.0, 0], [1, 0], [2, 0], [0.3, 0.9]])
        cfg = Configuration(pts)
        assert not is_general_position(cfg)
        assert not is_general_position(cfg, containing=1)
        pts[2] = [0.5, 2.0]
        assert is_general_position(Configuration(pts), containing=3)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**31 - 1), d=st.sampled_from([2, 3]))
    def test_invariant_under_rigid_motion(self, seed, d):
        rng = np.random.default_rng(seed)
        pts = rng.uniform(size=(d + 3, d))
        if rng.random() < 0.5:
            pts[-1] = 0.5 * (pts[0] + pts[1])  # force a dependence
        cfg = Configuration(pts)
        assert is_general_position(cfg) == is_general_position(Configuration(rigid_motion(pts, rng)))


# ------------------------------------------------------------------ infinitesimal rigidity

class TestInfinitesimalRigidity:
    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_complete_d_plus_2(self, d):
        assert infinitesimal_rigidity(complete_framework(d + 2, d, d))

    def test_path_is_flexible(self):
        fw = fw_of([[0, 0], [1, 0], [1, 1]], [(0, 1), (1, 2)])
        assert not infinitesimal_rigidity(fw)
        assert nontrivial_flex_space(fw).shape == (6, 1)

    def test_lateration_v6_rank_nine(self):
        fw, _ = lateration(2, 6, 4)
        assert rigidity_rank(fw) == 9
        assert infinitesimal_rigidity(fw)

    def test_degenerate_span(self):
        fw = fw_of([[0, 0], [1, 0], [2, 0]], [(0, 1), (1, 2)])
        with pytest.raises(DegenerateSpan):
            infinitesimal_rigidity(fw)
        with pytest.raises(DegenerateSpan):
            nontrivial_flex_space(fw)

    def test_k4_has_no_nontrivial_flex(self):
        assert nontrivial_flex_space(complete_framework(4, 2, 1)).shape == (8, 0)

    @pytest.mark.parametrize("seed", range(4))
    def test_flex_vectors_preserve_edge_lengths(self, seed):
        rng = np.random.default_rng(seed)
        pts = rng.uniform(size=(6, 2))
        edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 2), (1, 3)]
        fw = fw_of(pts, edges)
        basis = nontrivial_flex_space(fw)
        assert basis.shape[1] == 12 - 3 - 7
        np.testing.assert_allclose(basis.T @ basis, np.eye(basis.shape[1]), atol=1e-10)
        for q in basis.T:
            q = q.reshape(6, 2)
            for i, j in edges:
                assert abs(np.dot(pts[i] - pts[j], q[i] - q[j])) <= 1e-8
            # orthogonal to rigid motions
            assert np.linalg.norm(trivial_flexes(pts).T @ q.ravel()) <= 1e-8

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**31 - 1), d=st.sampled_from([2, 3]), extra=st.integers(0, 4))
    def test_trivial_flexes_in_kernel_and_kernel_bound(self, seed, d, extra):
        rng = np.random.default_rng(seed)
        v = d + 1 + extra
        pts = rng.uniform(size=(v, d))
        all_edges = list(combinations(range(v), 2))
        keep = [e for e in all_edges if rng.random() < 0.6]
        fw = fw_of(pts, keep)
        df = rigidity_matrix(fw).matrix
        if df.size:
            assert np.abs(df @ trivial_flexes(pts)).max() <= 1e-8
        if np.linalg.matrix_rank(fw.config.bordered()) == d + 1:
            kernel_dim = v * d - rigidity_rank(fw)
            assert kernel_dim >= d * (d + 1) // 2
            assert (kernel_dim == d * (d + 1) // 2) == infinitesimal_rigidity(fw)


# ------------------------------------------------------------------ congruence and alignment

class TestAlignment:
    def test_identity(self):
        fw = fw_of(TRIANGLE, [(0, 1)])
        out = align_onto(TRIANGLE, fw, [0, 1, 2])
        np.testing.assert_allclose(out.points, TRIANGLE, atol=1e-8)

    def test_translation_recovered(self):
        fw = fw_of(TRIANGLE + [5.0, 7.0], [(0, 1)])
        out = align_onto(TRIANGLE, fw, [0, 1, 2])
        np.testing.assert_allclose(out.points, TRIANGLE, atol=1e-8)

    @pytest.mark.parametrize("seed", range(5))
    def test_random_3d_motion_recovered(self, seed):
        rng = np.random.default_rng(seed)
        pts = rng.normal(size=(7, 3))
        rot = random_rotation(3, rng)
        shift = rng.normal(size=3) * 10
        fw = fw_of(pts @ rot.T + shift, [(0, 1)])
        out = align_onto(pts[[1, 3, 4, 6]], fw, [1, 3, 4, 6])
        np.testing.assert_allclose(out.points, pts, atol=1e-8)

    def test_reflection_allowed(self):
        mirrored = TRIANGLE * [-1.0, 1.0]
        out = align_onto(TRIANGLE, fw_of(mirrored, []), [0, 1, 2])
        np.testing.assert_allclose(out.points, TRIANGLE, atol=1e-8)

    def test_incompatible_distances(self):
        fw = fw_of(TRIANGLE * 2.0, [])
        with pytest.raises(IncompatibleDistances):
            align_onto(TRIANGLE, fw, [0, 1, 2])

    def test_shape_checks(self):
        fw = fw_of(TRIANGLE, [])
        with pytest.raises(InvalidInput):
            align_onto(np.zeros((0, 2)), fw, [])
        with pytest.raises(DimensionMismatch):
            align_onto(np.zeros((2, 3)), fw, [0, 1])

    def test_equivalence_and_congruence(self):
        a = fw_of(TRIANGLE, [(0, 1), (1, 2)])
        rng = np.random.default_rng(0)
        b = fw_of(rigid_motion(TRIANGLE, rng), [(0, 1), (1, 2)])
        assert are_equivalent(a, b) and are_congruent(a.config, b.config)
        flexed = fw_of([[0, 0], [1, 0], [1, np.sqrt(2.0)]], [(0, 1), (1, 2)])
        assert are_equivalent(a, flexed)
        assert not are_congruent(a.config, flexed.config)
        assert not are_equivalent(a, fw_of(TRIANGLE, [(0, 1)]))
