from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from builders import exact_general_position, lateration, lateration_pair, overlapping_completes, reduction_case
from unirigid.attach import AttachmentSpec
from unirigid.core import Configuration, Framework, Graph, Tolerances, infinitesimal_rigidity, rigidity_rank
from unirigid.errors import (
    CertificationFailed,
    ExhaustedRetries,
    InvalidInput,
    NotEnoughSharedVertices,
)
from unirigid.generate import (
    LaterationPlan,
    compose_certified,
    generate_lateration,
    is_lateration_graph,
    lateration_edge_count,
    lateration_steps,
    sample_general_position,
)
from unirigid.stress import certify_universal_rigidity, complete_graph_stress, psd_nullity


class TestSampling:
    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_simplex(self, d):
        cfg = sample_general_position(d + 1, d, 5)
        assert np.linalg.matrix_rank(cfg.bordered()) == d + 1

    def test_deterministic(self):
        a = sample_general_position(7, 3, 42)
        b = sample_general_position(7, 3, 42)
        assert np.array_equal(a.points, b.points)
        assert np.all((a.points >= 0) & (a.points <= 1))

    def test_ten_points_in_r3_by_determinants(self):
        cfg = sample_general_position(10, 3, 1)
        for quad in combinations(range(10), 4):
            m = np.column_stack([cfg.points[list(quad)], np.ones(4)])
            assert abs(np.linalg.det(m)) > 1e-12

    def test_exact_oracle_agrees_on_rounded_points(self):
        cfg = sample_general_position(7, 2, 3)
        assert exact_general_position(np.round(cfg.points, 6).tolist())

    def test_invalid_sizes(self):
        with pytest.raises(InvalidInput):
            sample_general_position(0, 2, 0)
        with pytest.raises(InvalidInput):
            sample_general_position(3, 0, 0)

    def test_pathological_tolerance_exhausts(self):
        with pytest.raises(ExhaustedRetries):
            sample_general_position(30, 2, 0, Tolerances(zero_rel=0.9))


class TestPlan:
    def test_random_plan_is_valid(self):
        plan = LaterationPlan.random(3, 12, 7)
        assert len(plan.attach_order) == 12 - 4
        for k, nbrs in enumerate(plan.attach_order):
            assert len(set(nbrs)) == 4 and max(nbrs) < 4 + k
        assert is_lateration_graph(plan.graph(), 3)

    def test_plan_deterministic(self):
        assert LaterationPlan.random(2, 9, 3) == LaterationPlan.random(2, 9, 3)

    @pytest.mark.parametrize("order", [((0, 1),), ((0, 1, 1),), ((0, 1, 3),)])
    def test_bad_orders(self, order):
        with pytest.raises(InvalidInput):
            LaterationPlan(2, 4, 0, order)

    def test_bad_sizes(self):
        with pytest.raises(InvalidInput):
            LaterationPlan.random(2, 2, 0)
        with pytest.raises(InvalidInput):
            LaterationPlan.random(0, 5, 0)

    def test_validator_rejects_non_lateration(self):
        assert not is_lateration_graph(Graph(5, ((0, 1), (1, 2), (0, 2), (3, 4))), 2)
        assert not is_lateration_graph(Graph.complete(5), 2)
        assert is_lateration_graph(Graph.complete(4), 2)

    @settings(max_examples=50, deadline=None)
    @given(d=st.integers(1, 4), extra=st.integers(0, 25), seed=st.integers(0, 2**63 - 1))
    def test_edge_count_formula(self, d, extra, seed):
        v = d + 1 + extra
        g = LaterationPlan.random(d, v, seed).graph()
        assert g.e == lateration_edge_count(d, v) == d * (d + 1) // 2 + (v - d - 1) * (d + 1)


class TestGenerate:
    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_seed_only(self, d):
        fw, sm = generate_lateration(LaterationPlan.random(d, d + 1, 0))
        assert fw.graph.is_complete() and np.all(sm.omega == 0)

    def test_d2_v6(self):
        fw, sm = lateration(2, 6, 0)
        assert fw.graph.e == 12
        assert certify_universal_rigidity(fw, sm).certified

    @pytest.mark.parametrize("seed", range(4))
    def test_d2_v8_certified_and_rigid(self, seed):
        fw, sm = lateration(2, 8, seed)
        assert certify_universal_rigidity(fw, sm).certified
        assert infinitesimal_rigidity(fw)

    def test_deterministic(self):
        a, sa = lateration(3, 9, 5)
        b, sb = lateration(3, 9, 5)
        assert np.array_equal(a.points, b.points) and np.array_equal(sa.omega, sb.omega)

    def test_graph_matches_plan(self):
        plan = LaterationPlan.random(2, 10, 11)
        fw, _ = generate_lateration(plan)
        assert fw.graph == plan.graph()
        assert is_lateration_graph(fw.graph, 2)

    @pytest.mark.parametrize("d,v,seed", [(2, 12, 0), (3, 11, 1), (1, 6, 2)])
    def test_every_step_certified_and_rigid(self, d, v, seed):
        steps = list(lateration_steps(LaterationPlan.random(d, v, seed)))
        assert len(steps) == v - d
        for step in steps[1:]:
            fw = step.framework
            assert certify_universal_rigidity(fw, step.stress).certified
            assert rigidity_rank(fw) == fw.v * d - d * (d + 1) // 2
            assert fw.graph.e == lateration_edge_count(d, fw.v)

    def test_weyl_rule_small(self):
        fw, sm = generate_lateration(LaterationPlan.random(2, 10, 3), c_rule="weyl")
        assert certify_universal_rigidity(fw, sm).certified

    def test_seed_points(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.2, 0.9]])
        fw, sm = lateration(2, 7, 0, seed_points=pts)
        np.testing.assert_array_equal(fw.points[:3], pts)
        with pytest.raises(InvalidInput):
            lateration(2, 7, 0, seed_points=np.array([[0.0, 0], [1, 0], [2, 0]]))
        with pytest.raises(InvalidInput):
            lateration(2, 7, 0, seed_points=np.zeros((4, 2)))


class TestCompose:
    @pytest.mark.parametrize("seed", range(3))
    def test_empty_reduction(self, seed):
        fw_a, sm_a, fw_b, sm_b, spec = lateration_pair(2, seed)
        fw, sm = compose_certified(fw_a, sm_a, fw_b, sm_b, spec)
        assert certify_universal_rigidity(fw, sm).certified
        assert fw.v == fw_a.v + fw_b.v - 3

    @pytest.mark.parametrize("seed", range(4))
    def test_all_b_only_shared_edges_removed(self, seed):
        d = 3
        fw_a, sm_a, fw_b, sm_b, spec, _ = reduction_case(d, seed, max_k=10)
        shared = spec.a_vertices
        removed = [e for e in combinations(sorted(shared), 2) if not fw_a.graph.has_edge(*e)]
        fw, sm = compose_certified(fw_a, sm_a, fw_b, sm_b, spec, removed)
        for e in removed:
            assert not fw.graph.has_edge(*e)
        r = psd_nullity(sm)
        assert r.is_psd and r.nullity == d + 1

    def test_n_equals_d(self):
        fw_a, fw_b, spec = overlapping_completes(2, 2, 0)
        with pytest.raises(NotEnoughSharedVertices):
            compose_certified(fw_a, complete_graph_stress(fw_a), fw_b, complete_graph_stress(fw_b), spec)

    def test_certification_failure_carries_certificate(self):
        # B's extra point sits on a line through two of A's points: combined configuration degenerates
        fw_a, sm_a = lateration(2, 6, 0)
        p = fw_a.points
        extra = p[4] + 0.5 * (p[5] - p[4])
        pts_b = np.vstack([p[[0, 1, 2]], extra])
        fw_b = Framework(Graph.complete(4), Configuration(pts_b))
        spec = AttachmentSpec(((0, 0), (1, 1), (2, 2)))
        with pytest.raises(CertificationFailed) as info:
            compose_certified(fw_a, sm_a, fw_b, complete_graph_stress(fw_b), spec)
        assert "general-position" in info.value.certificate.reasons
