"""Jets, bump basis, interpolant construction, membership, graph lifts."""

from math import comb

import numpy as np
import pytest
from conftest import fd_jet, random_nodes

from alignstat.errors import (
    BoxViolation,
    CellCollision,
    EpsTooLarge,
    NotInClass,
    OutOfDomain,
    ParamOrder,
)
from alignstat.grassmann import canonical_angle, orthonormalize
from alignstat.holder import (
    HolderParams,
    JetPoint,
    PolyJetFunction,
    build_interpolant,
    bump_basis,
    constant_function,
    discrepancy_phi,
    evaluate_jet,
    graph_lift,
    holder_membership_check,
    load_interpolant,
    multi_index_count,
    multi_index_set,
    random_class_function,
    save_interpolant,
    tangent_space,
)

P12 = HolderParams(1, 2, 2.0, 1.0, 1)


class TestMultiIndexSet:
    def test_k1_r1(self):
        assert multi_index_set(1, 1) == ((0,), (1,))

    def test_k2_r1_order(self):
        assert multi_index_set(2, 1) == ((0, 0), (1, 0), (0, 1))

    def test_counts_match_binomial_sum(self):
        for k in (1, 2, 3):
            for r0 in (0, 1, 2, 3):
                got = len(multi_index_set(k, r0))
                expected = sum(comb(s + k - 1, k - 1) for s in range(r0 + 1))
                assert got == expected == multi_index_count(k, r0)

    def test_k2_r2_size(self):
        assert len(multi_index_set(2, 2)) == 6


class TestHolderParams:
    def test_strict_floor_convention(self):
        assert HolderParams(1, 2, 2.0, 1.0, 1).r == 1
        assert HolderParams(1, 2, 2.5, 1.0, 2).r == 2
        assert HolderParams(1, 2, 3.0, 1.0, 1).r == 2

    def test_r0_must_fit_under_r(self):
        with pytest.raises(ParamOrder):
            HolderParams(1, 2, 2.0, 1.0, 2)  # r0=2 > r=1


class TestDiscrepancyPhi:
    def test_equal_jets(self):
        y = np.array([[0.3], [0.1]])
        assert discrepancy_phi(y, y, P12) == 0.0

    def test_value_gap_only(self):
        y1 = np.array([[0.3], [0.1]])
        y2 = np.array([[0.4], [0.1]])
        assert discrepancy_phi(y1, y2, P12) == pytest.approx(0.1)

    def test_slope_gap_squares(self):
        y1 = np.array([[0.3], [0.1]])
        y2 = np.array([[0.3], [0.4]])
        assert discrepancy_phi(y1, y2, P12) == pytest.approx(0.09)

    def test_symmetry(self):
        rng = np.random.default_rng(0)
        y1, y2 = rng.random((2, 2, 1))
        assert discrepancy_phi(y1, y2, P12) == discrepancy_phi(y2, y1, P12)


class TestBumpBasis:
    def test_kronecker_conditions_at_zero(self):
        basis = bump_basis(HolderParams(2, 4, 2.0, 1.0, 1))
        zero = np.zeros((1, 2))
        for s in basis.index_set:
            for t in basis.index_set:
                val = basis.psi_jet(s, t, zero)[0]
                assert val == (1.0 if s == t else 0.0)

    def test_psi1_value_and_slope(self):
        basis = bump_basis(P12)
        xs = np.array([[0.1], [0.2], [0.0]])
        vals = basis.psi_jet((1,), (0,), xs)
        # psi_1(x) = x on the plateau |x| <= 1/4
        assert vals == pytest.approx([0.1, 0.2, 0.0])
        slopes = basis.psi_jet((1,), (1,), xs)
        assert slopes == pytest.approx([1.0, 1.0, 1.0])

    def test_support_vanishes_outside(self):
        basis = bump_basis(HolderParams(2, 3, 2.0, 1.0, 1))
        edge = np.array([[0.5, 0.0], [-0.5, 0.3], [0.7, 0.7], [0.0, -0.62]])
        for s in basis.index_set:
            assert np.all(basis.psi_jet(s, (0, 0), edge) == 0.0)

    def test_norms_cover_observed_sup(self):
        basis = bump_basis(P12)
        xs = np.linspace(-0.5, 0.5, 1009).reshape(-1, 1)
        for s in basis.index_set:
            for t in basis.deriv_set:
                observed = np.max(np.abs(basis.psi_jet(s, t, xs)))
                assert observed <= basis.norms[(s, t)] * 1.001


class TestBuildInterpolant:
    def test_empty_is_zero_function(self):
        itp = build_interpolant([], P12, 1e-7)
        xs = np.linspace(0, 1, 50).reshape(-1, 1)
        assert np.all(itp.jet_grid(xs) == 0.0)
        assert holder_membership_check(itp, P12).passed

    def test_single_node_spec_example(self):
        params = HolderParams(1, 2, 2.0, 2000.0, 1)
        itp = build_interpolant([JetPoint([0.1], [[0.008], [0.05]])], params, 0.01)
        jet = itp.jet_at(np.array([0.1]))
        assert abs(jet[0, 0] - 0.008) <= 1e-9 * 0.008
        assert abs(jet[1, 0] - 0.05) <= 1e-9 * 0.05

    def test_two_nodes_supports_disjoint(self):
        params = HolderParams(1, 2, 2.0, 2000.0, 1)
        eps = 0.01
        n0 = JetPoint([0.05], [[0.008], [0.05]])
        n2 = JetPoint([0.25], [[0.006], [0.02]])
        piece0 = build_interpolant([n0], params, eps)
        piece2 = build_interpolant([n2], params, eps)
        both = build_interpolant([n0, n2], params, eps)
        assert both.cells == [(0,), (2,)]
        xs = np.linspace(0, 1, 10**4).reshape(-1, 1)
        v0 = piece0.value_grid(xs)[:, 0]
        v2 = piece2.value_grid(xs)[:, 0]
        assert not np.any((v0 != 0.0) & (v2 != 0.0))
        assert both.value_grid(xs)[:, 0] == pytest.approx(v0 + v2, abs=1e-15)

    def test_cell_collision(self):
        params = HolderParams(1, 2, 2.0, 2000.0, 1)
        nodes = [
            JetPoint([0.05], [[0.008], [0.05]]),
            JetPoint([0.06], [[0.007], [0.01]]),
        ]
        with pytest.raises(CellCollision):
            build_interpolant(nodes, params, 0.01)

    def test_odd_cell_rejected(self):
        params = HolderParams(1, 2, 2.0, 2000.0, 1)
        with pytest.raises(CellCollision):
            build_interpolant([JetPoint([0.15], [[0.008], [0.05]])], params, 0.01)

    def test_box_violation(self):
        params = HolderParams(1, 2, 2.0, 2000.0, 1)
        with pytest.raises(BoxViolation):
            build_interpolant([JetPoint([0.05], [[0.5], [0.05]])], params, 0.01)
        with pytest.raises(BoxViolation):
            build_interpolant([JetPoint([0.05], [[0.008], [-0.01]])], params, 0.01)

    def test_eps_too_large(self):
        with pytest.raises(EpsTooLarge):
            build_interpolant([], P12, 0.3)  # certifying c2 makes eps' huge


class TestEvaluateJet:
    def test_reproduces_node_jets(self):
        params = HolderParams(1, 3, 2.0, 5000.0, 1)
        eps = 0.004
        rng = np.random.default_rng(12)
        nodes = random_nodes(params, eps, (1.000001 * eps) ** 0.5, 4, rng)
        itp = build_interpolant(nodes, params, eps)
        for node in itp.nodes:
            jet = itp.jet_at(node.x)
            assert np.max(np.abs(jet - node.y)) <= 1e-9 * max(np.max(np.abs(node.y)), 1e-300)

    def test_zero_function_zero_jet(self):
        itp = build_interpolant([], P12, 1e-7)
        assert np.all(evaluate_jet(itp, np.array([0.4]), P12.index_set()) == 0.0)

    def test_out_of_domain(self):
        itp = build_interpolant([], P12, 1e-7)
        with pytest.raises(OutOfDomain):
            evaluate_jet(itp, np.array([1.4]), P12.index_set())

    def test_finite_difference_agreement_first_order(self):
        # eps sized so the oracle's own truncation (|h'''| step^2 / 6 at
        # step 1e-5) stays a factor below the 1e-6 tolerance
        params = HolderParams(1, 2, 2.0, 2000.0, 1)
        eps = 0.09
        rng = np.random.default_rng(5)
        nodes = random_nodes(params, eps, ((1.000001) * eps) ** 0.5, 2, rng)
        itp = build_interpolant(nodes, params, eps)
        for x in rng.random(100):
            analytic = itp.jet_at(np.array([x]))[1, 0]
            numeric = fd_jet(lambda p: itp.value_grid(p), np.array([x]), (1,))[0]
            assert abs(analytic - numeric) < 1e-6
            tighter = fd_jet(lambda p: itp.value_grid(p), np.array([x]), (1,), step=1e-6)[0]
            assert abs(analytic - tighter) < 3e-8

    def test_finite_difference_agreement_order_two_alpha3(self):
        params = HolderParams(1, 2, 3.0, 5000.0, 2)
        eps = 1e-5  # certifying c2 ~ 3e3 at this beta; eps' ~ 0.31
        rng = np.random.default_rng(6)
        epsp = (bump_basis(params).construction_c2(3.0, 5000.0) * eps) ** (1.0 / 3.0)
        nodes = random_nodes(params, eps, epsp, 2, rng)
        itp = build_interpolant(nodes, params, eps)
        assert itp.params.r == 2
        for x in rng.random(30):
            analytic = itp.jet_at(np.array([x]), [(2,)])[0, 0]
            numeric = fd_jet(lambda p: itp.value_grid(p), np.array([x]), (2,), step=1e-4)[0]
            assert abs(analytic - numeric) < 1e-4


class TestMembership:
    def test_zero_function_passes(self):
        report = holder_membership_check(constant_function(1, 0.0), P12)
        assert report.passed
        assert all(v == 0.0 for v in report.norms.values())

    def test_linear_at_the_edge_passes(self):
        beta = 1.0
        f = PolyJetFunction(1, 1, {(0,): np.array([0.0]), (1,): np.array([beta])})
        report = holder_membership_check(f, P12)
        assert report.passed
        assert report.norms[(1,)] == pytest.approx(beta)

    def test_quadratic_fails_increment_bound(self):
        beta = 1.0
        f = PolyJetFunction(1, 1, {(2,): np.array([2 * beta])})
        report = holder_membership_check(f, P12)
        assert not report.passed
        assert report.max_holder_ratio == pytest.approx(4 * beta, rel=1e-9)

    def test_constructed_interpolants_stay_in_class(self):
        params = HolderParams(1, 2, 2.0, 1.0, 1)
        c2 = bump_basis(params).construction_c2(2.0, 1.0)
        eps = 1e-9
        epsp = (c2 * eps) ** 0.5
        rng = np.random.default_rng(77)
        for _ in range(5):
            nodes = random_nodes(params, eps, epsp, 3, rng)
            itp = build_interpolant(nodes, params, eps)
            assert holder_membership_check(itp, params).passed


class TestGraphLift:
    def test_flat_lift_is_horizontal(self):
        params = HolderParams(2, 4, 2.0, 1.0, 1)
        lift = graph_lift(constant_function(2, [0.5, 0.5]), params)
        sub = tangent_space(lift, np.array([0.3, 0.7]))
        target = orthonormalize(np.eye(4)[:, :2])
        assert canonical_angle(sub, target) < 1e-12
        assert lift.angle_margin(np.array([[0.2, 0.2]])) == pytest.approx(np.pi / 2)

    def test_affine_lift_constant_tangent(self):
        params = HolderParams(1, 2, 2.0, 1.0, 1)
        g = PolyJetFunction(1, 1, {(0,): np.array([0.2]), (1,): np.array([0.5])})
        lift = graph_lift(g, params)
        expected = orthonormalize(np.array([[2.0], [1.0]]))
        for x in (0.0, 0.3, 0.9):
            assert canonical_angle(tangent_space(lift, np.array([x])), expected) < 1e-12

    def test_not_in_class_raises(self):
        params = HolderParams(1, 2, 2.0, 1.0, 1)
        too_steep = PolyJetFunction(1, 1, {(2,): np.array([5.0])})
        with pytest.raises(NotInClass):
            graph_lift(too_steep, params)

    def test_random_lifts_satisfy_angle_condition(self):
        params = HolderParams(2, 4, 2.0, 1.0, 1)
        c2 = bump_basis(params).construction_c2(2.0, 1.0)
        eps = 0.2 / c2  # eps' ~ 0.45
        epsp = (c2 * eps) ** 0.5
        rng = np.random.default_rng(55)
        floor = 1.0 / (2 * params.beta * params.dim_out)
        for _ in range(100):
            nodes = random_nodes(params, eps, epsp, 2, rng)
            itp = build_interpolant(nodes, params, eps)
            lift = graph_lift(itp, params, check=False)
            assert lift.angle_margin(rng.random((20, 2))) >= floor

    def test_degenerate_tangent(self):
        from alignstat.errors import DegenerateTangent

        class Collapsed:
            def raw_tangents(self, xs):
                return np.zeros((xs.shape[0], 3, 2))

        with pytest.raises(DegenerateTangent):
            tangent_space(Collapsed(), np.array([0.5, 0.5]))

    def test_tangent_continuity_linear_rate(self):
        params = HolderParams(1, 2, 2.0, 4.0, 1)
        g = PolyJetFunction(1, 1, {(0,): np.array([0.3]), (2,): np.array([0.4])})
        lift = graph_lift(g, params)
        x0 = np.array([0.31])
        gaps = []
        for h in (1e-2, 1e-3, 1e-4):
            a = tangent_space(lift, x0)
            b = tangent_space(lift, x0 + h)
            gaps.append(canonical_angle(a, b))
        assert gaps[0] == pytest.approx(10 * gaps[1], rel=0.05)
        assert gaps[1] == pytest.approx(10 * gaps[2], rel=0.05)


class TestTangentAngleVsJetGap:
    def test_tangent_angle_bounded_by_derivative_gap(self):
        """ang(lift tangent f, lift tangent g) <= c * max_s |d_s f - d_s g|,
        with c stable as the derivative gap refines."""
        params = HolderParams(2, 4, 2.0, 1.0, 1)
        rng = np.random.default_rng(61)
        base = random_class_function(params, rng)
        lift_f = graph_lift(base, params, check=False)
        ratios_by_scale = {}
        for scale in (0.3, 0.1, 0.03, 0.01):
            worst = 0.0
            for _ in range(25):
                bump = random_class_function(params, rng)
                shifted = PolyJetFunction(2, 2, dict(base.coeffs))
                for e, c in bump.coeffs.items():
                    shifted.coeffs[e] = shifted.coeffs.get(e, np.zeros(2)) + scale * c
                lift_g = graph_lift(shifted, params, check=False)
                xs = rng.random((10, 2))
                jf = lift_f.raw_tangents(xs)
                jg = lift_g.raw_tangents(xs)
                for row in range(10):
                    gap = np.max(np.abs(jf[row] - jg[row]))
                    if gap < 1e-12:
                        continue
                    ang = canonical_angle(
                        orthonormalize(jf[row]), orthonormalize(jg[row])
                    )
                    worst = max(worst, ang / gap)
            ratios_by_scale[scale] = worst
        vals = list(ratios_by_scale.values())
        assert max(vals) < 20.0
        assert max(vals) <= 3 * min(vals)


class TestRandomClassFunction:
    @pytest.mark.parametrize("k,d", [(1, 2), (2, 3), (2, 4)])
    def test_membership(self, k, d):
        params = HolderParams(k, d, 2.0, 1.0, 1)
        rng = np.random.default_rng(k * 10 + d)
        for _ in range(5):
            g = random_class_function(params, rng)
            assert holder_membership_check(g, params).passed


def test_serialization_round_trip(tmp_path):
    params = HolderParams(1, 3, 2.0, 2000.0, 1)
    eps = 0.01
    rng = np.random.default_rng(8)
    nodes = random_nodes(params, eps, ((1.000001) * eps) ** 0.5, 3, rng)
    itp = build_interpolant(nodes, params, eps)
    path = tmp_path / "itp.txt"
    save_interpolant(itp, path)
    back = load_interpolant(path)
    assert back.eps == itp.eps and back.c2 == itp.c2
    assert back.cells == itp.cells
    for a, b in zip(back.nodes, itp.nodes):
        assert np.array_equal(a.x, b.x)
        assert np.array_equal(a.y, b.y)
    xs = rng.random((50, 1))
    assert np.array_equal(back.jet_grid(xs), itp.jet_grid(xs))
