import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mbqc_nogo import cluster, qmath
from mbqc_nogo.cluster import WireProgram
from mbqc_nogo.core import PauliByproduct, enumerate_branches, bob_marginal
from mbqc_nogo.qmath import H, I2, KET_0, KET_MINUS, KET_PLUS, X, Z

angles_st = st.floats(-np.pi, np.pi, allow_nan=False)


def full_cz_oracle(psi0, n):
    """Cluster state from explicit full-space CZ matrices."""
    state = qmath.kron_all([psi0] + [KET_PLUS] * (n - 1))
    for i in range(n - 1):
        ops = [I2] * i + [qmath.CZ] + [I2] * (n - i - 2)
        state = qmath.kron_all(ops) @ state
    return state


def project_site_oracle(state, n, site, bra):
    """Apply <bra| on ``site`` as a full (2^(n-1) x 2^n) matrix."""
    ops = [I2] * n
    ops[site] = np.asarray(bra, dtype=complex).reshape(1, 2)
    return qmath.kron_all(ops) @ state


class TestBuildCluster:
    def test_single_site_is_input(self):
        w = cluster.build_cluster(1)
        assert qmath.phase_equal(w.state, KET_PLUS)

    def test_two_sites(self):
        w = cluster.build_cluster(2)
        np.testing.assert_allclose(w.state, np.array([1, 1, 1, -1]) / 2, atol=1e-15)

    def test_three_site_stabilizers(self):
        w = cluster.build_cluster(3)
        assert w.state.shape == (8,)
        zxz = qmath.kron_all([Z, X, Z])
        assert np.vdot(w.state, zxz @ w.state).real == pytest.approx(1, abs=1e-14)
        np.testing.assert_allclose(cluster.stabilizer_expectations(w), [1, 1, 1], atol=1e-14)

    @pytest.mark.parametrize("n", [2, 3, 5])
    def test_matches_full_space_construction(self, n):
        psi0 = qmath.rz(0.7) @ KET_PLUS
        w = cluster.build_cluster(n, qmath.projector(psi0))
        # the input is given as a density matrix, so only the ray is fixed
        assert qmath.phase_equal(w.state, full_cz_oracle(psi0, n), tol=1e-13)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            cluster.build_cluster(0)
        with pytest.raises(ValueError):
            cluster.build_cluster(2, I2 / 2)
        with pytest.raises(ValueError):
            cluster.build_cluster(2, np.eye(4) / 4)


class TestMeasureStep:
    @pytest.mark.parametrize("theta", [0.0, np.pi / 4, 1.23])
    @pytest.mark.parametrize("s", [0, 1])
    def test_against_full_projector(self, theta, s):
        w = cluster.build_cluster(3)
        p, post = cluster.measure_step(w, 0, theta, s)
        ket = cluster.measurement_ket(theta, s)
        raw = project_site_oracle(w.state, 3, 0, ket.conj())
        assert p == pytest.approx(np.vdot(raw, raw).real, abs=1e-14)
        np.testing.assert_allclose(post.state, raw / np.sqrt(p), atol=1e-14)
        assert post.sites == (1, 2)

    @given(theta=angles_st)
    def test_zero_input_is_unbiased(self, theta):
        w = cluster.build_cluster(2, qmath.projector(KET_0))
        p0, _ = cluster.measure_step(w, 0, theta, 0)
        p1, _ = cluster.measure_step(w, 0, theta, 1)
        assert p0 == pytest.approx(0.5, abs=1e-12)
        assert p1 == pytest.approx(0.5, abs=1e-12)

    def test_basis_is_orthonormal(self):
        b = cluster.measurement_basis(0.4)
        np.testing.assert_allclose(b.conj().T @ b, I2, atol=1e-15)

    def test_refuses_last_and_repeated_sites(self):
        w = cluster.build_cluster(2)
        with pytest.raises(ValueError):
            cluster.measure_step(w, 1, 0.0, 0)
        _, post = cluster.measure_step(w, 0, 0.0, 0)
        with pytest.raises(ValueError):
            cluster.measure_step(post, 0, 0.0, 0)


class TestByproductAlgebra:
    def test_adapt_angle(self):
        assert cluster.adapt_angle(0.3, PauliByproduct.single(0, 0)) == 0.3
        assert cluster.adapt_angle(0.3, PauliByproduct.single(0, 1)) == 0.3
        assert cluster.adapt_angle(0.3, PauliByproduct.single(1, 0)) == -0.3
        assert cluster.adapt_angle(0.3, PauliByproduct.single(1, 1)) == -0.3

    @given(theta=angles_st)
    def test_x_flips_rotation(self, theta):
        lhs = qmath.z_rotation(theta) @ X
        rhs = X @ qmath.z_rotation(-theta)
        np.testing.assert_allclose(lhs, rhs, atol=1e-14)

    @pytest.mark.parametrize("p,q,s", list(itertools.product([0, 1], repeat=3)))
    def test_propagation_against_matrices(self, p, q, s):
        # X^s H (X^p Z^q) = e^{i phi} X^{s^q} Z^p H
        before = PauliByproduct.single(p, q)
        after = cluster.propagate_byproduct(before, s)
        lhs = np.linalg.matrix_power(X, s) @ H @ before.matrix()
        rhs = after.matrix() @ H
        assert qmath.same_up_to_phase(lhs, rhs)
        assert (after.x_bits[0], after.z_bits[0]) == (s ^ q, p)

    def test_tracked_byproduct(self):
        assert cluster.tracked_byproduct(()).is_identity
        assert cluster.tracked_byproduct((1,)).label == "X"
        assert cluster.tracked_byproduct((1, 0)).label == "Z"
        assert cluster.tracked_byproduct((1, 1)).label == "XZ"


class TestCompileTarget:
    def test_empty_is_identity(self):
        np.testing.assert_array_equal(cluster.compile_target(WireProgram(())), I2)

    def test_two_zero_angles(self):
        np.testing.assert_allclose(cluster.compile_target(WireProgram((0, 0))), I2, atol=1e-15)

    def test_order(self):
        u = cluster.compile_target(WireProgram((np.pi / 2, 0)))
        expected = H @ H @ qmath.z_rotation(np.pi / 2)
        np.testing.assert_allclose(u, expected, atol=1e-15)
        assert qmath.same_up_to_phase(u, qmath.S.conj().T) or qmath.same_up_to_phase(u, qmath.S)

    def test_zero_angle_is_hadamard(self):
        np.testing.assert_allclose(cluster.compile_target(WireProgram((0,))), H, atol=1e-15)

    def test_single_step(self):
        u = cluster.compile_target(WireProgram((0.5,)))
        np.testing.assert_allclose(u, H @ qmath.z_rotation(0.5), atol=1e-15)


class TestRunWire:
    def test_branch_10_gives_minus(self):
        w = cluster.build_cluster(3)
        br = cluster.run_wire(WireProgram((0, 0)), w, outcomes=(1, 0))
        assert br.probability == pytest.approx(0.25, abs=1e-14)
        assert br.byproduct.label == "Z"
        assert qmath.phase_equal(br.output_state, KET_MINUS)

    def test_branch_against_full_state_vector(self):
        psi0 = qmath.rz(0.7) @ KET_PLUS
        angles = (0.4, -1.1, 2.0)
        prog = WireProgram(angles, feed_forward=False)
        w = cluster.build_cluster(4, qmath.projector(psi0))
        outcomes = (1, 0, 1)
        state = full_cz_oracle(psi0, 4)
        for theta, s in zip(angles, outcomes):
            state = project_site_oracle(state, int(np.log2(state.size)), 0, cluster.measurement_ket(theta, s).conj())
        p = np.vdot(state, state).real
        br = cluster.run_wire(prog, w, outcomes=outcomes)
        assert br.probability == pytest.approx(p, abs=1e-13)
        assert qmath.phase_equal(br.output_state, state / np.sqrt(p))

    def test_empty_program(self):
        w = cluster.build_cluster(1, qmath.projector(KET_0))
        br = cluster.run_wire(WireProgram(()), w)
        assert br.outcomes == ()
        assert br.probability == 1.0
        assert br.byproduct.is_identity
        assert qmath.phase_equal(br.output_state, KET_0)

    def test_sampled_branch_is_valid(self):
        w = cluster.build_cluster(3)
        br = cluster.run_wire(WireProgram((0.3, 0.9)), w, seed=11)
        assert len(br.outcomes) == 2
        assert br.probability == pytest.approx(0.25, abs=1e-12)
        again = cluster.run_wire(WireProgram((0.3, 0.9)), w, seed=11)
        assert again.outcomes == br.outcomes

    def test_angle_count_must_match(self):
        with pytest.raises(ValueError):
            cluster.run_wire(WireProgram((0.1,)), cluster.build_cluster(3))
        with pytest.raises(ValueError):
            cluster.run_wire(WireProgram((0.1,)), cluster.build_cluster(2), outcomes=(2,))


class TestWireInvariants:
    @settings(max_examples=25, deadline=None)
    @given(angles=st.lists(angles_st, min_size=1, max_size=4), ff=st.booleans())
    def test_probabilities_are_uniform(self, angles, ff):
        w = cluster.build_cluster(len(angles) + 1)
        prog = cluster.wire_program(WireProgram(angles, ff), w)
        branches = enumerate_branches(prog)
        assert len(branches) == 2 ** len(angles)
        for br in branches:
            assert br.probability == pytest.approx(2.0 ** -len(angles), abs=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(angles=st.lists(angles_st, min_size=1, max_size=4), seed=st.integers(0, 2**16))
    def test_feed_forward_decomposition_is_phase_exact(self, angles, seed):
        psi = qmath.normalize(np.random.default_rng(seed).normal(size=2) + 1j)
        w = cluster.build_cluster(len(angles) + 1, qmath.projector(psi))
        prog = WireProgram(angles)
        u = cluster.compile_target(prog)
        for outcomes in itertools.product([0, 1], repeat=len(angles)):
            br = cluster.run_wire(prog, w, outcomes=outcomes)
            expected = br.byproduct.matrix() @ u @ psi
            assert qmath.overlap(br.output_state, expected) >= 1 - 1e-10

    def test_without_feed_forward_some_branch_fails(self):
        w = cluster.build_cluster(3)
        prog = WireProgram((0.4, 0.9), feed_forward=False)
        branches = [cluster.run_wire(prog, w, outcomes=o) for o in itertools.product([0, 1], repeat=2)]
        assert any(b.byproduct is None for b in branches)

    @settings(max_examples=20, deadline=None)
    @given(angles=st.lists(angles_st, min_size=1, max_size=4), ff=st.booleans())
    def test_output_marginal_is_maximally_mixed(self, angles, ff):
        w = cluster.build_cluster(len(angles) + 1)
        prog = cluster.wire_program(WireProgram(angles, ff), w)
        np.testing.assert_allclose(bob_marginal(prog), I2 / 2, atol=1e-12)

    def test_wire_program_matches_run_wire(self):
        w = cluster.build_cluster(4)
        wp = WireProgram((0.2, -0.7, 1.5))
        for br in enumerate_branches(cluster.wire_program(wp, w)):
            direct = cluster.run_wire(wp, w, outcomes=br.outcomes)
            assert br.probability == pytest.approx(direct.probability, abs=1e-13)
            assert qmath.phase_equal(br.output_state, direct.output_state)
            assert br.byproduct == direct.byproduct
