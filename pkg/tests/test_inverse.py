"""Tests for the data Laplacian and the clamped fixed-point reconstruction.

The psi_h oracles exploit nodal exactness: central second differences are
exact on quadratics, so for quadratic data the interior solve must return
the constant Laplacian exactly (up to solver tolerance).  Reconstruction
fixtures use crime-free small cases plus the self-consistent delta=0 setup
where the fixed point recovers the interpolated truth almost exactly.
"""

import dataclasses

import numpy as np
import pytest

from fracpot.experiments import (
    SMOOTH_POTENTIAL,
    benchmark_problem_1d,
    make_observation,
    relative_error,
)
from fracpot.fem import NodalField, build_mesh, interpolate_nodal, l2_norm, mass_matrix, _mass_norm
from fracpot.inverse import (
    DataFloorError,
    ObservationData,
    apply_K,
    clamp_potential,
    compute_psi_h,
    fixed_point_update,
    reconstruct,
)


class TestPsiH:
    def test_quadratic_data_gives_constant_laplacian(self):
        mesh = build_mesh((0.0, 1.0), 10)
        g = interpolate_nodal(lambda x: x**2, mesh)
        psi = compute_psi_h(mesh, g, np.array([2.0, 2.0]))
        np.testing.assert_allclose(psi.values, 2.0, atol=1e-10)

    def test_benchmark_initial_profile(self):
        # g = x(10-x)/50 + 1 has constant Laplacian -0.04.
        mesh = build_mesh((0.0, 10.0), 20)
        g = interpolate_nodal(lambda x: x * (10.0 - x) / 50.0 + 1.0, mesh)
        psi = compute_psi_h(mesh, g, np.array([-0.04, -0.04]))
        np.testing.assert_allclose(psi.values, -0.04, atol=1e-10)

    def test_affine_data_gives_exact_zero(self):
        mesh = build_mesh((0.0, 1.0), 8)
        g = interpolate_nodal(lambda x: 3.0 * x + 1.0, mesh)
        psi = compute_psi_h(mesh, g, np.zeros(2))
        np.testing.assert_array_equal(psi.values, 0.0)

    def test_2d_quadratic(self):
        mesh = build_mesh((0.0, 1.0), 6, dim=2)
        g = interpolate_nodal(lambda x, y: x**2 + y**2, mesh)
        psi_b = np.full(mesh.boundary_nodes.size, 4.0)
        psi = compute_psi_h(mesh, g, psi_b)
        np.testing.assert_allclose(psi.values, 4.0, atol=1e-9)

    def test_mesh_alignment_checked(self):
        mesh = build_mesh((0.0, 1.0), 8)
        other = build_mesh((0.0, 1.0), 9)
        g = interpolate_nodal(lambda x: x, other)
        with pytest.raises(ValueError, match="aligned"):
            compute_psi_h(mesh, g, np.zeros(2))

    def test_boundary_shape_checked(self):
        mesh = build_mesh((0.0, 1.0), 8)
        g = interpolate_nodal(lambda x: x, mesh)
        with pytest.raises(ValueError, match="boundary"):
            compute_psi_h(mesh, g, np.zeros(3))


class TestPointwiseOps:
    def test_clamp(self):
        mesh = build_mesh((0.0, 1.0), 3)
        field = NodalField(np.array([-1.0, 0.5, 3.0, 6.0]), mesh)
        clamped = clamp_potential(field, 5.0)
        np.testing.assert_array_equal(clamped.values, [0.0, 0.5, 3.0, 5.0])

    def test_clamp_bound_validation(self):
        mesh = build_mesh((0.0, 1.0), 3)
        field = NodalField(np.zeros(4), mesh)
        with pytest.raises(ValueError):
            clamp_potential(field, 0.0)

    def test_update_quotient(self):
        # (f - w + psi) / g = (10 - 2 + (-4)) / 2 = 2.
        out = fixed_point_update(
            np.array([10.0]), np.array([2.0]), np.array([-4.0]), np.array([2.0]), 5.0
        )
        assert out[0] == 2.0

    def test_update_clamps_both_sides(self):
        f = np.array([100.0, -100.0])
        out = fixed_point_update(f, np.zeros(2), np.zeros(2), np.ones(2), 5.0)
        np.testing.assert_array_equal(out, [5.0, 0.0])


class TestObservationData:
    def observation(self, **overrides):
        mesh = build_mesh((0.0, 1.0), 4)
        g = NodalField(np.full(5, 2.0), mesh)
        kwargs = {
            "g_delta": g,
            "delta": 1e-3,
            "boundary_trace": np.array([2.0, 2.0]),
            "psi_boundary": np.array([0.0, 0.0]),
        }
        kwargs.update(overrides)
        return ObservationData(**kwargs)

    def test_valid_roundtrip(self):
        obs = self.observation()
        assert obs.delta == 1e-3

    def test_negative_delta_rejected(self):
        with pytest.raises(ValueError, match="noise level"):
            self.observation(delta=-1e-3)

    def test_trace_mismatch_rejected(self):
        with pytest.raises(ValueError, match="boundary trace"):
            self.observation(boundary_trace=np.array([2.0, 2.1]))

    def test_bad_shapes_rejected(self):
        with pytest.raises(ValueError, match="boundary"):
            self.observation(psi_boundary=np.zeros(3))


def crime_free_setup(cells=25, num_steps=20, delta=0.0, **spec_overrides):
    spec = benchmark_problem_1d(alpha=0.5, cells=cells, num_steps=num_steps, **spec_overrides)
    obs = make_observation(spec, SMOOTH_POTENTIAL, 1, delta, fine_step_factor=1)
    return spec, obs


class TestReconstruct:
    def test_self_consistent_data_recovers_truth(self):
        spec, obs = crime_free_setup()
        result = reconstruct(spec, obs, q_true=SMOOTH_POTENTIAL)
        assert result.converged
        assert result.iterations <= 30
        assert relative_error(result.q_star, SMOOTH_POTENTIAL, spec.mesh) <= 0.02

    def test_increments_decay_geometrically(self):
        spec, obs = crime_free_setup()
        result = reconstruct(spec, obs)
        inc = result.increments
        ratios = inc[2:-1] / inc[1:-2]
        assert (ratios < 0.7).all()

    def test_errors_vs_truth_are_absolute_mass_norms(self):
        spec, obs = crime_free_setup()
        result = reconstruct(spec, obs, q_true=SMOOTH_POTENTIAL)
        truth = interpolate_nodal(SMOOTH_POTENTIAL, spec.mesh)
        direct = _mass_norm(result.q_star.values - truth.values, mass_matrix(spec.mesh))
        assert result.errors_vs_truth[-1] == pytest.approx(direct, abs=1e-15)
        assert len(result.errors_vs_truth) == result.iterations + 1

    def test_fixed_point_residual_small_at_convergence(self):
        spec, obs = crime_free_setup()
        result = reconstruct(spec, obs)
        psi_h = compute_psi_h(spec.mesh, obs.g_delta, obs.psi_boundary, spec.lin_tol)
        again = apply_K(spec, result.q_star, obs, psi_h)
        residual = l2_norm(
            NodalField(again.values - result.q_star.values, spec.mesh)
        )
        assert residual <= 1e-9

    def test_deterministic(self):
        spec, obs = crime_free_setup()
        a = reconstruct(spec, obs)
        b = reconstruct(spec, obs)
        np.testing.assert_array_equal(a.q_star.values, b.q_star.values)
        assert a.iterations == b.iterations

    def test_initial_guess_overrides_agree(self):
        spec, obs = crime_free_setup()
        from_default = reconstruct(spec, obs)
        from_expr = reconstruct(spec, obs, q0=lambda x: np.full_like(x, 2.0))
        guess = interpolate_nodal(lambda x: np.full_like(x, 10.0), spec.mesh)  # clamped to M1
        from_field = reconstruct(spec, obs, q0=guess)
        for other in (from_expr, from_field):
            assert other.converged
            diff = l2_norm(
                NodalField(other.q_star.values - from_default.q_star.values, spec.mesh)
            )
            assert diff <= 1e-8

    def test_initial_guess_mesh_checked(self):
        spec, obs = crime_free_setup()
        wrong = interpolate_nodal(lambda x: np.zeros_like(x), build_mesh((0.0, 10.0), 7))
        with pytest.raises(ValueError, match="aligned"):
            reconstruct(spec, obs, q0=wrong)

    def test_noisy_data_still_converges(self):
        spec, obs = crime_free_setup(cells=50, num_steps=40, delta=1e-3)
        result = reconstruct(spec, obs, q_true=SMOOTH_POTENTIAL)
        assert result.converged
        assert result.iterations <= 60
        assert relative_error(result.q_star, SMOOTH_POTENTIAL, spec.mesh) <= 0.15

    def test_data_floor_guard(self):
        spec, obs = crime_free_setup()
        tiny = dataclasses.replace(spec, M2_floor=10.0)  # floor above all data values
        with pytest.raises(DataFloorError, match="floor"):
            reconstruct(tiny, obs)

    def test_observation_mesh_checked(self):
        spec, obs = crime_free_setup()
        other_spec = benchmark_problem_1d(alpha=0.5, cells=30, num_steps=20)
        with pytest.raises(ValueError):
            reconstruct(other_spec, obs)
