import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import random_hermitian, random_state_vector
from qconstrain import (
    ChartSingularity,
    ConstraintSet,
    EvaluationError,
    ExpectationConstraint,
    HermitianOperator,
    PureState,
    commutator_bracket,
    covariance_bracket,
    finite_difference_gradient,
    hamiltonian_vector_field,
    induced_symplectic_matrix,
    metric_constrained_field,
    projective_chart,
    projective_coords,
    symplectic_constrained_field,
)
from qconstrain.models import (
    bloch_chart,
    bloch_state,
    heisenberg_hamiltonian,
    pauli,
    product_sphere_chart,
    product_state,
    separability_constraints,
)


class TestFiniteDifferenceGradient:
    def test_constant(self):
        grad = finite_difference_gradient(lambda c: 3.0, np.array([1.0, 2.0]))
        assert_allclose(grad, 0.0, atol=1e-12)

    def test_linear(self):
        slope = np.array([2.0, -1.5, 0.25])
        grad = finite_difference_gradient(lambda c: slope @ c, np.zeros(3))
        assert_allclose(grad, slope, atol=1e-9)

    def test_trig_function(self):
        # d/dtheta sin(t)cos(p) = cos(t)cos(p); d/dphi = -sin(t)sin(p)
        coords = np.array([np.pi / 4, np.pi / 4])
        grad = finite_difference_gradient(
            lambda c: np.sin(c[0]) * np.cos(c[1]), coords, step=1e-5
        )
        assert_allclose(grad, [0.5, -0.5], atol=1e-8)

    def test_non_finite_raises(self):
        with pytest.raises(EvaluationError):
            finite_difference_gradient(lambda c: np.inf, np.zeros(2))


class TestBlochChart:
    def test_metric_is_round_sphere(self, rng):
        chart = bloch_chart()
        for _ in range(5):
            th = rng.uniform(0.2, np.pi - 0.2)
            ph = rng.uniform(0, 2 * np.pi)
            g = chart.metric_matrix([th, ph])
            assert_allclose(g, np.diag([1.0, np.sin(th) ** 2]), atol=1e-8)

    def test_omega_inverse_convention(self, rng):
        chart = bloch_chart()
        th, ph = rng.uniform(0.3, np.pi - 0.3), rng.uniform(0, 2 * np.pi)
        low = chart.omega_matrix([th, ph])
        up = chart.omega_inverse([th, ph])
        assert_allclose(low @ up, -np.eye(2), atol=1e-8)

    def test_frame_rank_deficient_at_pole(self):
        chart = bloch_chart()
        with pytest.raises(ChartSingularity):
            chart.frame([1e-12, 0.3])

    def test_coordinate_velocity_round_trip(self, rng):
        chart = bloch_chart()
        coords = np.array([1.1, 2.3])
        x = chart.state(coords)
        v = hamiltonian_vector_field(pauli("z"), x)
        rates = chart.coordinate_velocity(coords, v)
        # free precession is phi-dot = 2 at fixed theta
        assert_allclose(rates, [0.0, 2.0], atol=1e-7)


class TestBracketPullback:
    def _check_chart_brackets(self, chart, coords, ops, x, tol=1e-7):
        w_up = chart.omega_inverse(coords)
        g_up = chart.metric_inverse(coords)
        grads = [chart.gradient(chart.expectation_function(op), coords) for op in ops]
        for i, a in enumerate(ops):
            for j, b in enumerate(ops):
                chart_omega = grads[i] @ w_up @ grads[j]
                chart_metric = grads[i] @ g_up @ grads[j]
                assert chart_omega == pytest.approx(
                    commutator_bracket(a, b, x), abs=tol
                )
                assert chart_metric == pytest.approx(
                    covariance_bracket(a, b, x), abs=tol
                )

    def test_bloch_chart_brackets(self, rng):
        chart = bloch_chart()
        ops = [pauli("x"), pauli("y"), pauli("z")]
        for _ in range(10):
            coords = np.array([rng.uniform(0.3, np.pi - 0.3), rng.uniform(0, 2 * np.pi)])
            self._check_chart_brackets(chart, coords, ops, chart.state(coords))

    def test_projective_chart_brackets_dim2(self, rng):
        for _ in range(10):
            amps = random_state_vector(rng, 2)
            coords, anchor = projective_coords(PureState(amps))
            chart = projective_chart(2, anchor)
            x = chart.state(coords)
            ops = [HermitianOperator(random_hermitian(rng, 2)) for _ in range(2)]
            self._check_chart_brackets(chart, coords, ops, x)

    def test_projective_chart_brackets_dim4(self, rng):
        for _ in range(5):
            amps = random_state_vector(rng, 4)
            coords, anchor = projective_coords(PureState(amps))
            chart = projective_chart(4, anchor)
            x = chart.state(coords)
            ops = [HermitianOperator(random_hermitian(rng, 4)) for _ in range(2)]
            self._check_chart_brackets(chart, coords, ops, x)


class TestProjectiveChart:
    def test_round_trip(self, rng):
        amps = random_state_vector(rng, 4)
        coords, anchor = projective_coords(PureState(amps))
        chart = projective_chart(4, anchor)
        x = chart.state(coords)
        # same ray: overlap modulus one
        assert abs(x.amplitudes.conj() @ PureState(amps).amplitudes) == pytest.approx(
            1.0, abs=1e-12
        )

    def test_out_of_disc_raises(self):
        chart = projective_chart(2, 0)
        with pytest.raises(ChartSingularity):
            chart.state([1.2, 0.0])


class TestInducedSymplecticMatrix:
    def _random_chart_point(self, rng):
        amps = random_state_vector(rng, 4)
        coords, anchor = projective_coords(PureState(amps))
        return projective_chart(4, anchor), coords

    def test_no_constraints_returns_omega_inverse(self, rng):
        chart, coords = self._random_chart_point(rng)
        w = chart.omega_inverse(coords)
        assert_allclose(induced_symplectic_matrix(chart, None, coords), w, atol=1e-14)

    def test_annihilates_constraint_gradients(self, rng):
        cs = separability_constraints()
        count = 0
        while count < 25:
            chart, coords = self._random_chart_point(rng)
            try:
                full = induced_symplectic_matrix(chart, cs, coords)
            except Exception:
                continue
            for c in cs:
                grad = chart.gradient(chart.pullback(c), coords)
                assert np.max(np.abs(full @ grad)) <= 1e-8
            assert_allclose(full, -full.T, atol=1e-15)
            count += 1

    def test_matches_multiplier_form_flow(self, rng):
        h = heisenberg_hamiltonian(1.0, 0.7)
        cs = separability_constraints()
        count = 0
        while count < 10:
            chart, coords = self._random_chart_point(rng)
            x = chart.state(coords)
            try:
                full = induced_symplectic_matrix(chart, cs, coords)
                v = symplectic_constrained_field(cs.offset_to(x), h, x, max_condition=1e6)
            except Exception:
                continue
            grad_h = chart.gradient(chart.expectation_function(h), coords)
            chart_rates = full @ grad_h
            pushed = chart.coordinate_velocity(coords, v)
            assert np.max(np.abs(chart_rates - pushed)) <= 1e-7
            count += 1

    def test_expectation_constraints_variant(self, rng):
        # the same identities hold for a pair of expectation constraints
        ops = [pauli("x"), pauli("y")]
        cs = ConstraintSet([ExpectationConstraint(op, 0.0) for op in ops])
        h = pauli("z")
        count = 0
        while count < 10:
            amps = random_state_vector(rng, 2)
            coords, anchor = projective_coords(PureState(amps))
            chart = projective_chart(2, anchor)
            x = chart.state(coords)
            try:
                full = induced_symplectic_matrix(chart, cs, coords)
                v = symplectic_constrained_field(cs.offset_to(x), h, x, max_condition=1e6)
            except Exception:
                continue
            for c in cs:
                grad = chart.gradient(chart.pullback(c), coords)
                assert np.max(np.abs(full @ grad)) <= 1e-8
            grad_h = chart.gradient(chart.expectation_function(h), coords)
            pushed = chart.coordinate_velocity(coords, v)
            assert np.max(np.abs(full @ grad_h - pushed)) <= 1e-7
            count += 1


class TestProductSphereChart:
    def test_constrained_field_tangent_to_surface(self, rng):
        # the symplectic flow with disentanglement constraints stays within
        # the span of the product-sphere frame
        chart = product_sphere_chart()
        h = heisenberg_hamiltonian(1.0, 0.7)
        cs = separability_constraints()
        for _ in range(5):
            coords = np.array([
                rng.uniform(0.4, np.pi - 0.4), rng.uniform(0, 2 * np.pi),
                rng.uniform(0.4, np.pi - 0.4), rng.uniform(0, 2 * np.pi),
            ])
            x = chart.state(coords)
            v = symplectic_constrained_field(cs.offset_to(x), h, x)
            rates = chart.coordinate_velocity(coords, v)
            frame = chart.frame(coords)
            recon = frame @ rates
            assert np.max(np.abs(recon - v.components)) <= 1e-6
