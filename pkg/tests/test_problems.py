import math

import numpy as np
import pytest

from families import abs_value_problem

from fmab.problems import (
    Ball,
    Box,
    DimensionMismatchError,
    FunctionClass,
    InvalidInstanceError,
    Unbounded,
    default_x0,
    evaluate,
    make_max_affine,
    make_quadratic_arm,
    make_smooth_convex,
    problem_from_json,
    problem_to_json,
    project,
    subgradient,
)


class TestSmoothConvex:
    def test_pinned_sigma_instance(self):
        prob = make_smooth_convex(2, [0.0, 0.0], c=0.5, rng_seed=0, sigma=[1.0, 1.0])
        assert evaluate(prob, [0.0, 0.0]) == pytest.approx(1.5)
        assert prob.f_star == pytest.approx(1.5)
        np.testing.assert_allclose(subgradient(prob, [0.0, 0.0]), 0.0)

    def test_invalid_dimension(self):
        with pytest.raises(InvalidInstanceError):
            make_smooth_convex(0, [], c=0.0, rng_seed=0)

    def test_random_sigma_structure(self):
        prob = make_smooth_convex(20, np.zeros(20), c=0.0, rng_seed=3)
        assert prob.sigma[0] == 1.0
        assert np.all(prob.sigma[1:] >= math.exp(-5.0) - 1e-12)
        assert np.all(prob.sigma[1:] <= 1.0)
        assert prob.fclass.L == pytest.approx(float(np.max(prob.sigma)))

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(11)
        prob = make_smooth_convex(6, rng.normal(size=6), c=0.3, rng_seed=rng)
        h = 1e-6
        for _ in range(20):
            x = rng.normal(size=6) * 2.0
            grad = subgradient(prob, x)
            fd = np.empty(6)
            for i in range(6):
                e = np.zeros(6)
                e[i] = h
                fd[i] = (evaluate(prob, x + e) - evaluate(prob, x - e)) / (2 * h)
            denom = max(1.0, float(np.linalg.norm(grad)))
            assert np.linalg.norm(grad - fd) / denom <= 1e-6


class TestMaxAffine:
    def test_abs_value_closed_form(self):
        prob = abs_value_problem(c=0.5)
        assert evaluate(prob, [2.0]) == pytest.approx(2.5)
        assert subgradient(prob, [2.0]) == pytest.approx(1.0)
        assert prob.f_star == pytest.approx(0.5)

    def test_piece_count_mirrored(self):
        prob = make_max_affine(20, 5, np.zeros(20), c=0.5, bound=4.0, rng_seed=0)
        assert prob.slopes.shape == (6, 20)  # ceil(5/2) mirrored pairs
        balanced = prob.slopes[:3] + prob.slopes[3:]
        np.testing.assert_allclose(balanced, 0.0, atol=1e-12)

    def test_minimum_attained_at_x_star(self):
        rng = np.random.default_rng(5)
        for p, c in ((5, 0.5), (10, 1.0), (12, 1.5)):
            x_star = rng.uniform(-2, 2, size=20)
            prob = make_max_affine(20, p, x_star, c, bound=4.0, rng_seed=rng)
            assert evaluate(prob, x_star) == pytest.approx(c)
            for _ in range(100):
                y = rng.uniform(-4, 4, size=20)
                assert evaluate(prob, y) >= c - 1e-12

    def test_x_star_outside_box_rejected(self):
        with pytest.raises(InvalidInstanceError):
            make_max_affine(2, 4, [5.0, 0.0], c=0.0, bound=4.0, rng_seed=0)

    def test_tie_breaks_to_lowest_piece_index(self):
        prob = abs_value_problem()
        # at the kink both pieces are active; the first one wins
        assert subgradient(prob, [0.0])[0] == pytest.approx(1.0)

    def test_subgradient_supports_function(self):
        rng = np.random.default_rng(9)
        prob = make_max_affine(5, 6, rng.uniform(-1, 1, size=5), c=0.2, bound=2.0, rng_seed=rng)
        for _ in range(50):
            x = rng.uniform(-2, 2, size=5)
            y = rng.uniform(-2, 2, size=5)
            s = subgradient(prob, x)
            assert evaluate(prob, y) >= evaluate(prob, x) + float(s @ (y - x)) - 1e-9


class TestQuadraticArm:
    def test_minimum(self):
        prob = make_quadratic_arm(0.3)
        assert prob.f_star == pytest.approx(-0.045)
        assert prob.x_star[0] == pytest.approx(0.3)

    def test_zero_mean(self):
        assert make_quadratic_arm(0.0).f_star == 0.0

    def test_value_and_gradient_at_origin(self):
        prob = make_quadratic_arm(0.9)
        assert evaluate(prob, [0.0]) == pytest.approx(0.0)
        assert subgradient(prob, [0.0])[0] == pytest.approx(-0.9)

    def test_dimension_mismatch(self):
        prob = make_quadratic_arm(0.5)
        with pytest.raises(DimensionMismatchError):
            evaluate(prob, [1.0, 2.0])


class TestProjection:
    def test_box_clamp(self):
        box = Box(np.array([-4.0, -4.0]), np.array([4.0, 4.0]))
        np.testing.assert_allclose(project(box, [5.0, -5.0]), [4.0, -4.0])

    def test_idempotent(self):
        rng = np.random.default_rng(2)
        sets = [
            Box(np.array([-1.0, -2.0]), np.array([2.0, 1.0])),
            Ball(np.zeros(2), 1.5),
            Unbounded(3.0, 2),
        ]
        for feas in sets:
            for _ in range(50):
                x = rng.normal(size=2) * 3
                once = project(feas, x)
                np.testing.assert_allclose(project(feas, once), once, atol=1e-12)

    def test_ball_radial_scaling(self):
        ball = Ball(np.zeros(2), 1.0)
        np.testing.assert_allclose(project(ball, [3.0, 4.0]), [0.6, 0.8])

    def test_nonexpansive(self):
        rng = np.random.default_rng(3)
        for feas in (Box(np.array([-1.0]), np.array([1.0])), Ball(np.zeros(3), 2.0)):
            dim = feas.dim
            for _ in range(100):
                x, y = rng.normal(size=dim) * 4, rng.normal(size=dim) * 4
                dist_proj = np.linalg.norm(project(feas, x) - project(feas, y))
                assert dist_proj <= np.linalg.norm(x - y) + 1e-12

    def test_diameters(self):
        assert Box(np.array([-4.0] * 2), np.array([4.0] * 2)).diameter == pytest.approx(
            8 * math.sqrt(2)
        )
        assert Ball(np.zeros(3), 2.0).diameter == 4.0
        assert Unbounded(7.0).diameter == 7.0

    def test_invalid_sets(self):
        with pytest.raises(InvalidInstanceError):
            Box(np.array([1.0]), np.array([0.0]))
        with pytest.raises(InvalidInstanceError):
            Ball(np.zeros(2), 0.0)
        with pytest.raises(InvalidInstanceError):
            Unbounded(0.0)


class TestFunctionClass:
    def test_kappa(self):
        fc = FunctionClass(mu=0.5, L=2.0, M=math.inf, R=1.0)
        assert fc.kappa == pytest.approx(4.0)
        assert math.isnan(FunctionClass(mu=0.0, L=1.0, M=1.0, R=1.0).kappa)

    def test_needs_one_finite_constant(self):
        with pytest.raises(InvalidInstanceError):
            FunctionClass(mu=0.0, L=math.inf, M=math.inf, R=1.0)


class TestGlobalLowerBound:
    def test_all_synthetic_kinds(self):
        rng = np.random.default_rng(17)
        problems = [
            make_smooth_convex(4, rng.normal(size=4), c=0.1, rng_seed=rng),
            make_max_affine(4, 6, rng.uniform(-1, 1, size=4), c=0.7, bound=2.0, rng_seed=rng),
            make_quadratic_arm(0.4),
        ]
        for prob in problems:
            for _ in range(100):
                x = project(prob.feasible, rng.normal(size=prob.dim) * 2)
                assert evaluate(prob, x) >= prob.f_star - 1e-12


class TestSerialization:
    def test_round_trip_identity(self):
        rng = np.random.default_rng(23)
        problems = [
            make_smooth_convex(3, rng.normal(size=3), c=0.25, rng_seed=7),
            make_max_affine(3, 5, rng.uniform(-1, 1, size=3), c=0.5, bound=2.0, rng_seed=8),
            make_quadratic_arm(0.9),
        ]
        for prob in problems:
            text = problem_to_json(prob)
            clone = problem_from_json(text)
            assert problem_to_json(clone) == text
            x = rng.normal(size=prob.dim)
            assert evaluate(clone, x) == pytest.approx(evaluate(prob, x))

    def test_byte_stable_given_seed(self):
        a = make_smooth_convex(5, np.ones(5), c=0.1, rng_seed=99)
        b = make_smooth_convex(5, np.ones(5), c=0.1, rng_seed=99)
        assert problem_to_json(a) == problem_to_json(b)


class TestDefaultStart:
    def test_box_midpoint(self):
        prob = make_max_affine(2, 4, [0.5, 0.5], c=0.0, bound=4.0, rng_seed=0)
        np.testing.assert_allclose(default_x0(prob), [0.0, 0.0])

    def test_unbounded_origin(self):
        prob = make_quadratic_arm(0.3)
        np.testing.assert_allclose(default_x0(prob), [0.0])
