import numpy as np
import pytest

from geodescent.dataio import SparseDataset, synthetic_classification
from geodescent.errors import (
    DimensionMismatch,
    InvalidDimension,
    InvalidParameter,
    NonFiniteInput,
    NonPositiveLambda,
    NotPositiveDefinite,
)
from geodescent.geometry import contains
from geodescent.objectives import (
    grad_step,
    quadratic_oracle,
    smoothed_hinge,
    smoothed_hinge_erm_oracle,
    smoothed_hinge_prime,
    strong_convexity_ball,
    worst_case_oracle,
)


def tiny_dataset():
    return SparseDataset(1, 1, [[(1, 1.0)]], np.array([1.0]))


def fd_gradient(oracle, x):
    h = 1e-5 * (1.0 + np.linalg.norm(x))
    g = np.empty_like(x)
    for i in range(x.shape[0]):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (oracle.value(x + e) - oracle.value(x - e)) / (2.0 * h)
    return g


def oracle_zoo(rng):
    q = rng.uniform(0.5, 20.0, 8)
    b = rng.standard_normal(8)
    data = synthetic_classification(40, 12, density=0.4, seed=int(rng.integers(1 << 31)))
    return [
        quadratic_oracle(q, b),
        smoothed_hinge_erm_oracle(data, lam=1e-2),
        worst_case_oracle(15, 50.0),
    ]


class TestSmoothedHinge:
    def test_value_table(self):
        assert smoothed_hinge(1.0) == 0.0
        assert smoothed_hinge(0.0) == 0.5
        assert smoothed_hinge(0.5) == 0.125

    def test_derivative_table(self):
        assert smoothed_hinge_prime(1.0) == 0.0
        assert smoothed_hinge_prime(0.0) == -1.0
        assert smoothed_hinge_prime(0.5) == -0.5


class TestQuadraticOracle:
    def test_identity(self):
        oracle = quadratic_oracle(np.ones(3), np.zeros(3))
        assert oracle.alpha == 1.0 and oracle.beta == 1.0
        assert oracle.f_star == 0.0
        assert np.array_equal(oracle.x_star, np.zeros(3))

    def test_condition_number(self):
        oracle = quadratic_oracle(np.array([1.0, 100.0]), np.zeros(2))
        assert oracle.kappa == 100.0

    def test_eval_example(self):
        oracle = quadratic_oracle(np.array([1.0, 4.0]), np.zeros(2))
        r = oracle.eval(np.array([1.0, 1.0]))
        assert r.value == pytest.approx(2.5)
        assert np.allclose(r.gradient, [1.0, 4.0])

    def test_rejects_nonpositive(self):
        with pytest.raises(NotPositiveDefinite):
            quadratic_oracle(np.array([1.0, -2.0]), np.zeros(2))
        with pytest.raises(NotPositiveDefinite):
            quadratic_oracle(np.array([[1.0, 3.0], [3.0, 1.0]]), np.zeros(2))

    def test_dense_matches_diagonal(self):
        rng = np.random.default_rng(9)
        q = rng.uniform(0.5, 5.0, 4)
        b = rng.standard_normal(4)
        d1 = quadratic_oracle(q, b)
        d2 = quadratic_oracle(np.diag(q), b)
        x = rng.standard_normal(4)
        assert d1.eval(x).value == pytest.approx(d2.eval(x).value)
        assert np.allclose(d1.x_star, d2.x_star)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(10)
        q = rng.uniform(0.2, 10.0, 6)
        b = rng.standard_normal(6)
        oracle = quadratic_oracle(q, b)
        for _ in range(20):
            x = rng.standard_normal(6) * 3.0
            g = oracle.eval(x).gradient
            assert np.allclose(g, fd_gradient(oracle, x), rtol=1e-6, atol=1e-8)

    def test_nonfinite_input(self):
        oracle = quadratic_oracle(np.ones(2), np.zeros(2))
        with pytest.raises(NonFiniteInput):
            oracle.eval(np.array([np.nan, 0.0]))
        with pytest.raises(DimensionMismatch):
            oracle.eval(np.zeros(3))


class TestErmOracle:
    def test_single_sample_example(self):
        oracle = smoothed_hinge_erm_oracle(tiny_dataset(), lam=1.0)
        r = oracle.eval(np.array([0.0]))
        assert r.value == pytest.approx(0.5)
        assert np.allclose(r.gradient, [-1.0])

    def test_inactive_loss_region(self):
        data = SparseDataset(2, 2, [[(1, 1.0)], [(2, 1.0)]], np.array([1.0, 1.0]))
        lam = 0.5
        oracle = smoothed_hinge_erm_oracle(data, lam=lam)
        x = np.array([3.0, 2.0])
        r = oracle.eval(x)
        assert r.value == pytest.approx(0.5 * lam * float(x @ x))
        assert np.allclose(r.gradient, lam * x)

    def test_rejects_bad_lambda(self):
        with pytest.raises(NonPositiveLambda):
            smoothed_hinge_erm_oracle(tiny_dataset(), lam=0.0)

    def test_restrict_costs_exactly_two_products(self):
        data = synthetic_classification(1000, 30, density=0.2, seed=1)
        oracle = smoothed_hinge_erm_oracle(data, lam=1e-3)
        rng = np.random.default_rng(11)
        base = rng.standard_normal(30)
        direction = rng.standard_normal(30)
        before = oracle.counters.snapshot()["matvec_products"]
        line = oracle.restrict(base, direction)
        setup = oracle.counters.snapshot()["matvec_products"] - before
        assert setup == 2
        for t in np.linspace(-2.0, 2.0, 50):
            line.eval(float(t))
        probes_cost = oracle.counters.snapshot()["matvec_products"] - before - setup
        assert probes_cost == 0

    def test_restriction_matches_direct_evaluation(self):
        data = synthetic_classification(60, 10, density=0.5, seed=2)
        oracle = smoothed_hinge_erm_oracle(data, lam=0.1)
        rng = np.random.default_rng(12)
        base = rng.standard_normal(10)
        direction = rng.standard_normal(10)
        line = oracle.restrict(base, direction)
        for t in [-1.5, -0.2, 0.0, 0.4, 2.0]:
            v, d = line.eval(t)
            assert v == pytest.approx(oracle.value(base + t * direction), rel=1e-12)
        v0, d0 = line.eval(0.0)
        r0 = oracle.eval(base)
        assert v0 == pytest.approx(r0.value, rel=1e-10)
        assert d0 == pytest.approx(float(r0.gradient @ direction), rel=1e-10)

    def test_beta_estimate_upper_bounds_hessian(self):
        data = synthetic_classification(100, 15, density=0.4, seed=3)
        lam = 1e-3
        oracle = smoothed_hinge_erm_oracle(data, lam=lam)
        beta_hat = oracle.beta_estimate()
        a = data.to_dense()
        sigma_max_sq = np.linalg.svd(a, compute_uv=False)[0] ** 2
        assert beta_hat == pytest.approx(lam + sigma_max_sq / data.n_samples, rel=1e-6)

    def test_gradient_matches_finite_differences(self):
        data = synthetic_classification(50, 8, density=0.6, seed=4)
        oracle = smoothed_hinge_erm_oracle(data, lam=0.05)
        rng = np.random.default_rng(13)
        for _ in range(20):
            x = rng.standard_normal(8)
            g = oracle.eval(x).gradient
            assert np.allclose(g, fd_gradient(oracle, x), rtol=2e-5, atol=1e-7)


class TestWorstCaseOracle:
    def test_value_at_origin(self):
        oracle = worst_case_oracle(10, 40.0)
        assert oracle.value(np.zeros(10)) == pytest.approx(20.0)
        g = oracle.eval(np.zeros(10)).gradient
        expected = np.zeros(10)
        expected[0] = -40.0
        assert np.allclose(g, expected)

    def test_two_dim_optimum(self):
        oracle = worst_case_oracle(2, 2.0)
        assert np.allclose(oracle.x_star, [10.0 / 21.0, 4.0 / 21.0], atol=1e-12)
        g = oracle.eval(oracle.x_star).gradient
        assert np.linalg.norm(g) <= 1e-12

    def test_smoothness_constant(self):
        n, w = 9, 7.0
        oracle = worst_case_oracle(n, w)
        lam_max = 2.0 * (1.0 + np.cos(np.pi / (n + 1)))
        assert oracle.beta == pytest.approx(1.0 + w * lam_max)
        assert oracle.alpha == 1.0

    def test_gradient_matches_finite_differences(self):
        oracle = worst_case_oracle(50, 100.0)
        rng = np.random.default_rng(14)
        for _ in range(10):
            x = rng.standard_normal(50)
            g = oracle.eval(x).gradient
            assert np.allclose(g, fd_gradient(oracle, x), rtol=1e-6, atol=1e-6)

    def test_invalid_dimension(self):
        with pytest.raises(InvalidDimension):
            worst_case_oracle(1, 10.0)


class TestGradStep:
    def test_exact_step_on_sphere(self):
        alpha = 0.3
        oracle = quadratic_oracle(alpha * np.ones(4), np.zeros(4))
        rng = np.random.default_rng(15)
        x = rng.standard_normal(4)
        assert np.allclose(grad_step(oracle, x, 1.0 / alpha), np.zeros(4), atol=1e-14)

    def test_hand_arithmetic(self):
        oracle = quadratic_oracle(np.array([1.0, 4.0]), np.zeros(2))
        x = np.array([1.0, 1.0])
        assert np.allclose(grad_step(oracle, x, 0.25), [0.75, 0.0])
        assert np.allclose(grad_step(oracle, x, 1.0), [0.0, -3.0])

    def test_rejects_nonpositive_step(self):
        oracle = quadratic_oracle(np.ones(2), np.zeros(2))
        with pytest.raises(InvalidParameter):
            grad_step(oracle, np.ones(2), 0.0)


class TestStrongConvexityBall:
    def test_sphere_collapses(self):
        oracle = quadratic_oracle(2.0 * np.ones(2), np.zeros(2))
        ball = strong_convexity_ball(oracle, np.array([1.0, 1.0]))
        assert ball.radius_sq == 0.0
        assert np.allclose(ball.center, np.zeros(2))

    def test_hand_arithmetic(self):
        oracle = quadratic_oracle(np.array([1.0, 4.0]), np.zeros(2))
        ball = strong_convexity_ball(oracle, np.array([1.0, 1.0]))
        assert np.allclose(ball.center, [0.0, -3.0])
        assert ball.radius_sq == pytest.approx(17.0 * 0.75)
        assert contains(ball, oracle.x_star, tol=1e-12)

    def test_contains_optimum_randomly(self):
        rng = np.random.default_rng(16)
        for _ in range(100):
            n = int(rng.integers(2, 10))
            q = rng.uniform(0.2, 15.0, n)
            oracle = quadratic_oracle(q, rng.standard_normal(n))
            x = rng.standard_normal(n) * 5.0
            ball = strong_convexity_ball(oracle, x)
            assert contains(ball, oracle.x_star, tol=1e-9 * (1.0 + ball.radius_sq))


class TestSharedInvariants:
    def test_gradients_match_finite_differences(self):
        rng = np.random.default_rng(17)
        for oracle in oracle_zoo(rng):
            for _ in range(25):
                x = rng.standard_normal(oracle.dimension)
                g = oracle.eval(x).gradient
                fd = fd_gradient(oracle, x)
                denom = max(1.0, float(np.linalg.norm(fd)))
                assert np.linalg.norm(g - fd) / denom <= 1e-5

    def test_strong_convexity_lower_bound(self):
        rng = np.random.default_rng(18)
        for oracle in oracle_zoo(rng):
            for _ in range(30):
                x = rng.standard_normal(oracle.dimension)
                y = rng.standard_normal(oracle.dimension)
                rx = oracle.eval(x)
                fy = oracle.value(y)
                d = y - x
                lower = rx.value + float(rx.gradient @ d) + 0.5 * oracle.alpha * float(d @ d)
                assert fy >= lower - 1e-9 * (1.0 + abs(fy))

    def test_smoothness_upper_bound(self):
        rng = np.random.default_rng(19)
        for oracle in oracle_zoo(rng):
            beta = oracle.beta if oracle.beta is not None else oracle.beta_estimate()
            for _ in range(30):
                x = rng.standard_normal(oracle.dimension)
                y = rng.standard_normal(oracle.dimension)
                rx = oracle.eval(x)
                fy = oracle.value(y)
                d = y - x
                upper = rx.value + float(rx.gradient @ d) + 0.5 * beta * float(d @ d)
                assert fy <= upper + 1e-9 * (1.0 + abs(fy))

    def test_descent_lemma(self):
        rng = np.random.default_rng(20)
        for oracle in oracle_zoo(rng):
            beta = oracle.beta if oracle.beta is not None else oracle.beta_estimate()
            for _ in range(30):
                x = rng.standard_normal(oracle.dimension)
                r = oracle.eval(x)
                g2 = float(r.gradient @ r.gradient)
                f_plus = oracle.value(x - r.gradient / beta)
                assert f_plus <= r.value - g2 / (2.0 * beta) + 1e-9 * (1.0 + abs(r.value))

    def test_localization_ball_inequality(self):
        # |x* - x++|^2 <= (|g|^2/a^2)(1 - 1/k) - (2/a)(f(x+) - f*) at random x.
        rng = np.random.default_rng(21)
        for _ in range(100):
            n = int(rng.integers(2, 12))
            q = rng.uniform(0.3, 20.0, n)
            oracle = quadratic_oracle(q, rng.standard_normal(n))
            x = rng.standard_normal(n) * 3.0
            r = oracle.eval(x)
            g2 = float(r.gradient @ r.gradient)
            a = oracle.alpha
            f_plus = oracle.value(x - r.gradient / oracle.beta)
            x_pp = x - r.gradient / a
            lhs = float(np.sum((oracle.x_star - x_pp) ** 2))
            rhs = (g2 / a**2) * (1.0 - 1.0 / oracle.kappa) - (2.0 / a) * (f_plus - oracle.f_star)
            assert lhs <= rhs + 1e-9 * (1.0 + abs(rhs))

    def test_restriction_consistency_at_zero(self):
        rng = np.random.default_rng(22)
        for oracle in oracle_zoo(rng):
            base = rng.standard_normal(oracle.dimension)
            direction = rng.standard_normal(oracle.dimension)
            line = oracle.restrict(base, direction)
            v0, d0 = line.eval(0.0)
            r = oracle.eval(base)
            assert v0 == pytest.approx(r.value, rel=1e-10, abs=1e-12)
            assert d0 == pytest.approx(float(r.gradient @ direction), rel=1e-10, abs=1e-12)
