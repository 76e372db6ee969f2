import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import marginal_pair
from ordibound.attainment import (
    ValidationReport,
    build_plan,
    construct_attaining_matrix,
    construct_lower_attaining_matrix,
    construct_with_plan,
    triangular_fill_a,
    triangular_fill_b,
    validate_attainment,
)
from ordibound.bounds import gamma_independent, gamma_lower, gamma_of_joint, gamma_upper, range_sum
from ordibound.errors import DominanceViolated
from ordibound.transport import lp_gamma_bounds

ATTAINING = np.array([[0.0, 0.0, 0.2], [0.3, 0.0, 0.0], [0.2, 0.3, 0.0]])


class TestTriangularFills:
    def test_a_single(self):
        np.testing.assert_allclose(triangular_fill_a([0.5], [0.3]).matrix, [[0.3]])

    def test_a_example(self):
        f = triangular_fill_a([0.1, 0.9], [0.5, 0.4])
        np.testing.assert_allclose(f.matrix, [[0.1, 0.0], [0.4, 0.4]], atol=1e-15)
        np.testing.assert_allclose(f.slack, [0.0, 0.1], atol=1e-15)

    def test_a_dominance(self):
        with pytest.raises(DominanceViolated, match="s=0"):
            triangular_fill_a([0.2, 0.2], [0.5, 0.4])

    def test_b_single(self):
        np.testing.assert_allclose(triangular_fill_b([0.3], [0.5]).matrix, [[0.3]])

    def test_b_example(self):
        f = triangular_fill_b([0.2, 0.7], [0.6, 0.5])
        np.testing.assert_allclose(f.matrix, [[0.2, 0.0], [0.4, 0.3]], atol=1e-15)

    def test_b_dominance(self):
        with pytest.raises(DominanceViolated, match="s=0"):
            triangular_fill_b([0.7, 0.1], [0.6, 0.5])

    @given(st.integers(1, 8), st.integers(0, 2**32 - 1))
    def test_a_contract(self, n, seed):
        rng = np.random.default_rng(seed)
        y = rng.dirichlet(np.ones(n)) * rng.random()
        # Build x with suffix dominance by pushing extra mass downward.
        x = y.copy()
        for _ in range(n):
            k, l = sorted(rng.integers(0, n, 2))
            move = x[k] * rng.random()
            x[k] -= move
            x[l] += move
        x = x + rng.random(n) * 0.1
        f = triangular_fill_a(x, y)
        M = f.matrix
        assert np.all(M >= 0)
        assert np.all(np.triu(M, 1) == 0)
        np.testing.assert_allclose(M.sum(axis=0), y, atol=1e-12)
        assert np.all(M.sum(axis=1) <= x + 1e-12)

    @given(st.integers(1, 8), st.integers(0, 2**32 - 1))
    def test_b_contract(self, n, seed):
        rng = np.random.default_rng(seed)
        x = rng.dirichlet(np.ones(n)) * rng.random()
        y = x.copy()
        for _ in range(n):
            k, l = sorted(rng.integers(0, n, 2))
            move = y[l] * rng.random()
            y[l] -= move
            y[k] += move
        y = y + rng.random(n) * 0.1
        f = triangular_fill_b(x, y)
        M = f.matrix
        assert np.all(M >= 0)
        assert np.all(np.triu(M, 1) == 0)
        np.testing.assert_allclose(M.sum(axis=1), x, atol=1e-12)
        assert np.all(M.sum(axis=0) <= y + 1e-12)


class TestPlan:
    def test_worked_example(self, example_pair):
        plan = build_plan(*example_pair)
        assert (plan.j1, plan.m1) == (1, 2)
        assert plan.lambda1 == pytest.approx(0.0, abs=1e-12)

    def test_point_masses_apart(self):
        # delta_11 = 2, delta_12 = 1, delta_21 = 2: the minimizer is (1, 2).
        plan = build_plan([0, 0, 1], [1, 0, 0])
        assert (plan.j1, plan.m1) == (1, 2)
        assert plan.lambda1 == pytest.approx(0.0, abs=1e-12)

    def test_point_mass_at_zero(self):
        p = [1.0, 0.0, 0.0]
        plan = build_plan(p, p)
        assert np.all(plan.q_row_adjusted >= 0)
        assert np.all(plan.q_col_adjusted >= 0)
        P = construct_attaining_matrix(p, p)
        assert P.entries[0, 0] == pytest.approx(1.0)

    @given(marginal_pair())
    def test_invariants(self, pair):
        p1, p0 = pair
        plan = build_plan(p1, p0)
        assert (plan.j1, plan.m1) == tuple(gamma_upper(p1, p0)[1])
        j, m = plan.j1, plan.m1
        want = range_sum(p1, j, j + m - 1) - range_sum(p0, j - 1, j + m - 2)
        assert plan.lambda1 == pytest.approx(want, abs=1e-12)
        assert np.all(plan.q_row_adjusted >= 0)
        assert np.all(plan.q_col_adjusted >= 0)


class TestConstruction:
    def test_worked_example(self, example_pair):
        P = construct_attaining_matrix(*example_pair)
        rep = validate_attainment(P, *example_pair, 0.6)
        assert rep.ok
        # Here the construction lands on the hand-computed matrix.
        np.testing.assert_allclose(P.entries, ATTAINING, atol=1e-12)

    @pytest.mark.parametrize("c", [0, 1, 2])
    def test_identical_point_masses(self, c):
        p = np.eye(3)[c]
        P = construct_attaining_matrix(p, p)
        assert P.entries[c, c] == pytest.approx(1.0)
        assert gamma_of_joint(P) == pytest.approx(0.0, abs=1e-15)

    def test_senn(self, senn_marginals):
        P = construct_attaining_matrix(*senn_marginals)
        g = gamma_upper(*senn_marginals)[0]
        assert validate_attainment(P, *senn_marginals, g).ok
        assert round(gamma_of_joint(P), 3) == 0.900

    def test_diagonal_identity(self, example_pair):
        P, plan = construct_with_plan(*example_pair)
        j = plan.j1 - 1
        assert P.entries[j, j] == pytest.approx(max(0.0, -plan.lambda1), abs=1e-12)

    @given(marginal_pair())
    def test_random_upper(self, pair):
        p1, p0 = pair
        P, plan = construct_with_plan(p1, p0)
        rep = validate_attainment(P, p1, p0, gamma_upper(p1, p0)[0])
        assert rep.ok, rep.failures
        assert gamma_of_joint(P) == pytest.approx(lp_gamma_bounds(p1, p0)[1], abs=1e-9)
        j = plan.j1 - 1
        assert P.entries[j, j] == pytest.approx(max(0.0, -plan.lambda1), abs=1e-9)

    @given(marginal_pair())
    def test_random_lower(self, pair):
        p1, p0 = pair
        L = construct_lower_attaining_matrix(p1, p0)
        rep = validate_attainment(L, p1, p0, gamma_lower(p1, p0)[0])
        assert rep.ok, rep.failures


class TestValidation:
    def test_passes(self, example_pair):
        rep = validate_attainment(ATTAINING, *example_pair, 0.6)
        assert isinstance(rep, ValidationReport)
        assert rep.ok
        assert rep.to_dict()["ok"] is True

    def test_deleted_mass(self, example_pair):
        M = ATTAINING.copy()
        M[0, 2] = 0.0
        rep = validate_attainment(M, *example_pair, 0.6)
        assert not rep.ok
        assert not rep.rows_ok and not rep.cols_ok
        assert rep.failures

    def test_independent_coupling(self, example_pair):
        p1, p0 = example_pair
        assert validate_attainment(np.outer(p1, p0), p1, p0, gamma_independent(p1, p0)).ok

    def test_never_raises(self, example_pair):
        rep = validate_attainment(np.full((2, 2), -1.0), *example_pair, 0.6)
        assert not rep.ok and not rep.nonnegative
