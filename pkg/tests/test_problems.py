"""Tests for problem definitions, proximal operators and generators."""

import json
import math

import numpy as np
import pytest

from blockcd.problems import (
    BlockPartition,
    CompositeQuadraticProblem,
    NonsmoothTerm,
    ProblemFormatError,
    block_gradient,
    compute_constants,
    eval_objective,
    load_problem,
    make_lasso_instance,
    make_table1_diagonal,
    make_table1_diagonal_qp,
    make_table1_full,
    make_table1_full_qp,
    make_toeplitz_instance,
    nonsmooth_value,
    oracle_from_quadratic,
    prox,
    smooth_value,
    toeplitz_matrix,
    toeplitz_start,
)
from blockcd.linalg import sym_eig_extremes
from blockcd.rng import SplitMix64


def identity_problem(k, h=None):
    eye = np.eye(k)
    return CompositeQuadraticProblem(
        partition=BlockPartition(k, 1),
        a_blocks=tuple(eye[:, [i]] for i in range(k)),
        b=np.zeros(k),
        h=tuple(h or (NonsmoothTerm.zero() for _ in range(k))),
    )


class TestTypes:
    def test_partition_validation(self):
        with pytest.raises(ValueError):
            BlockPartition(0, 1)
        assert BlockPartition(4, 3).dimension == 12

    def test_term_validation(self):
        with pytest.raises(ValueError):
            NonsmoothTerm.l1(-0.5)
        with pytest.raises(ValueError):
            NonsmoothTerm.box(2.0, 1.0)
        with pytest.raises(ValueError):
            NonsmoothTerm("huber")

    def test_block_shape_validation(self):
        with pytest.raises(ValueError):
            CompositeQuadraticProblem(
                partition=BlockPartition(2, 1),
                a_blocks=(np.ones((3, 1)), np.ones((2, 1))),
                b=np.zeros(3),
                h=(NonsmoothTerm.zero(), NonsmoothTerm.zero()))

    def test_oracle_validation(self):
        with pytest.raises(ValueError):
            make_table1_diagonal(0, 1.0)
        # coordinate constant above the global one is rejected
        from blockcd.problems import SmoothProblemOracle
        with pytest.raises(ValueError):
            SmoothProblemOracle(dimension=2, value=lambda x: 0.0,
                                gradient=lambda x: np.zeros(2),
                                lipschitz_global=1.0,
                                lipschitz_coordinate=np.array([1.0, 2.0]))


class TestObjective:
    def test_identity_zero(self):
        p = identity_problem(3)
        assert eval_objective(p, np.zeros(3)) == 0.0

    def test_scalar_lasso_value(self):
        # 1/2 (2*1 - 4)^2 + 1*|1| = 2 + 1 = 3
        p = CompositeQuadraticProblem(
            partition=BlockPartition(1, 1),
            a_blocks=(np.array([[2.0]]),),
            b=np.array([4.0]),
            h=(NonsmoothTerm.l1(1.0),))
        assert eval_objective(p, [1.0]) == pytest.approx(3.0)

    def test_box_infeasible_is_inf(self):
        p = identity_problem(2, h=[NonsmoothTerm.box(-1, 1), NonsmoothTerm.box(-1, 1)])
        assert eval_objective(p, [0.5, 2.0]) == math.inf
        assert eval_objective(p, [0.5, 1.0]) == pytest.approx(0.5 * (0.25 + 1.0))

    def test_toeplitz_matches_brute_force(self):
        # canonical value equals ||T x||^2 for the unscaled pattern
        p, x0 = make_toeplitz_instance(10)
        t = toeplitz_matrix(10)
        assert eval_objective(p, x0) == pytest.approx(
            float(np.linalg.norm(t @ x0) ** 2), rel=1e-14)
        assert smooth_value(p, x0) == pytest.approx(eval_objective(p, x0))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            eval_objective(identity_problem(3), np.zeros(4))


class TestBlockGradient:
    def test_zero_residual(self):
        p = identity_problem(3)
        np.testing.assert_array_equal(block_gradient(p, 1, np.zeros(3)), [0.0])

    def test_one_dimensional(self):
        p = CompositeQuadraticProblem(
            partition=BlockPartition(1, 1),
            a_blocks=(np.array([[1.0]]),),
            b=np.array([1.0]),
            h=(NonsmoothTerm.zero(),))
        np.testing.assert_allclose(block_gradient(p, 0, [0.0]), [-1.0])

    def test_finite_difference_oracle_toeplitz(self):
        p, x0 = make_toeplitz_instance(10)
        grad = block_gradient(p, 1, x0)
        h = 1e-6
        bumped_up, bumped_dn = x0.copy(), x0.copy()
        bumped_up[1] += h
        bumped_dn[1] -= h
        fd = (smooth_value(p, bumped_up) - smooth_value(p, bumped_dn)) / (2 * h)
        assert grad[0] == pytest.approx(fd, rel=1e-6, abs=1e-6)

    def test_finite_difference_property_random_points(self):
        problems = [make_toeplitz_instance(8)[0],
                    make_lasso_instance(12, 6, 0.1, seed=4)[0],
                    make_table1_full_qp(5, 3.0),
                    make_table1_diagonal_qp(5, 3.0)]
        gen = SplitMix64(99)
        h = 1e-6
        for p in problems:
            dim = p.partition.dimension
            for _ in range(20):
                x = gen.normal_vector(dim)
                for k in range(p.partition.block_count):
                    grad = block_gradient(p, k, x)
                    for j in range(p.partition.block_size):
                        up, dn = x.copy(), x.copy()
                        idx = k * p.partition.block_size + j
                        up[idx] += h
                        dn[idx] -= h
                        fd = (smooth_value(p, up) - smooth_value(p, dn)) / (2 * h)
                        assert grad[j] == pytest.approx(fd, rel=1e-5, abs=1e-5)

    def test_bad_block_index(self):
        with pytest.raises(ValueError):
            block_gradient(identity_problem(2), 5, np.zeros(2))

    def test_oracle_gradients_match_finite_differences(self):
        gen = SplitMix64(123)
        h = 1e-6
        for oracle in (make_table1_diagonal(6, 2.5), make_table1_full(6, 2.5)):
            for _ in range(20):
                x = gen.normal_vector(6)
                grad = oracle.gradient(x)
                for j in range(6):
                    up, dn = x.copy(), x.copy()
                    up[j] += h
                    dn[j] -= h
                    fd = (oracle.value(up) - oracle.value(dn)) / (2 * h)
                    assert grad[j] == pytest.approx(fd, rel=1e-5, abs=1e-5)
                    assert oracle.coordinate_gradient(j, x) == grad[j]


class TestProx:
    def test_l1_soft_threshold(self):
        np.testing.assert_allclose(prox(NonsmoothTerm.l1(1.0), np.array([3.0]), 1.0), [2.0])
        np.testing.assert_allclose(prox(NonsmoothTerm.l1(1.0), np.array([-0.5]), 1.0), [0.0])

    def test_group_shrinkage(self):
        v = np.array([1.2, 1.6])  # norm 2
        np.testing.assert_allclose(prox(NonsmoothTerm.group_l2(1.0), v, 1.0), v / 2.0)

    def test_group_inside_ball_maps_to_zero(self):
        v = np.array([0.3, 0.4])  # norm 0.5 <= weight * step
        np.testing.assert_array_equal(prox(NonsmoothTerm.group_l2(1.0), v, 1.0),
                                      np.zeros(2))

    def test_zero_is_identity(self):
        v = np.array([1.0, -2.0])
        np.testing.assert_array_equal(prox(NonsmoothTerm.zero(), v, 0.5), v)

    def test_box_clips(self):
        np.testing.assert_array_equal(
            prox(NonsmoothTerm.box(-1.0, 1.0), np.array([-3.0, 0.2, 2.0]), 1.0),
            [-1.0, 0.2, 1.0])

    def test_nonexpansive(self):
        gen = SplitMix64(13)
        terms = [NonsmoothTerm.zero(), NonsmoothTerm.l1(0.7),
                 NonsmoothTerm.group_l2(1.3), NonsmoothTerm.box(-0.5, 2.0)]
        for term in terms:
            for _ in range(25):
                v1 = gen.normal_vector(4)
                v2 = gen.normal_vector(4)
                d_out = np.linalg.norm(prox(term, v1, 0.8) - prox(term, v2, 0.8))
                assert d_out <= np.linalg.norm(v1 - v2) + 1e-12

    def test_group_scalar_equals_l1(self):
        gen = SplitMix64(17)
        for _ in range(50):
            v = gen.normal_vector(1) * 3
            step = 0.1 + gen.uniform()
            np.testing.assert_allclose(
                prox(NonsmoothTerm.group_l2(0.9), v, step),
                prox(NonsmoothTerm.l1(0.9), v, step), atol=1e-15)

    def test_prox_is_exact_minimizer(self):
        # golden-section oracle on the scalar prox objective; the point
        # comparison allows for the comparison-noise floor of golden
        # section, the value comparison is tight
        from oracles import golden_section_min

        gen = SplitMix64(19)
        for term in (NonsmoothTerm.l1(0.6), NonsmoothTerm.box(-0.4, 0.9)):
            lo, hi = (term.lo, term.hi) if term.kind == "box" else (-10.0, 10.0)
            for _ in range(10):
                v = np.array([3.0 * gen.normal()])
                step = 0.2 + gen.uniform()

                def objective(u):
                    return (nonsmooth_value(term, np.array([u]))
                            + (u - v[0]) ** 2 / (2.0 * step))

                best = golden_section_min(objective, lo, hi)
                found = prox(term, v, step)[0]
                assert found == pytest.approx(best, abs=5e-7)
                assert objective(found) <= objective(best) + 1e-12

    def test_step_must_be_positive(self):
        with pytest.raises(ValueError):
            prox(NonsmoothTerm.l1(1.0), np.array([1.0]), 0.0)


class TestConstants:
    def test_single_diagonal_block(self):
        p = CompositeQuadraticProblem(
            partition=BlockPartition(1, 2),
            a_blocks=(np.diag([1.0, 2.0]),),
            b=np.zeros(2),
            h=(NonsmoothTerm.zero(),))
        c = compute_constants(p)
        assert c.L == pytest.approx(4.0)
        assert c.L_k[0] == pytest.approx(4.0)
        assert c.sigma_k[0] ** 2 == pytest.approx(1.0)
        assert c.rank_case == "full_column"

    def test_toeplitz_constants(self):
        p, _ = make_toeplitz_instance(10)
        c = compute_constants(p)
        # global constant is twice the squared top eigenvalue of the pattern
        assert c.L == pytest.approx(2.0 * (1.0 + 2.0 * math.cos(math.pi / 11.0)) ** 2,
                                    rel=1e-12)
        assert c.L <= 18.0
        # block constants are twice the squared column norms: 4 at the two
        # edge columns, 6 in the interior
        np.testing.assert_allclose(np.sort(c.L_k)[:2], [4.0, 4.0], rtol=1e-12)
        np.testing.assert_allclose(np.sort(c.L_k)[2:], np.full(8, 6.0), rtol=1e-12)

    def test_ordering_invariant(self):
        p, _ = make_lasso_instance(14, 6, 0.1, seed=21)
        c = compute_constants(p)
        assert c.L_min <= c.L_max <= c.L * (1 + 1e-12)

    def test_block_diagonal_domination(self):
        # K * blkdiag(A_k^T A_k) - A^T A is positive semidefinite
        for p in (make_toeplitz_instance(8)[0],
                  make_lasso_instance(10, 5, 0.1, seed=3)[0]):
            k_count = p.partition.block_count
            n = p.partition.block_size
            full = p.full_matrix()
            blkdiag = np.zeros((k_count * n, k_count * n))
            for k in range(k_count):
                blk = p.a_blocks[k].T @ p.a_blocks[k]
                blkdiag[k * n:(k + 1) * n, k * n:(k + 1) * n] = blk
            low, _ = sym_eig_extremes(k_count * blkdiag - full.T @ full)
            assert low >= -1e-9


class TestGenerators:
    def test_table1_diagonal_values(self):
        o = make_table1_diagonal(2, 1.0)
        assert o.value(np.array([1.0, 1.0])) == pytest.approx(1.0)
        np.testing.assert_allclose(o.gradient(np.array([1.0, 1.0])), [1.0, 1.0])
        np.testing.assert_array_equal(o.optimum, np.zeros(2))
        assert o.value(o.optimum) == 0.0

    def test_table1_diagonal_constants(self):
        o = make_table1_diagonal(3, 2.0)
        np.testing.assert_array_equal(o.lipschitz_coordinate, [2.0, 2.0, 2.0])
        assert o.lipschitz_global == 2.0

    def test_table1_full_value(self):
        # (4 / 8) * 16 = 8
        o = make_table1_full(4, 4.0)
        assert o.value(np.ones(4)) == pytest.approx(8.0)

    def test_table1_full_constants_exact(self):
        o = make_table1_full(4, 4.0)
        np.testing.assert_array_equal(o.lipschitz_coordinate, np.full(4, 1.0))
        assert o.lipschitz_global == 4.0
        # Hessian is (L/K) * ones with spectral norm exactly L
        _, high = sym_eig_extremes(o.hessian)
        assert high == pytest.approx(4.0, rel=1e-12)

    def test_table1_full_gradient_at_basis_vector(self):
        o = make_table1_full(4, 4.0)
        e1 = np.zeros(4)
        e1[0] = 1.0
        np.testing.assert_allclose(o.gradient(e1), np.full(4, 1.0))

    def test_table1_qp_twins_match_oracles(self):
        gen = SplitMix64(23)
        for make_o, make_qp in ((make_table1_diagonal, make_table1_diagonal_qp),
                                (make_table1_full, make_table1_full_qp)):
            o = make_o(5, 2.5)
            qp = make_qp(5, 2.5)
            for _ in range(10):
                x = gen.normal_vector(5)
                assert eval_objective(qp, x) == pytest.approx(o.value(x), rel=1e-12)

    def test_toeplitz_pattern_k3(self):
        np.testing.assert_array_equal(toeplitz_matrix(3),
                                      [[1, 1, 0], [1, 1, 1], [0, 1, 1]])

    def test_toeplitz_blocks_are_scaled_columns(self):
        p, _ = make_toeplitz_instance(4)
        t = toeplitz_matrix(4)
        for k in range(4):
            np.testing.assert_allclose(p.a_blocks[k][:, 0], math.sqrt(2.0) * t[:, k])

    def test_toeplitz_start_k5(self):
        np.testing.assert_allclose(toeplitz_start(5), [1.0, 0.125, 0.75, 1.0, 1.0])

    def test_toeplitz_optimum_is_zero(self):
        p, _ = make_toeplitz_instance(6)
        assert eval_objective(p, np.zeros(6)) == 0.0

    def test_toeplitz_requires_three_blocks(self):
        with pytest.raises(ValueError):
            make_toeplitz_instance(2)

    def test_lasso_shapes_and_rank(self):
        p, x0 = make_lasso_instance(30, 20, 0.1, seed=0)
        assert p.partition.block_count == 20
        assert p.rows == 30
        assert x0.shape == (20,)
        c = compute_constants(p)
        assert c.rank_case == "full_column"

    def test_lasso_deterministic_per_seed(self):
        p1, _ = make_lasso_instance(8, 4, 0.1, seed=5)
        p2, _ = make_lasso_instance(8, 4, 0.1, seed=5)
        p3, _ = make_lasso_instance(8, 4, 0.1, seed=6)
        np.testing.assert_array_equal(p1.full_matrix(), p2.full_matrix())
        assert not np.array_equal(p1.full_matrix(), p3.full_matrix())

    def test_oracle_from_quadratic(self):
        p, _ = make_toeplitz_instance(6)
        o = oracle_from_quadratic(p)
        gen = SplitMix64(31)
        for _ in range(5):
            x = gen.normal_vector(6)
            assert o.value(x) == pytest.approx(eval_objective(p, x), rel=1e-12)
            np.testing.assert_allclose(
                o.gradient(x),
                [block_gradient(p, k, x)[0] for k in range(6)], rtol=1e-12)

    def test_oracle_from_quadratic_rejects_nonsmooth(self):
        p, _ = make_lasso_instance(8, 4, 0.1, seed=1)
        with pytest.raises(ValueError):
            oracle_from_quadratic(p)


class TestLoader:
    def test_lasso_round_trip(self):
        loaded = load_problem({"kind": "lasso", "rows": 10, "block_count": 5,
                               "weight": 0.2, "seed": 3})
        direct, _ = make_lasso_instance(10, 5, 0.2, seed=3)
        np.testing.assert_array_equal(loaded.problem.full_matrix(),
                                      direct.full_matrix())

    def test_explicit_problem(self):
        spec = {
            "kind": "explicit", "block_count": 2, "block_size": 1,
            "a_blocks": [[[1.0], [0.0]], [[0.0], [1.0]]],
            "b": [1.0, 2.0],
            "h": [{"kind": "l1", "weight": 0.5}, {"kind": "box", "lo": -1, "hi": 1}],
        }
        loaded = load_problem(spec)
        assert loaded.problem.h[0].kind == "l1"
        assert loaded.problem.h[1].hi == 1.0

    def test_json_text_and_file(self, tmp_path):
        text = json.dumps({"kind": "toeplitz", "block_count": 5})
        loaded = load_problem(text)
        assert loaded.problem.partition.block_count == 5
        path = tmp_path / "problem.json"
        path.write_text(text)
        loaded2 = load_problem(str(path))
        np.testing.assert_array_equal(loaded.x0, loaded2.x0)

    def test_error_paths(self):
        with pytest.raises(ProblemFormatError, match=r"\$\.kind"):
            load_problem({"kind": "mystery"})
        with pytest.raises(ProblemFormatError, match=r"\$\.block_count"):
            load_problem({"kind": "toeplitz", "block_count": 1})
        with pytest.raises(ProblemFormatError, match=r"\$\.a_blocks\[1\]"):
            load_problem({"kind": "explicit", "block_count": 2, "block_size": 1,
                          "a_blocks": [[[1.0]], [[1.0, 2.0]]], "b": [0.0]})
        with pytest.raises(ProblemFormatError, match=r"\$\.h\[0\]"):
            load_problem({"kind": "explicit", "block_count": 1, "block_size": 1,
                          "a_blocks": [[[1.0]]], "b": [0.0],
                          "h": [{"kind": "l1", "weight": -1}]})
        with pytest.raises(ProblemFormatError, match=r"\$"):
            load_problem("not json at all {")

    def test_table1_loader_has_oracle_and_twin(self):
        loaded = load_problem({"kind": "table1_full", "block_count": 4,
                               "lipschitz": 4.0})
        assert loaded.oracle is not None
        assert loaded.problem is not None
        assert loaded.oracle.value(loaded.x0) == pytest.approx(
            eval_objective(loaded.problem, loaded.x0))
