import itertools
import warnings

import numpy as np
import pytest

from corsing.assembly import AdrProblem, stiffness_rows
from corsing.coherence import build_measure
from corsing.experiments import SOLUTIONS
from corsing.fourier import test_indices as make_tests
from corsing.solver import (
    SparseSolution,
    corsing_solve,
    default_measure,
    draw_tests,
    omp_solve,
    precondition,
)


def _random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_draws_are_deterministic():
    m = build_measure("thm4.3", make_tests(64, 1), N=64)
    a = draw_tests(m, 50, 7)
    assert np.array_equal(a, draw_tests(m, 50, 7))
    assert not np.array_equal(a, draw_tests(m, 50, 8))
    with pytest.raises(ValueError):
        draw_tests(m, 0, 1)


def test_point_mass():
    p = np.full(8, 1e-300)
    p[3] = 1.0 - 7e-300
    from corsing.coherence import SamplingMeasure

    m = SamplingMeasure(p / p.sum(), "x", make_tests(8, 1))
    assert np.all(draw_tests(m, 100, 0) == 3)


def test_uniform_frequencies_within_three_sigma():
    M, m = 16, 32000
    meas = build_measure("uniform", make_tests(M, 1))
    counts = np.bincount(draw_tests(meas, m, 3), minlength=M)
    sigma = np.sqrt(m * (1 / M) * (1 - 1 / M))
    assert np.all(np.abs(counts - m / M) <= 3 * sigma)


def test_preconditioner_examples():
    meas = build_measure("uniform", make_tests(16, 1))
    D = precondition(meas, [0, 5, 5], 4)
    assert np.allclose(D, 2.0)
    meas = build_measure("thm4.3", make_tests(8, 1), N=8)
    p = meas.probabilities
    assert np.allclose(precondition(meas, [2], 3), 1 / np.sqrt(3 * p[2]))
    assert np.allclose(precondition(meas, [2], 3, counts=[2]), np.sqrt(2 / (3 * p[2])))


def test_preconditioned_gram_is_unbiased():
    # E[(DA)^* DA] = B^* B holds exactly when averaging over the measure;
    # here the expectation is computed in closed form from p
    p = AdrProblem(1, 2, 5, 32, solution=SOLUTIONS["u1"])
    meas = default_measure(p)
    B = stiffness_rows(p, p.tests)
    m = 1
    weights = 1.0 / (m * meas.probabilities)
    expected = (B.conj().T * (meas.probabilities * m * weights)) @ B
    assert np.allclose(expected, B.conj().T @ B, atol=1e-12)


def test_monte_carlo_gram_within_five_percent():
    from corsing.validation import preconditioner_mc_error

    p = AdrProblem(1, 2, 5, 32)
    err = preconditioner_mc_error(p, default_measure(p, "uniform"), 20000, 0)
    assert err <= 0.05


def test_omp_orthonormal_exact(rng):
    Q, _ = np.linalg.qr(_random_complex(rng, 40, 40))
    x = np.zeros(40, dtype=complex)
    x[[3, 17, 30]] = [2.0, -1j, 0.5]
    sol = omp_solve(Q, Q @ x, 3)
    assert set(sol.support.tolist()) == {3, 17, 30}
    assert np.allclose(sol.to_vector(), x, atol=1e-12)
    assert sol.residual_norm <= 1e-12


def test_omp_matches_exhaustive_oracle():
    rng = np.random.default_rng(11)
    for _ in range(20):
        A = _random_complex(rng, 10, 20)
        x = np.zeros(20, dtype=complex)
        S = rng.choice(20, 2, replace=False)
        x[S] = [3.0, 1.0]
        f = A @ x
        sol = omp_solve(A, f, 2)
        best, best_res = None, np.inf
        for T in itertools.combinations(range(20), 2):
            z = np.linalg.lstsq(A[:, T], f, rcond=None)[0]
            res = np.linalg.norm(A[:, T] @ z - f)
            if res < best_res:
                best, best_res = T, res
        assert set(sol.support.tolist()) == set(best)


def test_omp_residual_nonincreasing_and_normal_equations(rng):
    A = _random_complex(rng, 60, 120)
    f = _random_complex(rng, 60)
    sol = omp_solve(A, f, 25)
    assert np.all(np.diff(sol.residual_history) <= 1e-12)
    AS = A[:, sol.support]
    r = f - AS @ sol.coefficients
    assert np.linalg.norm(AS.conj().T @ r) <= 1e-10 * np.linalg.norm(AS.conj().T @ f)
    assert sol.residual_norm == pytest.approx(np.linalg.norm(r), rel=1e-10)


def test_omp_selection_is_scale_invariant(rng):
    A = _random_complex(rng, 30, 50)
    f = A[:, [4, 9]] @ np.array([1.0, 2.0])
    scales = rng.uniform(0.01, 100, 50)
    assert set(omp_solve(A * scales, f, 2).support.tolist()) == {4, 9}


def test_omp_early_stop_and_errors(rng):
    A = _random_complex(rng, 20, 30)
    f = A[:, 5] * 2
    sol = omp_solve(A, f, 10)
    assert sol.support.tolist() == [5] and len(sol.residual_history) == 2
    with pytest.raises(ValueError):
        omp_solve(A, f, 21)
    assert omp_solve(A, np.zeros(20), 3).support.size == 0


def test_omp_rank_deficient_warns():
    A = np.array([[1.0, 2.0, 0.0], [1.0, 2.0, 0.0]])
    f = np.array([1.0, 0.5])
    with pytest.warns(RuntimeWarning):
        sol = omp_solve(A, f, 2)
    assert sol.rank_deficient


def test_zero_columns_are_skipped(rng):
    A = _random_complex(rng, 10, 6)
    A[:, 2] = 0
    sol = omp_solve(A, _random_complex(rng, 10), 5)
    assert 2 not in sol.support.tolist()


def test_sparse_solution_embedding():
    s = SparseSolution(np.array([4, 1]), np.array([1 + 1j, 2]), 0.0, n_cols=6)
    assert np.array_equal(s.to_vector(), [0, 2, 0, 0, 1 + 1j, 0])


def _sparse_problem(s, seed=0):
    # manufactured solution whose interpolant is an exact s-term expansion
    base = AdrProblem(1, 2, 7, 128)
    rng = np.random.default_rng(seed)
    x = np.zeros(base.N)
    x[rng.choice(base.N, s, replace=False)] = rng.standard_normal(s)
    vals = base.basis.synthesis(x * base.basis.weights) * 2 ** (base.L / 2)
    nodes = np.arange(base.N + 1) / base.N

    def u(t):
        return np.interp(np.mod(t, 1.0), nodes, np.append(vals, vals[0]))

    return AdrProblem(1, 2, 7, 128, solution=u), x


def test_full_sampling_recovers_sparse_solution():
    p, x = _sparse_problem(8)
    assert np.allclose(p.reference_coefficients, x, atol=1e-12)
    # with replacement some rows repeat, so draw enough and deduplicate
    sol, xr, sys_ = corsing_solve(p, 8, 20 * p.M, "uniform", seed=1, dedup=True)
    assert sys_.m == p.M
    assert np.linalg.norm(xr - x) <= 1e-8 * np.linalg.norm(x)


def test_compressed_rows_are_rows_of_B():
    p = AdrProblem(1, 2, 6, 64, solution=SOLUTIONS["u1"])
    _, _, sys_ = corsing_solve(p, 10, 40, seed=4)
    B = stiffness_rows(p, p.tests)
    assert np.allclose(sys_.A, B[sys_.tests], atol=0)
    assert np.allclose(sys_.f, B[sys_.tests] @ p.reference_coefficients)
    assert np.array_equal(sys_.freqs, p.tests[sys_.tests])


def test_dedup_gives_same_least_squares():
    p = AdrProblem(1, 2, 6, 64, solution=SOLUTIONS["u1"])
    _, _, full = corsing_solve(p, 10, 200, seed=2)
    _, _, dd = corsing_solve(p, 10, 200, seed=2, dedup=True)
    assert dd.m < full.m
    S = np.arange(12)
    A1, f1 = full.preconditioned()
    A2, f2 = dd.preconditioned()
    z1 = np.linalg.lstsq(A1[:, S], f1, rcond=None)[0]
    z2 = np.linalg.lstsq(A2[:, S], f2, rcond=None)[0]
    assert np.allclose(z1, z2, atol=1e-10)
    assert np.allclose(A1[:, S].conj().T @ A1[:, S], A2[:, S].conj().T @ A2[:, S], atol=1e-12)


def test_clip_and_measure_errors():
    p = AdrProblem(1, 2, 6, 64, solution=SOLUTIONS["u1"])
    _, x, _ = corsing_solve(p, 10, 100, seed=0, clip_K=1e-3)
    assert np.linalg.norm(x) <= 1e-3 * (1 + 1e-12)
    with pytest.raises(ValueError):
        corsing_solve(p, 10, 100, build_measure("uniform", make_tests(32, 1)))


def test_default_measure_kinds():
    p1 = AdrProblem(1, 2, 5, 32)
    assert default_measure(p1).kind == "thm4.3"
    assert default_measure(p1, "sharp-1D").kind == "sharp-1D"
    p2 = AdrProblem(2, 2, 3, 8, mode="ani")
    assert default_measure(p2).kind == "practical"
    assert default_measure(p2, "thm4.5").kind == "thm4.5"


def test_solve_is_reproducible():
    p = AdrProblem(1, 2, 6, 64, solution=SOLUTIONS["u1"])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        a = corsing_solve(p, 10, 100, seed=9)[1]
    b = corsing_solve(p, 10, 100, seed=9)[1]
    assert np.array_equal(a, b)
