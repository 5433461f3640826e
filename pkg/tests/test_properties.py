import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from corsing.coherence import build_measure, nu_ani, nu_iso, nu_practical
from corsing.experiments import best_s_term
from corsing.fourier import phi_fourier, psi_fourier
from corsing.fourier import test_indices as make_tests
from corsing.solver import omp_solve
from corsing.tensor_basis import tensor_dwt, tensor_idwt
from corsing.wavelet1d import dwt_analysis, dwt_synthesis

levels = st.integers(2, 9)
freqs = st.integers(-2000, 2000)


@settings(max_examples=40, deadline=None)
@given(L=st.integers(3, 10), seed=st.integers(0, 2**32 - 1))
def test_dwt_round_trip(L, seed):
    x = np.random.default_rng(seed).standard_normal(2**L)
    assert np.allclose(dwt_synthesis(dwt_analysis(x, 2), 2), x, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(mode=st.sampled_from(["ani", "iso"]), n=st.integers(2, 3), seed=st.integers(0, 2**32 - 1))
def test_tensor_round_trip(mode, n, seed):
    L = 4 if n == 2 else 3
    X = np.random.default_rng(seed).standard_normal((2**L,) * n)
    assert np.allclose(tensor_idwt(tensor_dwt(X, 2, mode), 2, L, n, mode), X, atol=1e-12)


@given(level=levels, k=st.integers(0, 511), q=freqs)
def test_shift_is_a_phase(level, k, q):
    k = k % 2**level
    for f in (phi_fourier, psi_fourier):
        a = complex(f(level, k, q))
        b = complex(f(level, 0, q)) * np.exp(-2j * np.pi * q * k / 2**level)
        assert abs(a - b) <= 1e-12


@given(level=levels, q=freqs)
def test_conjugate_symmetry(level, q):
    for f in (phi_fourier, psi_fourier):
        assert abs(complex(f(level, 3 % 2**level, -q)) - np.conj(complex(f(level, 3 % 2**level, q)))) <= 1e-14


@given(level=levels, q=freqs)
def test_magnitudes_bounded_by_l1_norm(level, q):
    # |(f, xi_q)| <= |f|_L1: 2^{-l/2} for the hat, 2^{-1/2} sum|b| 2^{-(l+1)/2} for the wavelet
    assert abs(complex(phi_fourier(level, 0, q))) <= 2.0 ** (-level / 2) + 1e-15
    assert abs(complex(psi_fourier(level, 0, q))) <= 3.0 * 2.0 ** (-(level + 1) / 2) / np.sqrt(2) + 1e-15


vec = st.lists(st.integers(-300, 300), min_size=2, max_size=3)


@given(q=vec, data=st.data())
def test_bounds_symmetric(q, data):
    q = np.array(q)
    perm = np.array(data.draw(st.permutations(range(len(q)))))
    signs = np.array(data.draw(st.lists(st.sampled_from([-1, 1]), min_size=len(q), max_size=len(q))))
    r = signs * q[perm]
    assert np.isclose(nu_practical(q), nu_practical(r))
    assert np.isclose(nu_ani(q, 2, 6), nu_ani(r, 2, 6))
    assert np.isclose(nu_iso(q, 2, 6), nu_iso(r, 2, 6))
    assert 0 < nu_practical(q) <= 1


@given(kind=st.sampled_from(["uniform", "practical", "thm4.5", "thm4.7"]), R=st.integers(2, 40), n=st.integers(1, 3))
def test_measures_normalized(kind, R, n):
    if n == 3:
        R = min(R, 12)
    m = build_measure(kind, make_tests(R, n), l0=2, L=5)
    assert abs(m.probabilities.sum() - 1) <= 1e-12
    assert np.all(m.probabilities > 0)


@given(c=st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=2, max_size=40), data=st.data())
def test_best_s_term_is_optimal(c, data):
    c = np.array(c)
    if np.linalg.norm(c) == 0:
        return
    s = data.draw(st.integers(0, len(c)))
    S, tail = best_s_term(c, s)
    assert len(S) == s
    other = np.sort(np.abs(c))[: len(c) - s]
    assert np.isclose(tail, np.linalg.norm(other) / np.linalg.norm(c))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), s=st.integers(1, 8))
def test_omp_invariants(seed, s):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((20, 30)) + 1j * rng.standard_normal((20, 30))
    f = rng.standard_normal(20) + 1j * rng.standard_normal(20)
    sol = omp_solve(A, f, s)
    assert len(set(sol.support.tolist())) == len(sol.support) <= s
    assert np.all(np.diff(sol.residual_history) <= 1e-12)
    r = f - A[:, sol.support] @ sol.coefficients
    assert np.linalg.norm(A[:, sol.support].conj().T @ r) <= 1e-9 * np.linalg.norm(f) * np.linalg.norm(A)
