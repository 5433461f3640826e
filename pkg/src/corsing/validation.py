"""Independent oracles and the one-shot self-check suite.

The oracles deliberately avoid the closed-form Fourier products: trial
functions are rebuilt from the synthesis transform as nodal values and
integrated against Fourier modes by composite Gauss-Legendre quadrature.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from corsing.assembly import AdrProblem, CoeffField, assemble_B, compute_constant_C, condition_number
from corsing.coherence import MEASURE_KINDS, build_measure, empirical_coherence, nu_1d, nu_ani, nu_iso, nu_practical
from corsing.fourier import phi_fourier, psi_fourier, tensor_product_coeff, test_indices
from corsing.solver import omp_solve
from corsing.tensor_basis import TrialBasis, tensor_dwt, tensor_idwt
from corsing.wavelet1d import CDF22, FilterBank, dwt_analysis, dwt_synthesis

__all__ = [
    "CheckResult",
    "adr_entry_quadrature",
    "atom_nodal_values",
    "exhaustive_best_support",
    "piecewise_linear_fourier",
    "preconditioner_mc_error",
    "run_checks",
]

_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<32s} value={self.value:.4g} threshold={self.threshold:.4g}  {self.detail}"


def atom_nodal_values(kind: int, level: int, shift: int, filters: FilterBank = CDF22) -> tuple[int, np.ndarray]:
    """Nodal values of ``phi_{level,shift}`` (kind 0) or ``psi_{level,shift}`` (kind 1) on the
    grid ``2^{-J} Z``, ``J = level + 1``, obtained from the synthesis transform."""
    J = level + 1
    c = np.zeros(2**J)
    c[shift if kind == 0 else 2**level + shift] = 1.0
    fine = dwt_synthesis(c, l0=level, filters=filters)
    return J, 2.0 ** (J / 2) * fine


def _gauss_nodes(n_cells: int, q_max: float):
    # split each cell so that the phase advances by at most one radian per subcell
    sub = max(1, int(np.ceil(2 * np.pi * abs(q_max) / n_cells)))
    h = 1.0 / (n_cells * sub)
    left = np.arange(n_cells * sub) * h
    x = (left[:, None] + 0.5 * h * (_GL_X[None, :] + 1.0)).ravel()
    w = np.tile(0.5 * h * _GL_W, n_cells * sub)
    return x, w


def _pl_eval(values: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Periodic piecewise-linear function through ``values`` and its derivative at ``x``."""
    n = len(values)
    t = (x % 1.0) * n
    i = np.floor(t).astype(np.int64) % n
    fr = t - np.floor(t)
    v0, v1 = values[i], values[(i + 1) % n]
    return (1 - fr) * v0 + fr * v1, (v1 - v0) * n


def piecewise_linear_fourier(values, q) -> np.ndarray:
    """``int_0^1 f(x) exp(-2 pi i q x) dx`` for the periodic piecewise-linear ``f`` with nodal ``values``."""
    values = np.asarray(values)
    q = np.atleast_1d(np.asarray(q, dtype=float))
    x, w = _gauss_nodes(len(values), np.max(np.abs(q)))
    f, _ = _pl_eval(values, x)
    return (np.exp(-2j * np.pi * np.outer(q, x)) * (w * f)[None, :]).sum(axis=1)


def adr_entry_quadrature(problem: AdrProblem, j: int, q: int) -> complex:
    """``a(psi^_j, xi^_q)`` in 1D by quadrature of the weak form with the coefficient fields."""
    if problem.n != 1:
        raise ValueError("quadrature oracle is one-dimensional")
    basis = problem.basis
    kind, level, shift = basis.atoms[basis.atom_ids[j, 0]]
    J, vals = atom_nodal_values(int(kind), int(level), int(shift), basis.filters)
    x, w = _gauss_nodes(2**J, abs(q) + max(abs(r[0]) for f in (problem.eta, problem.rho, *problem.beta) for r, _ in f.terms))
    u, du = _pl_eval(vals, x)
    e = np.exp(-2j * np.pi * q * x)
    integrand = (
        problem.eta(x) * du * (-2j * np.pi * q) * e + problem.beta[0](x) * du * e + problem.rho(x) * u * e
    )
    val = np.sum(w * integrand)
    return complex(val * basis.weights[j] / np.sqrt(1 + (2 * np.pi * q) ** 2))


def exhaustive_best_support(A: np.ndarray, f: np.ndarray, s: int) -> tuple[tuple[int, ...], float]:
    """Support of size ``s`` minimizing the least-squares residual, by enumeration."""
    best, best_res = None, np.inf
    for S in itertools.combinations(range(A.shape[1]), s):
        z, *_ = np.linalg.lstsq(A[:, S], f, rcond=None)
        res = np.linalg.norm(A[:, S] @ z - f)
        if res < best_res:
            best, best_res = S, res
    return best, float(best_res)


def _check(name: str, fn: Callable[[], tuple[bool, float, float, str]]) -> CheckResult:
    t0 = time.perf_counter()
    try:
        ok, val, thr, detail = fn()
    except Exception as exc:  # a crashing check is a failing check
        ok, val, thr, detail = False, float("nan"), float("nan"), f"{type(exc).__name__}: {exc}"
    return CheckResult(name, bool(ok), float(val), float(thr), detail, time.perf_counter() - t0)


def _biorthogonality(filters):
    defects = filters.biorthogonality_defects()
    return not defects, float(len(defects)), 0.0, "; ".join(defects[:3])


def _round_trip(filters):
    rng = np.random.default_rng(1)
    worst = 0.0
    x = rng.standard_normal(2**9)
    worst = max(worst, np.linalg.norm(dwt_synthesis(dwt_analysis(x, 2, filters=filters), 2, filters=filters) - x) / np.linalg.norm(x))
    for n, mode in ((2, "ani"), (2, "iso"), (3, "ani"), (3, "iso")):
        X = rng.standard_normal((2**4,) * n)
        Y = tensor_idwt(tensor_dwt(X, 2, mode, filters), 2, 4, n, mode, filters)
        worst = max(worst, np.linalg.norm(Y - X) / np.linalg.norm(X))
    return worst <= 1e-12, worst, 1e-12, "1D L=9, 2D/3D L=4 both modes"


def _vanishing_moments(filters):
    c = dwt_analysis(np.full(2**8, 0.3), 2, filters=filters)
    worst = np.max(np.abs(c[4:]))
    return worst <= 1e-12, worst, 1e-12, "wavelet bands of a constant"


def _closed_form(filters, cases=200):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(cases):
        kind = int(rng.integers(2))
        level = int(rng.integers(2, 9))
        shift = int(rng.integers(2**level))
        q = int(rng.integers(-256, 257))
        _, vals = atom_nodal_values(kind, level, shift, filters)
        oracle = piecewise_linear_fourier(vals, q)[0]
        closed = phi_fourier(level, shift, q) if kind == 0 else psi_fourier(level, shift, q, filters)
        worst = max(worst, abs(complex(closed) - oracle))
    return worst <= 1e-9, worst, 1e-9, f"{cases} random (kind, level, shift, q)"


def _integration_by_parts():
    worst = 0.0
    for level in range(2, 9):
        q = np.arange(-300, 301)
        q = q[q != 0]
        for k in (0, 1, 2**level - 1):
            lhs = (2 * np.pi * q) ** 2 * phi_fourier(level, k, q)
            rhs = 4 * 2.0 ** (1.5 * level) * np.exp(-2j * np.pi * q * k / 2**level) * np.sin(np.pi * q / 2**level) ** 2
            worst = max(worst, np.max(np.abs(lhs - rhs) / np.maximum(1.0, np.abs(rhs))))
    return worst <= 1e-12, worst, 1e-12, "(2 pi q)^2 (phi, xi_q) vs derivative form"


def _inner_product_bounds(filters):
    b = filters.taps("b")[1]
    bfac = np.linalg.norm(b) * np.sqrt(np.count_nonzero(b))
    q = np.arange(-256, 257)
    q = q[q != 0].astype(float)
    worst = 0.0
    for level in range(2, 9):
        for k in sorted({0, 1, 2**level // 2, 2**level - 1}):
            for kind in (0, 1):
                f = phi_fourier if kind == 0 else psi_fourier
                val = np.abs(f(level, k, q.astype(int)))
                for a1, a2 in itertools.product((0, 1), repeat=2):
                    lhs = val * (2 * np.pi * np.abs(q)) ** (a1 + a2)
                    for g in (0.0, 0.5, 1.0, 2.0):
                        pref = 2.0 ** (a1 + a2) if kind == 0 else 2.0 ** (a1 + a2 + 1 - g) * bfac
                        rhs = pref * 2.0 ** ((1.5 - g) * level) * (np.pi * np.abs(q)) ** (g - 2 + a1 + a2)
                        worst = max(worst, np.max(lhs / rhs))
    return worst <= 1 + 1e-12, worst, 1.0, "max ratio |product| / bound"


def _zero_patterns():
    bad = 0
    total = 0
    for n in (2, 3):
        Q = test_indices(4, n)
        for mode in ("ani", "iso"):
            basis = TrialBasis(mode, 2, 3, n)
            for idx in basis.indices[:: max(1, len(basis.indices) // 40)]:
                for q in Q:
                    zq = q == 0
                    if mode == "ani":
                        scal = np.array([lev == 1 for lev in idx.levels])
                        predicted = np.any(zq & ~scal)
                    else:
                        e = np.array(idx.types, dtype=bool)
                        predicted = np.any(zq & e)
                    if predicted:
                        total += 1
                        bad += tensor_product_coeff(idx, q, 2) != 0
    return bad == 0, float(bad), 0.0, f"{total} predicted zeros checked"


def _condition_number():
    kappa = condition_number(assemble_B(AdrProblem(1, 2, 9, 512)))
    return abs(kappa / 20.4 - 1) <= 0.05, kappa, 20.4, "1D, l0=2, L=9, R=512, unit coefficients"


def _coherence_dominance():
    worst_K = 0.0
    details = []
    cases = [
        (AdrProblem(1, 2, 9, 512), "thm4.3"),
        (AdrProblem(1, 2, 9, 512, eta=CoeffField.sine(1, 0.5, 3)), "thm4.3"),
        (AdrProblem(2, 2, 5, 32, mode="ani", beta=(1.0, 1.0)), "thm4.5"),
        (AdrProblem(2, 2, 5, 32, mode="iso", beta=(1.0, 1.0)), "thm4.7"),
    ]
    for prob, kind in cases:
        mu = empirical_coherence(assemble_B(prob))
        Q = prob.tests
        if kind == "thm4.3":
            nu = nu_1d(Q[:, 0], prob.N, compute_constant_C(prob.eta, prob.beta, prob.rho))
        elif kind == "thm4.5":
            nu = nu_ani(Q, prob.l0, prob.L)
        else:
            nu = nu_iso(Q, prob.l0, prob.L)
        K = float(np.max(mu / nu))
        worst_K = max(worst_K, K)
        details.append(f"{prob.mode}/{kind}: K={K:.3g}")
    return worst_K <= 1e3, worst_K, 1e3, ", ".join(details)


def _measures_normalized():
    worst = 0.0
    for R in (8, 64, 512):
        Q = test_indices(R, 1)
        for kind, params in (
            ("uniform", {}),
            ("thm4.3", {"N": 512, "C": 2.0}),
            ("sharp-1D", {"N": 512, "eta_h1sq": 2.0, "beta_h1sq": 0.0, "rho_h1sq": 1.0}),
            ("practical", {}),
        ):
            p = build_measure(kind, Q, **params).probabilities
            worst = max(worst, abs(p.sum() - 1))
    for n, R in ((2, 64), (3, 16)):
        Q = test_indices(R, n)
        for kind in ("uniform", "thm4.5", "thm4.7", "practical"):
            p = build_measure(kind, Q, l0=2, L=6 if n == 2 else 4).probabilities
            worst = max(worst, abs(p.sum() - 1))
    return worst <= 1e-12, worst, 1e-12, f"kinds {', '.join(MEASURE_KINDS)}"


def _omp_exhaustive(instances=20):
    rng = np.random.default_rng(11)
    mismatches = 0
    for _ in range(instances):
        A = rng.standard_normal((10, 20)) + 1j * rng.standard_normal((10, 20))
        x = np.zeros(20, complex)
        S = rng.choice(20, 2, replace=False)
        x[S] = np.array([10.0, 1.0]) * np.exp(2j * np.pi * rng.random(2))
        f = A @ x
        sol = omp_solve(A, f, 2)
        best, _ = exhaustive_best_support(A, f, 2)
        mismatches += tuple(sorted(sol.support.tolist())) != best
    return mismatches == 0, float(mismatches), 0.0, f"{instances} planted 2-sparse instances"


def preconditioner_mc_error(problem: AdrProblem, measure, samples: int, seed) -> float:
    """Relative Frobenius error of the Monte-Carlo mean of ``(DA)^*(DA)`` over ``samples``
    single-row draws, against ``B^* B``."""
    B = assemble_B(problem)
    rng = np.random.default_rng(seed)
    tau = rng.choice(problem.M, samples, p=measure.probabilities)
    counts = np.bincount(tau, minlength=problem.M)
    wts = counts / (samples * measure.probabilities)
    G = (B.conj().T * wts[None, :]) @ B
    ref = B.conj().T @ B
    return float(np.linalg.norm(G - ref) / np.linalg.norm(ref))


def _preconditioner_expectation():
    # sample counts keep the exact RMS error of the estimator near 4% and 2.4%
    prob = AdrProblem(1, 2, 5, 32)
    uni = build_measure("uniform", prob.tests)
    nonuni = build_measure("thm4.3", prob.tests, N=prob.N, C=compute_constant_C(prob.eta, prob.beta, prob.rho))
    e1 = preconditioner_mc_error(prob, uni, 20000, 3)
    e2 = preconditioner_mc_error(prob, nonuni, 100000, 3)
    worst = max(e1, e2)
    return worst <= 0.05, worst, 0.05, f"uniform 2e4 samples: {e1:.3g}, nonuniform 1e5 samples: {e2:.3g}"


def run_checks(filters: Optional[FilterBank] = None, quick: bool = False) -> list[CheckResult]:
    """Run every self-check; ``quick`` skips the matrix-heavy ones."""
    filters = CDF22 if filters is None else filters
    checks = [
        ("filter_biorthogonality", lambda: _biorthogonality(filters)),
        ("dwt_round_trip", lambda: _round_trip(filters)),
        ("vanishing_moments", lambda: _vanishing_moments(filters)),
        ("closed_form_vs_quadrature", lambda: _closed_form(filters)),
        ("integration_by_parts", _integration_by_parts),
        ("inner_product_bounds", lambda: _inner_product_bounds(filters)),
        ("tensor_zero_patterns", _zero_patterns),
        ("sampling_measures_normalized", _measures_normalized),
        ("omp_vs_exhaustive_support", _omp_exhaustive),
        ("preconditioner_expectation", _preconditioner_expectation),
    ]
    if not quick:
        checks += [
            ("condition_number_1d_L9", _condition_number),
            ("coherence_dominance", _coherence_dominance),
        ]
    return [_check(name, fn) for name, fn in checks]
