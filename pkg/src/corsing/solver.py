"""Random test selection, diagonal preconditioning and OMP recovery."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from corsing.assembly import AdrProblem, compute_constant_C, load_vector, stiffness_rows
from corsing.coherence import SamplingMeasure, build_measure

__all__ = [
    "CompressedSystem",
    "SparseSolution",
    "corsing_solve",
    "default_measure",
    "draw_tests",
    "omp_solve",
    "precondition",
]

REORTH_TOL = 1e-8


@dataclass
class CompressedSystem:
    """Drawn test rows of the Petrov-Galerkin system.

    ``tests`` holds the positions of the drawn frequencies in the test set,
    ``freqs`` the frequencies themselves. With ``dedup`` the rows are unique
    and ``D`` absorbs the repetition counts.
    """

    tests: np.ndarray
    freqs: np.ndarray
    A: np.ndarray
    f: np.ndarray
    D: np.ndarray
    seed: Optional[int] = None
    dedup: bool = False

    @property
    def m(self) -> int:
        return len(self.tests)

    def preconditioned(self) -> tuple[np.ndarray, np.ndarray]:
        return self.D[:, None] * self.A, self.D * self.f


@dataclass
class SparseSolution:
    """Output of :func:`omp_solve`; ``support`` is listed in selection order."""

    support: np.ndarray
    coefficients: np.ndarray
    residual_norm: float
    residual_history: list = field(default_factory=list)
    n_cols: int = 0
    rank_deficient: bool = False

    def to_vector(self, N: Optional[int] = None) -> np.ndarray:
        N = self.n_cols if N is None else N
        x = np.zeros(N, dtype=complex)
        x[self.support] = self.coefficients
        return x


def draw_tests(measure: SamplingMeasure, m: int, seed) -> np.ndarray:
    """``m`` i.i.d. positions in the test set drawn from ``measure`` (repetitions kept)."""
    if m < 1:
        raise ValueError("m must be at least 1")
    rng = np.random.default_rng(seed)
    return rng.choice(measure.M, size=m, replace=True, p=measure.probabilities)


def precondition(measure: SamplingMeasure, tau, m: int, counts=None) -> np.ndarray:
    """``D_ii = 1/sqrt(m p_{tau_i})``; with ``counts`` the deduplicated form ``sqrt(c_i/(m p_{tau_i}))``."""
    p = measure.probabilities[np.asarray(tau)]
    if np.any(p <= 0):
        raise ValueError("drawn test has zero probability")
    if counts is None:
        return 1.0 / np.sqrt(m * p)
    return np.sqrt(np.asarray(counts) / (m * p))


def omp_solve(A, f, s: int, rtol: float = 1e-12) -> SparseSolution:
    """Orthogonal matching pursuit with column-normalized selection.

    At each step the column maximizing ``|A_j^* r| / |A_j|`` outside the current
    support is added (zero columns are never chosen, ties go to the smallest
    index). The support columns are orthogonalized incrementally by
    Gram-Schmidt, repeated once when the new direction keeps more than
    ``1e-8`` overlap with the previous ones.

    Parameters
    ----------
    A : ndarray, shape (m, N)
    f : ndarray, shape (m,)
    s : int
        Maximum support size, ``s <= min(m, N)``.
    rtol : float
        Stop once ``|r| <= rtol |f|``.
    """
    A = np.asarray(A)
    f = np.asarray(f)
    m, N = A.shape
    if not 1 <= s <= min(m, N):
        raise ValueError(f"need 1 <= s <= min(m, N) = {min(m, N)}, got s={s}")
    dtype = np.result_type(A, f, complex)
    norms = np.linalg.norm(A, axis=0)
    usable = norms > 0
    inv_norms = np.where(usable, 1.0 / np.where(usable, norms, 1.0), 0.0)
    fnorm = np.linalg.norm(f)

    Q = np.zeros((m, s), dtype=dtype)
    Rm = np.zeros((s, s), dtype=dtype)
    support: list[int] = []
    r = f.astype(dtype)
    history = [float(fnorm)]
    selected = np.zeros(N, dtype=bool)
    deficient = False

    while len(support) < s and history[-1] > rtol * fnorm:
        # |A_j^* r| = |r^* A_j|, avoiding a conjugated copy of A
        score = np.abs(r.conj() @ A) * inv_norms
        score[selected | ~usable] = -1.0
        j = int(np.argmax(score))
        if score[j] <= 0:
            break
        k = len(support)
        a = A[:, j].astype(dtype)
        h = Q[:, :k].conj().T @ a
        v = a - Q[:, :k] @ h
        vn = np.linalg.norm(v)
        if k and vn > 0 and np.max(np.abs(Q[:, :k].conj().T @ v)) > REORTH_TOL * vn:
            h2 = Q[:, :k].conj().T @ v
            v = v - Q[:, :k] @ h2
            h = h + h2
            vn = np.linalg.norm(v)
        support.append(j)
        selected[j] = True
        if vn <= 1e-13 * norms[j]:
            deficient = True
            break
        Q[:, k] = v / vn
        Rm[:k, k] = h
        Rm[k, k] = vn
        r = r - Q[:, k] * (Q[:, k].conj() @ r)
        history.append(float(np.linalg.norm(r)))

    S = np.array(support, dtype=np.int64)
    if deficient:
        warnings.warn("OMP support became rank deficient; using the minimum-norm least-squares solution", RuntimeWarning)
        z, *_ = np.linalg.lstsq(A[:, S], f, rcond=None)
        res = f - A[:, S] @ z
        history.append(float(np.linalg.norm(res)))
    else:
        k = len(S)
        z = _back_substitute(Rm[:k, :k], Q[:, :k].conj().T @ f)
    return SparseSolution(S, z, history[-1], history, N, deficient)


def _back_substitute(R: np.ndarray, b: np.ndarray) -> np.ndarray:
    z = np.zeros_like(b)
    for i in range(len(b) - 1, -1, -1):
        z[i] = (b[i] - R[i, i + 1 :] @ z[i + 1 :]) / R[i, i]
    return z


def default_measure(problem: AdrProblem, kind: str = "nonuniform") -> SamplingMeasure:
    """Sampling measure on the problem's test set.

    ``"nonuniform"`` picks the 1D bound with the problem constant for ``n = 1``
    and the practical bound otherwise.
    """
    if kind == "nonuniform":
        kind = "thm4.3" if problem.n == 1 else "practical"
    params = {"N": problem.N, "l0": problem.l0, "L": problem.L}
    if kind == "thm4.3":
        params["C"] = compute_constant_C(problem.eta, problem.beta, problem.rho)
    elif kind == "sharp-1D":
        params.update(
            eta_h1sq=problem.eta.h1_normsq(),
            beta_h1sq=sum(b.h1_normsq() for b in problem.beta),
            rho_h1sq=problem.rho.h1_normsq(),
        )
    return build_measure(kind, problem.tests, **params)


def corsing_solve(
    problem: AdrProblem,
    s: int,
    m: int,
    measure: Union[SamplingMeasure, str] = "nonuniform",
    seed=None,
    dedup: bool = False,
    clip_K: Optional[float] = None,
    load: str = "consistent",
    rtol: float = 1e-12,
) -> tuple[SparseSolution, np.ndarray, CompressedSystem]:
    """Draw ``m`` tests, assemble the compressed rows on demand and recover an ``s``-sparse solution.

    Returns
    -------
    solution : SparseSolution
    coeffs : ndarray
        Length-``N`` H1-normalized coefficient vector of the recovered solution.
    system : CompressedSystem
    """
    if isinstance(measure, str):
        measure = default_measure(problem, measure)
    if measure.M != problem.M:
        raise ValueError("measure is defined on a different test set")
    tau = draw_tests(measure, m, seed)
    counts = None
    if dedup:
        tau, counts = np.unique(tau, return_counts=True)
    D = precondition(measure, tau, m, counts)
    freqs = problem.tests[tau]
    A = stiffness_rows(problem, freqs)
    if load == "consistent":
        f = A @ problem.reference_coefficients
    else:
        f = load_vector(problem, freqs, route=load)
    system = CompressedSystem(tau, freqs, A, f, D, seed, dedup)
    At, ft = system.preconditioned()
    sol = omp_solve(At, ft, min(s, len(tau), problem.N), rtol=rtol)
    x = sol.to_vector(problem.N)
    if clip_K is not None:
        # the coefficient 2-norm stands in for the H1 norm of the expansion
        nx = np.linalg.norm(x)
        if nx > 0:
            x = x * min(1.0, clip_K / nx)
    return sol, x, system
