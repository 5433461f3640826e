"""Petrov-Galerkin stiffness matrix and load vector for periodic ADR problems.

The sesquilinear form is

    a(u, v) = int eta grad u . conj(grad v) + (beta . grad u) conj(v) + rho u conj(v),

with trial functions from a :class:`~corsing.tensor_basis.TrialBasis` and
Fourier test functions, both scaled to unit H1 norm.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from corsing.fourier import atom_fourier, tensor_product_coeff, test_h1_normsq, test_indices
from corsing.tensor_basis import TrialBasis, h1_weight

__all__ = [
    "AdrProblem",
    "CoeffField",
    "assemble_B",
    "compute_constant_C",
    "condition_number",
    "dump_matrix",
    "load_matrix",
    "load_vector",
    "stiffness_entry",
    "stiffness_rows",
]

DEFAULT_MAX_ENTRIES = 64 * 2**20


@dataclass(frozen=True)
class CoeffField:
    """A coefficient given by a finite Fourier series ``sum_r c_r exp(2 pi i r.x)``."""

    terms: tuple[tuple[tuple[int, ...], complex], ...]

    def __post_init__(self):
        if not self.terms:
            raise ValueError("a coefficient field needs at least one term")
        dims = {len(r) for r, _ in self.terms}
        if len(dims) != 1:
            raise ValueError("frequencies of different dimension")
        freqs = [r for r, _ in self.terms]
        if len(set(freqs)) != len(freqs):
            raise ValueError("repeated frequency in coefficient field")

    @classmethod
    def constant(cls, value: complex, n: int = 1) -> "CoeffField":
        return cls(((((0,) * n), complex(value)),))

    @classmethod
    def from_terms(cls, terms) -> "CoeffField":
        out = []
        for r, c in terms:
            r = (int(r),) if np.ndim(r) == 0 else tuple(int(x) for x in r)
            out.append((r, complex(c)))
        return cls(tuple(out))

    @classmethod
    def sine(cls, mean: float, amplitude: float, freq: int) -> "CoeffField":
        """``mean + amplitude * sin(2 pi freq x)`` in 1D."""
        a = amplitude / 2j
        return cls((((0,), complex(mean)), ((freq,), a), ((-freq,), -a)))

    @property
    def n(self) -> int:
        return len(self.terms[0][0])

    @property
    def is_constant(self) -> bool:
        return all(not any(r) or c == 0 for r, c in self.terms)

    @property
    def mean(self) -> complex:
        return sum((c for r, c in self.terms if not any(r)), 0j)

    def is_real(self, tol: float = 1e-14) -> bool:
        d = dict(self.terms)
        return all(abs(d.get(tuple(-x for x in r), 0) - np.conj(c)) <= tol for r, c in self.terms)

    def __call__(self, *x):
        val = 0.0
        for r, c in self.terms:
            val = val + c * np.exp(2j * np.pi * sum(ri * xi for ri, xi in zip(r, x)))
        return val

    def l2_normsq(self) -> float:
        return float(sum(abs(c) ** 2 for _, c in self.terms))

    def h1_seminormsq(self) -> float:
        return float(sum((2 * np.pi) ** 2 * sum(ri**2 for ri in r) * abs(c) ** 2 for r, c in self.terms))

    def h1_normsq(self) -> float:
        return self.l2_normsq() + self.h1_seminormsq()


def _as_field(value, n: int) -> CoeffField:
    if isinstance(value, CoeffField):
        return value
    return CoeffField.constant(value, n)


@dataclass(frozen=True)
class AdrProblem:
    """Discretization settings, coefficients and (optionally) a manufactured solution.

    ``beta`` holds one field per axis. ``solution`` is a callable of ``n``
    coordinate arrays; its level-``L`` interpolant defines the reference
    coefficient vector and the consistent load data.
    """

    n: int
    l0: int
    L: int
    R: int
    mode: str = "1d"
    eta: CoeffField = None
    beta: tuple = None
    rho: CoeffField = None
    solution: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        n = self.n
        object.__setattr__(self, "eta", _as_field(1.0 if self.eta is None else self.eta, n))
        object.__setattr__(self, "rho", _as_field(1.0 if self.rho is None else self.rho, n))
        beta = (0.0,) * n if self.beta is None else self.beta
        if isinstance(beta, (int, float, complex, CoeffField)):
            beta = (beta,)
        if len(beta) != n:
            raise ValueError(f"beta needs {n} components")
        object.__setattr__(self, "beta", tuple(_as_field(b, n) for b in beta))
        for f in (self.eta, self.rho, *self.beta):
            if f.n != n:
                raise ValueError("coefficient field dimension does not match n")
        if n > 1 and not self.constant_coefficients:
            raise ValueError("nonconstant coefficients are only supported for n = 1")
        if self.R < 1:
            raise ValueError("R must be positive")
        if self.constant_coefficients:
            if not self.eta.mean.real > 0 or not self.rho.mean.real > 0:
                raise ValueError("constant coefficients need eta > 0 and rho > 0")
        _ = self.basis  # validates (mode, l0, L, n)

    @cached_property
    def basis(self) -> TrialBasis:
        return TrialBasis(self.mode, self.l0, self.L, self.n)

    @cached_property
    def tests(self) -> np.ndarray:
        return test_indices(self.R, self.n)

    @property
    def N(self) -> int:
        return self.basis.size

    @property
    def M(self) -> int:
        return self.R**self.n

    @property
    def constant_coefficients(self) -> bool:
        return all(f.is_constant for f in (self.eta, self.rho, *self.beta))

    @cached_property
    def reference_coefficients(self) -> np.ndarray:
        """H1-normalized coefficients of the manufactured solution's interpolant."""
        if self.solution is None:
            raise ValueError("problem has no manufactured solution")
        return self.basis.coefficients(self.solution)

    def symbol(self, q) -> np.ndarray:
        """``eta (2 pi |q|)^2 + 2 pi i beta.q + rho`` for constant coefficients."""
        if not self.constant_coefficients:
            raise ValueError("symbol is only defined for constant coefficients")
        q = np.asarray(q, dtype=float).reshape(-1, self.n)
        eta, rho = self.eta.mean, self.rho.mean
        beta = np.array([b.mean for b in self.beta])
        return eta * (2 * np.pi) ** 2 * np.sum(q**2, axis=1) + 2j * np.pi * (q @ beta) + rho

    def describe(self) -> dict:
        def terms(f):
            return [[list(r), [c.real, c.imag]] for r, c in f.terms]

        return {
            "n": self.n,
            "l0": self.l0,
            "L": self.L,
            "R": self.R,
            "mode": self.mode,
            "eta": terms(self.eta),
            "beta": [terms(b) for b in self.beta],
            "rho": terms(self.rho),
        }


def _product_rows(problem: AdrProblem, q: np.ndarray) -> np.ndarray:
    """``(psi_j, xi_q)`` for L2-normalized trial functions, rows ``q``."""
    basis = problem.basis
    atoms, ids = basis.atoms, basis.atom_ids
    out = None
    for d in range(problem.n):
        table = atom_fourier(atoms, q[:, d])
        factor = table[:, ids[:, d]]
        out = factor if out is None else out * factor
    return out


def stiffness_rows(problem: AdrProblem, q, normalized: bool = True) -> np.ndarray:
    """Rows ``a(psi^_j, xi^_q)`` for the test frequencies ``q`` (shape ``(m, n)``).

    With ``normalized=False`` the L2-normalized trial functions and the
    unscaled Fourier modes are used instead.
    """
    q = np.asarray(q, dtype=np.int64).reshape(-1, problem.n)
    if problem.constant_coefficients:
        rows = problem.symbol(q)[:, None] * _product_rows(problem, q)
    else:
        # 1D convolution over the Fourier terms of the coefficients
        qv = q[:, 0].astype(float)
        coefs: dict[int, np.ndarray] = {}
        for (r,), c in problem.eta.terms:
            coefs[r] = coefs.get(r, 0) + (2 * np.pi) ** 2 * qv * (qv - r) * c
        for (r,), c in problem.beta[0].terms:
            coefs[r] = coefs.get(r, 0) + 2j * np.pi * (qv - r) * c
        for (r,), c in problem.rho.terms:
            coefs[r] = coefs.get(r, 0) + c
        rows = sum(np.asarray(coef)[..., None] * _product_rows(problem, q - r) for r, coef in coefs.items())
    if normalized:
        rows = rows * problem.basis.weights[None, :]
        rows = rows / np.sqrt(test_h1_normsq(q))[:, None]
    return rows


def stiffness_entry(problem: AdrProblem, j: int, q) -> complex:
    """Single entry ``B_{q,j}``; ``j`` is the canonical position of the trial function.

    Evaluated from the per-index factor products, independently of the
    vectorized row assembly.
    """
    index = problem.basis.indices[j]
    q = np.atleast_1d(np.asarray(q, dtype=np.int64))
    w = h1_weight(index, problem.l0) / np.sqrt(float(test_h1_normsq(q)))
    if problem.constant_coefficients:
        return complex(problem.symbol(q)[0] * tensor_product_coeff(index, q, problem.l0) * w)
    total = 0j
    qs = float(q[0])
    for f, kind in ((problem.eta, 0), (problem.beta[0], 1), (problem.rho, 2)):
        for (r,), c in f.terms:
            base = tensor_product_coeff(index, q - r, problem.l0)
            if kind == 0:
                total += (2 * np.pi) ** 2 * qs * (qs - r) * c * base
            elif kind == 1:
                total += 2j * np.pi * (qs - r) * c * base
            else:
                total += c * base
    return complex(total * w)


def assemble_B(problem: AdrProblem, normalized: bool = True, max_entries: int = DEFAULT_MAX_ENTRIES) -> np.ndarray:
    """Full ``M x N`` stiffness matrix, rows in test order and columns in trial order."""
    if problem.M * problem.N > max_entries:
        raise MemoryError(
            f"B would have {problem.M * problem.N} entries (cap {max_entries}); "
            "raise max_entries or assemble rows on demand"
        )
    return stiffness_rows(problem, problem.tests, normalized=normalized)


def load_vector(problem: AdrProblem, q=None, route: str = "consistent") -> np.ndarray:
    """Load data ``g_q = (f, xi^_q)`` for the manufactured solution.

    ``route="consistent"`` returns ``B_q . u_ref`` with ``u_ref`` the coefficients of
    the level-``L`` interpolant; ``route="symbol"`` uses the discrete Fourier
    transform of the nodal samples times the operator symbol (constant
    coefficients only).
    """
    if problem.solution is None:
        raise ValueError("problem has no manufactured solution")
    q = problem.tests if q is None else np.asarray(q, dtype=np.int64).reshape(-1, problem.n)
    if route == "consistent":
        ref = problem.reference_coefficients
        chunk = max(1, (4 * 2**20) // problem.N)
        return np.concatenate([stiffness_rows(problem, q[i : i + chunk]) @ ref for i in range(0, len(q), chunk)])
    if route == "symbol":
        vals = problem.basis.nodal_values(problem.solution)
        N1 = vals.shape[0]
        uhat = np.fft.fftn(vals) / vals.size
        coeff = uhat[tuple(np.mod(q, N1).T)]
        return problem.symbol(q) * coeff / np.sqrt(test_h1_normsq(q))
    raise ValueError(f"unknown route {route!r}")


def compute_constant_C(eta, beta, rho, n: Optional[int] = None) -> float:
    """``|eta|_{H1}^2 + sum_i |beta_i|_{H1}^2 + |rho|_{L2}^2`` from the Fourier terms.

    For constants this reduces to ``|eta|^2 + |beta|_2^2 + |rho|^2``.
    """
    if n is None:
        n = next((f.n for f in (eta, rho) if isinstance(f, CoeffField)), None)
        if n is None:
            n = len(beta) if isinstance(beta, Sequence) else 1
    if not isinstance(beta, Sequence) or isinstance(beta, str):
        beta = (beta,)
    eta, rho = _as_field(eta, n), _as_field(rho, n)
    beta = [_as_field(b, n) for b in beta]
    return eta.h1_normsq() + sum(b.h1_normsq() for b in beta) + rho.l2_normsq()


def condition_number(B: np.ndarray) -> float:
    s = np.linalg.svd(B, compute_uv=False)
    return float(s[0] / s[-1])


def dump_matrix(path, B: np.ndarray, problem: AdrProblem) -> Path:
    """Write ``B`` to an ``.npz`` archive with a JSON header describing the problem."""
    path = Path(path)
    header = dict(problem.describe(), rows=int(B.shape[0]), cols=int(B.shape[1]))
    np.savez_compressed(path, B=B, header=np.array(json.dumps(header)))
    return path if path.suffix == ".npz" else path.with_suffix(path.suffix + ".npz")


def load_matrix(path) -> tuple[np.ndarray, dict]:
    with np.load(path) as data:
        return data["B"], json.loads(str(data["header"]))
