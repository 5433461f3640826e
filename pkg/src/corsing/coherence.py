"""Local a-coherence bounds, sampling measures and size recipes.

Proportionality constants of the bounds are set to one; they cancel in the
normalized measures and are only heuristic in :func:`recommend_m`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = [
    "MEASURE_KINDS",
    "SamplingMeasure",
    "build_measure",
    "empirical_coherence",
    "empirical_rule_m",
    "nu_1d",
    "nu_1d_sharp",
    "nu_ani",
    "nu_iso",
    "nu_practical",
    "recommend_R",
    "recommend_m",
]

MEASURE_KINDS = ("uniform", "thm4.3", "sharp-1D", "thm4.5", "thm4.7", "practical")


def _abs_int(q) -> np.ndarray:
    return np.abs(np.asarray(q, dtype=np.int64))


def nu_1d(q, N: int, C: float = 1.0) -> np.ndarray:
    """``C`` at ``q = 0`` and ``C min(N/q^2, 1/|q|)`` otherwise."""
    aq = _abs_int(q).astype(float)
    with np.errstate(divide="ignore"):
        val = C * np.minimum(N / aq**2, 1.0 / aq)
    return np.where(aq == 0, float(C), val)


def nu_1d_sharp(q, N: int, eta_h1sq: float, beta_h1sq: float, rho_h1sq: float) -> np.ndarray:
    """Bound for ``rho`` in H1: ``(|eta|^2 + |beta|^2/q^2 + |rho|^2/q^4) min(N/q^2, 1/|q|)``.

    The ``q = 0`` value is ``|eta|^2 + |beta|^2 + |rho|^2``.
    """
    aq = _abs_int(q).astype(float)
    c0 = eta_h1sq + beta_h1sq + rho_h1sq
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (eta_h1sq + beta_h1sq / aq**2 + rho_h1sq / aq**4) * np.minimum(N / aq**2, 1.0 / aq)
    return np.where(aq == 0, c0, val)


def _support_parts(q):
    q = np.atleast_2d(_abs_int(q)).astype(float)
    nnz = np.count_nonzero(q, axis=1)
    qn2 = np.sum(q**2, axis=1)
    qinf = np.max(q, axis=1)
    qq = np.where(q == 0, 1.0, q)
    prod1 = np.prod(qq, axis=1)
    prod4 = np.prod(qq**4, axis=1)
    return q.shape[1], nnz, qn2, qinf, prod1, prod4


def _squeeze(val, q):
    return val[0] if np.ndim(q) == 1 else val


def nu_ani(q, l0: int, L: int, n: int = None) -> np.ndarray:
    """Coherence bound for anisotropic tensor wavelets (constant coefficients, ``C = 1``).

    ``q`` is a single frequency vector or an ``(M, n)`` array.
    """
    dim, nnz, qn2, qinf, prod1, prod4 = _support_parts(q)
    n = dim if n is None else n
    with np.errstate(divide="ignore", invalid="ignore"):
        first = 2.0 ** ((3 * nnz - 2) * L) * qn2 / prod4
        second = qn2 / (qinf**2 * prod1)
        val = 2.0 ** (-(n - nnz) * l0) * np.minimum(first, second)
    val = np.where(nnz == 0, 2.0 ** (-(2 + n) * l0), val)
    return _squeeze(val, q)


def nu_iso(q, l0: int, L: int, n: int = None) -> np.ndarray:
    """Coherence bound for isotropic tensor wavelets (constant coefficients, ``C = 1``)."""
    dim, nnz, qn2, qinf, prod1, prod4 = _support_parts(q)
    n = dim if n is None else n
    with np.errstate(divide="ignore", invalid="ignore"):
        first = (1.0 + 2.0 ** (2 * (-n / 2 + 2 * nnz - 1) * L)) * qn2 / prod4
        second = 2.0 ** (-(n - nnz) * l0) * qn2 / (qinf**2 * prod1)
        val = np.minimum(first, second)
    val = np.where(nnz == 0, 2.0 ** (-(2 + n) * l0), val)
    return _squeeze(val, q)


def nu_practical(q) -> np.ndarray:
    """``min(1, |q|_2^2 / (|q|_inf^2 prod_{q_i != 0} |q_i|))``, equal to 1 at ``q = 0``."""
    _, nnz, qn2, qinf, prod1, _ = _support_parts(q)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.minimum(1.0, qn2 / (qinf**2 * prod1))
    val = np.where(nnz == 0, 1.0, val)
    return _squeeze(val, q)


@dataclass(frozen=True)
class SamplingMeasure:
    """Probability vector over the test frequencies (rows of ``indices``).

    ``bound`` keeps the unnormalized coherence bound the probabilities came from.
    """

    probabilities: np.ndarray
    kind: str
    indices: np.ndarray
    bound: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        p = self.probabilities
        if p.ndim != 1 or len(p) != len(self.indices):
            raise ValueError("probabilities and indices disagree in length")
        if not np.all(np.isfinite(p)) or np.any(p <= 0):
            raise ValueError("sampling measure must be finite and strictly positive")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {p.sum()!r}")

    @property
    def M(self) -> int:
        return len(self.probabilities)


def build_measure(kind: str, Q, **params) -> SamplingMeasure:
    """Normalize a coherence bound restricted to ``Q`` into a probability vector.

    Parameters
    ----------
    kind : str
        One of ``MEASURE_KINDS``. "thm4.3" needs ``N`` (optional ``C``);
        "sharp-1D" needs ``N, eta_h1sq, beta_h1sq, rho_h1sq``; "thm4.5" and
        "thm4.7" need ``l0, L``.
    Q : array_like
        Test frequencies, ``(M,)`` or ``(M, n)``.
    """
    Q = np.asarray(Q, dtype=np.int64)
    Q2 = Q.reshape(len(Q), -1)
    if kind == "uniform":
        nu = np.ones(len(Q2))
    elif kind == "thm4.3":
        nu = nu_1d(Q2[:, 0], params["N"], params.get("C", 1.0))
    elif kind == "sharp-1D":
        nu = nu_1d_sharp(Q2[:, 0], params["N"], params["eta_h1sq"], params["beta_h1sq"], params["rho_h1sq"])
    elif kind == "thm4.5":
        nu = nu_ani(Q2, params["l0"], params["L"])
    elif kind == "thm4.7":
        nu = nu_iso(Q2, params["l0"], params["L"])
    elif kind == "practical":
        nu = nu_practical(Q2)
    else:
        raise ValueError(f"unknown measure kind {kind!r}; expected one of {MEASURE_KINDS}")
    nu = np.asarray(nu, dtype=float)
    if not np.all(np.isfinite(nu)) or np.any(nu <= 0):
        raise ValueError(f"coherence bound {kind!r} is not finite and positive on Q")
    p = nu / nu.sum()
    # renormalize once more so the sum is 1 to rounding
    p = p / math.fsum(p)
    return SamplingMeasure(p, kind, Q2, nu)


def recommend_R(s: int, N: int, n: int = 1, C: float = 1.0, practical: bool = True) -> int:
    """Test-space size ``R``.

    The theoretical value is ``C s N`` in 1D and ``C s N^{3 - 2/n}`` for ``n > 1``
    (unit constant). With ``practical=True`` the value used in the numerical
    studies is returned: ``R = N`` in 1D and ``R = 2^L = N^{1/n}`` otherwise.
    """
    if s > N:
        raise ValueError("sparsity exceeds trial dimension")
    if practical:
        return int(N) if n == 1 else int(round(N ** (1.0 / n)))
    exponent = 1.0 if n == 1 else 3.0 - 2.0 / n
    return int(math.ceil(C * s * N**exponent))


def recommend_m(s: int, N: int, eps: float, C: float = 1.0, n: int = 1, l0: int = 2) -> int:
    """Sample count from the recovery theorem with unit leading constant.

    ``C s (s ln(eN/(2s)) + ln(2s/eps)) (ln N + ln s + ln C)^n``, times ``2^{n l0}`` when ``n > 1``.
    The log factor is floored at 1 so that ``C < 1`` cannot make it vanish.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if s < 1 or s > N:
        raise ValueError("need 1 <= s <= N")
    core = s * math.log(math.e * N / (2 * s)) + math.log(2 * s / eps)
    logs = max(math.log(N) + math.log(s) + math.log(C), 1.0)
    val = C * s * core * logs**n
    if n > 1:
        val *= 2 ** (n * l0)
    return int(math.ceil(val))


def empirical_rule_m(s: int, N: int) -> int:
    """``ceil(2 s ln N)`` (natural logarithm)."""
    return int(math.ceil(2 * s * math.log(N)))


def empirical_coherence(B) -> np.ndarray:
    """``mu_q = max_j |B_{q,j}|^2`` row by row."""
    B = np.asarray(B)
    return np.max(np.abs(B) ** 2, axis=1)
