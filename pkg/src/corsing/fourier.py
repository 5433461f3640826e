"""Fourier test functions and their exact inner products with the wavelet trial functions.

All inner products are ``(f, xi_q) = int f(x) exp(-2 pi i q x) dx`` over the
unit cube, with L2-normalized trial functions.
"""

from __future__ import annotations

import numpy as np

from corsing.tensor_basis import AnisoIndex, IsoIndex
from corsing.wavelet1d import CDF22, FilterBank, WaveletIndex

__all__ = [
    "atom_fourier",
    "frequencies_1d",
    "phi_fourier",
    "phi_fourier_derivative",
    "psi_fourier",
    "tensor_product_coeff",
    "test_h1_normsq",
    "test_indices",
]


def frequencies_1d(R: int) -> np.ndarray:
    """``-floor(R/2)+1, ..., floor(R/2)`` in increasing order."""
    if R < 1:
        raise ValueError("R must be positive")
    return np.arange(-(R // 2) + 1, R // 2 + 1)


def test_indices(R: int, n: int) -> np.ndarray:
    """The ``R^n`` test frequencies as an ``(M, n)`` integer array, lexicographic order."""
    q1 = frequencies_1d(R)
    grids = np.meshgrid(*([q1] * n), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def test_h1_normsq(q) -> np.ndarray:
    """``1 + (2 pi |q|_2)^2``; ``q`` may be a single vector or an ``(M, n)`` array."""
    q = np.asarray(q, dtype=float)
    if q.ndim == 0:
        sq = q**2
    else:
        sq = np.sum(q**2, axis=-1)
    return 1.0 + (2.0 * np.pi) ** 2 * sq


def _phase(q, k, level):
    # exp(-2 pi i q k / 2^l), reduced exactly in integers
    period = 2**level
    r = np.mod(np.asarray(q, dtype=np.int64) * np.asarray(k, dtype=np.int64), period)
    return np.exp(-2j * np.pi * r / period)


def phi_fourier(level, shift, q) -> np.ndarray:
    """``(phi_{level,shift}, xi_q) = 2^{-l/2} e^{-2 pi i q k 2^{-l}} [sin(pi q 2^{-l}) / (pi q 2^{-l})]^2``.

    Broadcasts over its arguments. Frequencies that are nonzero multiples of
    ``2^level`` give exactly zero.
    """
    level = np.asarray(level, dtype=np.int64)
    q = np.asarray(q, dtype=np.int64)
    period = 2**level
    w = q / period
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.sin(np.pi * w) / (np.pi * w)
    s = np.where(q == 0, 1.0, s)
    s = np.where((q != 0) & (np.mod(q, period) == 0), 0.0, s)
    return 2.0 ** (-level / 2) * _phase(q, shift, level) * s**2


def phi_fourier_derivative(level, shift, q) -> np.ndarray:
    """``(phi'_{l,k}, xi'_q) = 4 * 2^{3l/2} e^{-2 pi i q k 2^{-l}} sin^2(pi q 2^{-l})``."""
    level = np.asarray(level, dtype=np.int64)
    q = np.asarray(q, dtype=np.int64)
    return 4.0 * 2.0 ** (1.5 * level) * _phase(q, shift, level) * np.sin(np.pi * q / 2**level) ** 2


def psi_fourier(level, shift, q, filters: FilterBank = CDF22) -> np.ndarray:
    """``(psi_{l,k}, xi_q) = 2^{-1/2} sum_j b_{j-2k} (phi_{l+1, j}, xi_q)``; zero at ``q = 0``."""
    level = np.asarray(level, dtype=np.int64)
    shift = np.asarray(shift, dtype=np.int64)
    q = np.asarray(q, dtype=np.int64)
    # phi_{l+1, 2k+j} shares the sinc factor; its phase splits into a shift
    # part exp(-2 pi i q k / 2^l) and a tap part exp(-2 pi i q j / 2^{l+1})
    fine = phi_fourier(level + 1, 0, q)
    period = 2 ** (level + 1)
    symbol = 0.0
    for off, v in zip(*filters.taps("b")):
        symbol = symbol + v * np.exp(-2j * np.pi * np.mod(q * off, period) / period)
    total = fine * symbol * _phase(q, shift, level) / np.sqrt(2.0)
    # the taps sum to zero; enforce the exact value that rounding would miss
    zero_mean = sum(filters.b.values()) == 0
    return np.where((q == 0) & zero_mean, 0.0, total)


def atom_fourier(atoms: np.ndarray, q) -> np.ndarray:
    """Inner products of 1D atoms ``(kind, level, shift)`` with ``xi_q``.

    Returns shape ``q.shape + (n_atoms,)``.
    """
    atoms = np.asarray(atoms)
    q = np.asarray(q, dtype=np.int64)[..., None]
    kind, level, shift = atoms[:, 0], atoms[:, 1], atoms[:, 2]
    out = np.empty(q.shape[:-1] + (len(atoms),), dtype=complex)
    sc = kind == 0
    if sc.any():
        out[..., sc] = phi_fourier(level[sc], shift[sc], q)
    if (~sc).any():
        out[..., ~sc] = psi_fourier(level[~sc], shift[~sc], q)
    return out


def _theta(is_wavelet: bool, level: int, shift: int, q: int) -> complex:
    f = psi_fourier if is_wavelet else phi_fourier
    return complex(f(level, shift, q))


def tensor_product_coeff(index, q, l0: int) -> complex:
    """``(psi_j, xi_q)`` for a single trial index as a product of 1D factors."""
    q = np.atleast_1d(np.asarray(q, dtype=np.int64))
    if isinstance(index, WaveletIndex):
        index = AnisoIndex((index.level,), (index.shift,))
    if isinstance(index, IsoIndex):
        factors = [
            _theta(bool(e), index.level, k, qd) for e, k, qd in zip(index.types, index.shifts, q)
        ]
    elif isinstance(index, AnisoIndex):
        factors = [
            _theta(False, l0, k, qd) if lev == l0 - 1 else _theta(True, lev, k, qd)
            for lev, k, qd in zip(index.levels, index.shifts, q)
        ]
    else:
        raise TypeError(f"not a trial index: {index!r}")
    if len(factors) != len(q):
        raise ValueError("trial and test index dimensions differ")
    return complex(np.prod(factors))
