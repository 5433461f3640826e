"""Periodized CDF(2,2) biorthogonal B-spline wavelets on [0, 1).

Conventions
-----------
All functions are L2-normalized: ``phi_{l,k}(x) = 2^{l/2} phi(2^l x - k)`` where
``phi`` is the hat function supported on [-1, 1], and likewise for ``psi``.
Periodization sums integer translates.

The coarsest scaling functions ``phi_{l0,k}`` are labelled with level ``l0 - 1``
so that a single ``(level, shift)`` pair addresses every basis function.

Canonical order (used by every module of the package): level-major,
shift-minor. The first ``2^l0`` entries are the scaling functions at level
``l0``, followed by ``2^l`` wavelets for each ``l = l0, ..., L-1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple

import numpy as np

__all__ = [
    "CDF22",
    "FilterBank",
    "WaveletIndex",
    "check_levels",
    "dwt_analysis",
    "dwt_synthesis",
    "enumerate_indices",
    "evaluate",
    "h1_weights_1d",
    "interpolate_to_level",
    "level_offsets",
]

_SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class FilterBank:
    """Primal/dual lowpass and highpass filters, stored as ``{offset: tap}``."""

    a: dict[int, Fraction]
    a_dual: dict[int, Fraction]
    b: dict[int, Fraction]
    b_dual: dict[int, Fraction]

    @staticmethod
    def _from_list(start: int, taps: list[str]) -> dict[int, Fraction]:
        return {start + i: Fraction(t) for i, t in enumerate(taps)}

    def taps(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(offsets, values)`` of filter ``name`` as numpy arrays."""
        filt = getattr(self, name)
        offsets = np.array(sorted(filt), dtype=np.int64)
        values = np.array([float(filt[o]) for o in offsets])
        return offsets, values

    def biorthogonality_defects(self) -> list[str]:
        """Check the perfect-reconstruction identities in exact arithmetic.

        For shifts ``t`` the identities are ``sum_i a_i a~_{i-2t} = 2 delta_t``,
        ``sum_i b_i b~_{i-2t} = 2 delta_t`` and
        ``sum_i a_i b~_{i-2t} = sum_i b_i a~_{i-2t} = 0``.
        Returns a description of every violated identity (empty when exact).
        """
        defects = []
        pairs = [
            ("a", "a_dual", 2),
            ("b", "b_dual", 2),
            ("a", "b_dual", 0),
            ("b", "a_dual", 0),
        ]
        for primal, dual, diag in pairs:
            p, d = getattr(self, primal), getattr(self, dual)
            span = max(map(abs, p)) + max(map(abs, d)) + 2
            for t in range(-span, span + 1):
                total = sum(
                    (v * d.get(i - 2 * t, Fraction(0)) for i, v in p.items()),
                    Fraction(0),
                )
                want = diag if t == 0 else 0
                if total != want:
                    defects.append(f"sum {primal}*{dual} at shift {t} = {total}, expected {want}")
        return defects


CDF22 = FilterBank(
    a=FilterBank._from_list(-1, ["1/2", "1", "1/2"]),
    a_dual=FilterBank._from_list(-2, ["-1/4", "1/2", "3/2", "1/2", "-1/4"]),
    b=FilterBank._from_list(-1, ["1/4", "1/2", "-3/2", "1/2", "1/4"]),
    b_dual=FilterBank._from_list(0, ["1/2", "-1", "1/2"]),
)


class WaveletIndex(NamedTuple):
    """1D trial index. ``level == l0 - 1`` denotes the scaling function ``phi_{l0,k}``."""

    level: int
    shift: int

    def dyadic_level(self, l0: int) -> int:
        return max(self.level, l0)

    def is_scaling(self, l0: int) -> bool:
        return self.level == l0 - 1


def check_levels(l0: int, L: int) -> None:
    if int(l0) != l0 or int(L) != L:
        raise ValueError("levels must be integers")
    if l0 < 2:
        raise ValueError(f"coarsest level must be >= 2, got l0={l0}")
    if L <= l0:
        raise ValueError(f"finest level L={L} must exceed l0={l0}")


def enumerate_indices(l0: int, L: int) -> list[WaveletIndex]:
    """All ``2^L`` trial indices in canonical order."""
    check_levels(l0, L)
    out = [WaveletIndex(l0 - 1, k) for k in range(2**l0)]
    for level in range(l0, L):
        out.extend(WaveletIndex(level, k) for k in range(2**level))
    return out


def level_offsets(l0: int, L: int) -> list[int]:
    """Start position of each band in the canonical vector; the last entry is ``2^L``."""
    check_levels(l0, L)
    return [0] + [2**lev for lev in range(l0, L + 1)]


def h1_weights_1d(l0: int, L: int) -> np.ndarray:
    """``2^{-max(level, l0)}`` for every index in canonical order."""
    check_levels(l0, L)
    w = [np.full(2**l0, 2.0**-l0)]
    w += [np.full(2**lev, 2.0**-lev) for lev in range(l0, L)]
    return np.concatenate(w)


def _levels_from_length(n: int, l0: int) -> int:
    L = int(n).bit_length() - 1
    if n <= 0 or 2**L != n or L <= l0:
        raise ValueError(f"length {n} is not a power of two >= 2^{l0 + 1}")
    return L


def _analysis_step(c: np.ndarray, axis: int, filters: FilterBank) -> tuple[np.ndarray, np.ndarray]:
    n = c.shape[axis]
    half = np.arange(n // 2)
    lo = 0.0
    hi = 0.0
    for off, v in zip(*filters.taps("a_dual")):
        lo = lo + v * np.take(c, (2 * half + off) % n, axis=axis)
    for off, v in zip(*filters.taps("b_dual")):
        hi = hi + v * np.take(c, (2 * half + off) % n, axis=axis)
    return lo / _SQRT2, hi / _SQRT2


def _synthesis_step(lo: np.ndarray, hi: np.ndarray, axis: int, filters: FilterBank) -> np.ndarray:
    lo = np.moveaxis(lo, axis, 0)
    hi = np.moveaxis(hi, axis, 0)
    h = lo.shape[0]
    out = np.zeros((2 * h,) + lo.shape[1:], dtype=np.result_type(lo, hi, float))
    k = np.arange(h)
    for off, v in zip(*filters.taps("a")):
        np.add.at(out, (2 * k + off) % (2 * h), v * lo)
    for off, v in zip(*filters.taps("b")):
        np.add.at(out, (2 * k + off) % (2 * h), v * hi)
    return np.moveaxis(out / _SQRT2, 0, axis)


def analysis_step(c, axis: int = -1, filters: FilterBank = CDF22):
    """One decomposition step along ``axis``: level ``l+1`` scaling coefficients
    to ``(scaling, wavelet)`` coefficients at level ``l``."""
    c = np.asarray(c)
    if c.shape[axis] % 2:
        raise ValueError("odd length along the transform axis")
    return _analysis_step(c, axis, filters)


def synthesis_step(lo, hi, axis: int = -1, filters: FilterBank = CDF22):
    """Inverse of :func:`analysis_step`."""
    lo, hi = np.asarray(lo), np.asarray(hi)
    if lo.shape != hi.shape:
        raise ValueError("lowpass and highpass bands differ in shape")
    return _synthesis_step(lo, hi, axis % lo.ndim, filters)


def dwt_analysis(fine, l0: int = 2, axis: int = -1, filters: FilterBank = CDF22) -> np.ndarray:
    """Fast periodic wavelet decomposition.

    Parameters
    ----------
    fine : array_like
        Level-``L`` scaling coefficients (length ``2^L`` along ``axis``).
    l0 : int
        Coarsest level.
    axis : int
        Axis to transform; other axes are carried along.

    Returns
    -------
    ndarray
        Wavelet coefficients in canonical order along ``axis``.
    """
    fine = np.asarray(fine)
    axis = axis % fine.ndim
    L = _levels_from_length(fine.shape[axis], l0)
    check_levels(l0, L)
    bands = []
    c = fine
    for _ in range(L - l0):
        c, d = _analysis_step(c, axis, filters)
        bands.append(d)
    return np.concatenate([c] + bands[::-1], axis=axis)


def dwt_synthesis(coeffs, l0: int = 2, axis: int = -1, filters: FilterBank = CDF22) -> np.ndarray:
    """Inverse of :func:`dwt_analysis`: canonical coefficients to level-``L`` scaling coefficients."""
    coeffs = np.asarray(coeffs)
    axis = axis % coeffs.ndim
    L = _levels_from_length(coeffs.shape[axis], l0)
    check_levels(l0, L)
    offs = level_offsets(l0, L)
    c = np.take(coeffs, np.arange(offs[1]), axis=axis)
    for i in range(1, len(offs) - 1):
        d = np.take(coeffs, np.arange(offs[i], offs[i + 1]), axis=axis)
        c = _synthesis_step(c, d, axis, filters)
    return c


def interpolate_to_level(u: Callable, L: int) -> np.ndarray:
    """Scaling coefficients ``c_k = 2^{-L/2} u(k 2^{-L})`` of the piecewise-linear interpolant."""
    x = np.arange(2**L) / 2**L
    return 2.0 ** (-L / 2) * np.asarray(u(x))


def evaluate(coeffs, l0: int, x) -> np.ndarray:
    """Evaluate ``sum_j c_j psi_j`` at points ``x`` (periodic)."""
    fine = dwt_synthesis(coeffs, l0)
    N = fine.shape[-1]
    t = (np.asarray(x, dtype=float) % 1.0) * N
    i0 = np.floor(t).astype(np.int64) % N
    frac = t - np.floor(t)
    return np.sqrt(N) * ((1.0 - frac) * fine[i0] + frac * fine[(i0 + 1) % N])
