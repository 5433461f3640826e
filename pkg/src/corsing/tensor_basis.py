"""Anisotropic and isotropic tensor-product wavelet bases on the periodic cube.

Anisotropic indices are ordered lexicographically over the per-axis canonical
1D orders, i.e. the C-order ravel of an ``(2^L,)*n`` array that was transformed
axis by axis.

Isotropic indices start with the coarsest layer ``(l0, k, 0)`` (shifts
lexicographic), then for ``l = l0, ..., L-1`` every nonzero type vector ``e``
in lexicographic order, each followed by its ``(2^l)^n`` shifts.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, NamedTuple, Union

import numpy as np

from corsing.wavelet1d import (
    CDF22,
    FilterBank,
    analysis_step,
    check_levels,
    dwt_analysis,
    dwt_synthesis,
    enumerate_indices,
    h1_weights_1d,
    synthesis_step,
)

__all__ = [
    "AnisoIndex",
    "IsoIndex",
    "TrialBasis",
    "enumerate_ani",
    "enumerate_iso",
    "h1_weight",
    "tensor_dwt",
    "tensor_idwt",
]

MODES = ("1d", "ani", "iso")


class AnisoIndex(NamedTuple):
    levels: tuple[int, ...]
    shifts: tuple[int, ...]


class IsoIndex(NamedTuple):
    level: int
    shifts: tuple[int, ...]
    types: tuple[int, ...]


TrialIndex = Union[AnisoIndex, IsoIndex]


def _check(l0: int, L: int, n: int) -> None:
    check_levels(l0, L)
    if n not in (1, 2, 3):
        raise ValueError(f"dimension must be 1, 2 or 3, got {n}")


def enumerate_ani(l0: int, L: int, n: int) -> list[AnisoIndex]:
    _check(l0, L, n)
    one_d = enumerate_indices(l0, L)
    return [
        AnisoIndex(tuple(i.level for i in combo), tuple(i.shift for i in combo))
        for combo in itertools.product(one_d, repeat=n)
    ]


def _iso_types(n: int) -> list[tuple[int, ...]]:
    return [e for e in itertools.product((0, 1), repeat=n) if any(e)]


def enumerate_iso(l0: int, L: int, n: int) -> list[IsoIndex]:
    _check(l0, L, n)
    zero = (0,) * n
    out = [IsoIndex(l0, k, zero) for k in itertools.product(range(2**l0), repeat=n)]
    for level in range(l0, L):
        for e in _iso_types(n):
            out.extend(IsoIndex(level, k, e) for k in itertools.product(range(2**level), repeat=n))
    return out


def h1_weight(index, l0: int) -> float:
    """H1 normalization factor of a trial index.

    ``2^{-max_d max(l_d, l0)}`` for anisotropic (and 1D) indices, ``2^{-l}`` for isotropic ones.
    """
    if isinstance(index, IsoIndex):
        return 2.0**-index.level
    if isinstance(index, AnisoIndex):
        return 2.0 ** -max(max(lev, l0) for lev in index.levels)
    return 2.0 ** -max(index.level, l0)


def _iso_dwt(X: np.ndarray, l0: int, filters: FilterBank) -> np.ndarray:
    n = X.ndim
    L = X.shape[0].bit_length() - 1
    layers = []
    c = X
    for level in range(L - 1, l0 - 1, -1):
        blocks = {(): c}
        for ax in range(n):
            split = {}
            for key, arr in blocks.items():
                lo, hi = analysis_step(arr, axis=ax, filters=filters)
                split[key + (0,)] = lo
                split[key + (1,)] = hi
            blocks = split
        layers.append(np.concatenate([blocks[e].ravel() for e in _iso_types(n)]))
        c = blocks[(0,) * n]
    return np.concatenate([c.ravel()] + layers[::-1])


def _iso_idwt(v: np.ndarray, l0: int, L: int, n: int, filters: FilterBank) -> np.ndarray:
    size = 2**l0
    c = v[: size**n].reshape((size,) * n)
    pos = size**n
    for level in range(l0, L):
        h = 2**level
        blocks = {(0,) * n: c}
        for e in _iso_types(n):
            blocks[e] = v[pos : pos + h**n].reshape((h,) * n)
            pos += h**n
        for ax in reversed(range(n)):
            merged = {}
            for key in {k[:ax] for k in blocks}:
                merged[key] = synthesis_step(blocks[key + (0,)], blocks[key + (1,)], axis=ax, filters=filters)
            blocks = merged
        c = blocks[()]
    return c


def tensor_dwt(X, l0: int, mode: str, filters: FilterBank = CDF22) -> np.ndarray:
    """Separable wavelet decomposition of level-``L`` scaling coefficients.

    Parameters
    ----------
    X : array_like
        Array of shape ``(2^L,) * n``.
    mode : {"1d", "ani", "iso"}
        "ani" applies the full 1D cascade along each axis; "iso" takes one
        step along every axis per level.

    Returns
    -------
    ndarray
        Flat coefficient vector in the canonical order of ``mode``.
    """
    X = np.asarray(X)
    if X.ndim == 0 or len(set(X.shape)) != 1:
        raise ValueError(f"expected a cube of side 2^L, got shape {X.shape}")
    L = X.shape[0].bit_length() - 1
    if 2**L != X.shape[0]:
        raise ValueError(f"side length {X.shape[0]} is not a power of two")
    _check(l0, L, X.ndim)
    if mode == "iso":
        return _iso_dwt(X, l0, filters)
    if mode not in ("1d", "ani"):
        raise ValueError(f"unknown mode {mode!r}")
    for ax in range(X.ndim):
        X = dwt_analysis(X, l0, axis=ax, filters=filters)
    return X.ravel()


def tensor_idwt(v, l0: int, L: int, n: int, mode: str, filters: FilterBank = CDF22) -> np.ndarray:
    """Inverse of :func:`tensor_dwt`; returns the ``(2^L,)*n`` array of fine scaling coefficients."""
    v = np.asarray(v)
    _check(l0, L, n)
    if v.shape != (2 ** (n * L),):
        raise ValueError(f"expected {2 ** (n * L)} coefficients, got shape {v.shape}")
    if mode == "iso":
        return _iso_idwt(v, l0, L, n, filters)
    if mode not in ("1d", "ani"):
        raise ValueError(f"unknown mode {mode!r}")
    X = v.reshape((2**L,) * n)
    for ax in range(n):
        X = dwt_synthesis(X, l0, axis=ax, filters=filters)
    return X


@dataclass(frozen=True)
class TrialBasis:
    """H1-normalized wavelet trial basis.

    Besides the index list, the basis is described as a table of 1D *atoms*
    ``(kind, level, shift)`` with kind 0 = scaling function ``phi_{level,shift}``
    and kind 1 = wavelet ``psi_{level,shift}``; ``atom_ids[j, d]`` names the
    factor of trial function ``j`` along axis ``d``. Fourier products are
    evaluated on atoms and gathered through ``atom_ids``.
    """

    mode: str
    l0: int
    L: int
    n: int = 1
    filters: FilterBank = field(default=CDF22, repr=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown basis mode {self.mode!r}")
        _check(self.l0, self.L, self.n)
        if self.mode == "1d" and self.n != 1:
            raise ValueError("mode '1d' requires n = 1")
        if self.mode == "iso" and self.n == 1:
            raise ValueError("isotropic tensorization needs n > 1")

    @property
    def size(self) -> int:
        return 2 ** (self.n * self.L)

    @cached_property
    def indices(self) -> list:
        if self.mode == "1d":
            return enumerate_indices(self.l0, self.L)
        if self.mode == "ani":
            return enumerate_ani(self.l0, self.L, self.n)
        return enumerate_iso(self.l0, self.L, self.n)

    @cached_property
    def weights(self) -> np.ndarray:
        if self.mode in ("1d", "ani"):
            w1 = h1_weights_1d(self.l0, self.L)
            grids = np.meshgrid(*([w1] * self.n), indexing="ij")
            return np.minimum.reduce([g.ravel() for g in grids])
        w = [np.full(2 ** (self.n * self.l0), 2.0**-self.l0)]
        for level in range(self.l0, self.L):
            w.append(np.full((2**self.n - 1) * 2 ** (self.n * level), 2.0**-level))
        return np.concatenate(w)

    @cached_property
    def _atoms(self) -> tuple[np.ndarray, np.ndarray]:
        l0, L, n = self.l0, self.L, self.n
        if self.mode in ("1d", "ani"):
            kinds = [0] * 2**l0 + [1] * (2**L - 2**l0)
            levels = [l0] * 2**l0 + [lev for lev in range(l0, L) for _ in range(2**lev)]
            shifts = list(range(2**l0)) + [k for lev in range(l0, L) for k in range(2**lev)]
            atoms = np.array([kinds, levels, shifts], dtype=np.int64).T
            grids = np.meshgrid(*([np.arange(2**L)] * n), indexing="ij")
            ids = np.stack([g.ravel() for g in grids], axis=1)
            return atoms, ids
        # iso: phi and psi at every level l0..L-1, addressed by (kind, level) blocks
        rows = []
        start = {}
        for kind in (0, 1):
            for lev in range(l0, L):
                start[kind, lev] = len(rows)
                rows.extend((kind, lev, k) for k in range(2**lev))
        atoms = np.array(rows, dtype=np.int64)
        ids = []
        for idx in self.indices:
            ids.append([start[e, idx.level] + k for e, k in zip(idx.types, idx.shifts)])
        return atoms, np.array(ids, dtype=np.int64)

    @property
    def atoms(self) -> np.ndarray:
        """``(n_atoms, 3)`` integer array of ``(kind, level, shift)``."""
        return self._atoms[0]

    @property
    def atom_ids(self) -> np.ndarray:
        """``(N, n)`` integer array of atom rows per trial function."""
        return self._atoms[1]

    def analysis(self, fine) -> np.ndarray:
        """L2-basis coefficients of the fine scaling representation."""
        return tensor_dwt(fine, self.l0, self.mode, self.filters)

    def synthesis(self, coeffs) -> np.ndarray:
        return tensor_idwt(coeffs, self.l0, self.L, self.n, self.mode, self.filters)

    def nodal_values(self, u: Callable) -> np.ndarray:
        """Samples ``u(x)`` on the level-``L`` grid, shape ``(2^L,)*n``."""
        x = np.arange(2**self.L) / 2**self.L
        grids = np.meshgrid(*([x] * self.n), indexing="ij")
        return np.asarray(u(*grids))

    def coefficients(self, u: Callable) -> np.ndarray:
        """H1-normalized coefficients of the level-``L`` piecewise-multilinear interpolant of ``u``."""
        fine = 2.0 ** (-self.n * self.L / 2) * self.nodal_values(u)
        return self.analysis(fine) / self.weights
