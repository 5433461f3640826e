import numpy as np
import pytest

from corsing.tensor_basis import (
    AnisoIndex,
    IsoIndex,
    TrialBasis,
    enumerate_ani,
    enumerate_iso,
    h1_weight,
    tensor_dwt,
    tensor_idwt,
)
from corsing.validation import atom_nodal_values
from corsing.wavelet1d import WaveletIndex, dwt_analysis


@pytest.mark.parametrize("n, L, size", [(2, 3, 64), (3, 3, 512), (2, 6, 4096)])
def test_index_counts(n, L, size):
    assert len(enumerate_ani(2, L, n)) == size
    assert len(enumerate_iso(2, L, n)) == size
    assert TrialBasis("ani", 2, L, n).size == size


def test_iso_layout():
    idx = enumerate_iso(2, 3, 2)
    assert idx[0] == IsoIndex(2, (0, 0), (0, 0))
    assert idx[16] == IsoIndex(2, (0, 0), (0, 1))
    assert {i.types for i in idx[16:]} == {(0, 1), (1, 0), (1, 1)}


def test_weights():
    assert h1_weight(AnisoIndex((1, 4), (0, 3)), 2) == 2.0**-4
    assert h1_weight(AnisoIndex((1, 1), (0, 0)), 2) == 0.25
    assert h1_weight(IsoIndex(3, (0, 0), (1, 0)), 2) == 0.125
    assert h1_weight(WaveletIndex(1, 0), 2) == 0.25
    for mode in ("ani", "iso"):
        b = TrialBasis(mode, 2, 4, 2)
        assert np.array_equal(b.weights, [h1_weight(i, 2) for i in b.indices])


def test_bad_modes():
    with pytest.raises(ValueError):
        TrialBasis("iso", 2, 4, 1)
    with pytest.raises(ValueError):
        TrialBasis("1d", 2, 4, 2)
    with pytest.raises(ValueError):
        TrialBasis("ani", 2, 4, 4)


@pytest.mark.parametrize("mode", ["ani", "iso"])
@pytest.mark.parametrize("n, L", [(2, 5), (3, 3)])
def test_round_trip(mode, n, L, rng):
    X = rng.standard_normal((2**L,) * n)
    v = tensor_dwt(X, 2, mode)
    assert v.shape == (2 ** (n * L),)
    Y = tensor_idwt(v, 2, L, n, mode)
    assert np.max(np.abs(X - Y)) <= 1e-12


@pytest.mark.parametrize("mode", ["ani", "iso"])
def test_constant_has_only_coarse_part(mode):
    b = TrialBasis(mode, 2, 5, 2)
    c = b.coefficients(lambda x, y: np.full_like(x, 1.7))
    coarse = np.array([h1_weight(i, 2) == 0.25 and _all_scaling(i) for i in b.indices])
    assert np.max(np.abs(c[~coarse])) <= 1e-12
    assert np.max(np.abs(c[coarse])) > 0


def _all_scaling(i):
    if isinstance(i, IsoIndex):
        return not any(i.types)
    return all(lev == 1 for lev in i.levels)


def test_ani_of_rank_one_is_outer_product(rng):
    x, y = rng.standard_normal(32), rng.standard_normal(32)
    v = tensor_dwt(np.outer(x, y), 2, "ani")
    assert np.allclose(v, np.outer(dwt_analysis(x, 2), dwt_analysis(y, 2)).ravel(), atol=1e-13)


def test_iso_coarse_block_of_rank_one(rng):
    # the isotropic coarse block is the tensor product of the 1D coarse coefficients
    x, y = rng.standard_normal(32), rng.standard_normal(32)
    v = tensor_dwt(np.outer(x, y), 2, "iso")
    assert np.allclose(v[:16], np.outer(dwt_analysis(x, 2)[:4], dwt_analysis(y, 2)[:4]).ravel(), atol=1e-13)


def test_atom_table_consistent():
    for mode, n in (("1d", 1), ("ani", 2), ("iso", 2)):
        b = TrialBasis(mode, 2, 4, n)
        assert b.atom_ids.shape == (b.size, n)
        for j in (0, 7, b.size - 1):
            idx = b.indices[j]
            kinds = b.atoms[b.atom_ids[j], 0]
            if mode == "iso":
                assert list(kinds) == list(idx.types)
            else:
                levels = [idx.level] if mode == "1d" else idx.levels
                assert list(kinds) == [int(lev >= 2) for lev in levels]


def _pl_norms(vals):
    """L2 and H1-seminorm squared of the periodic piecewise-linear interpolant of ``vals``."""
    h = 1.0 / len(vals)
    nxt = np.roll(vals, -1)
    l2 = h * np.sum(vals**2 + vals * nxt + nxt**2) / 3
    semi = np.sum((nxt - vals) ** 2) / h
    return l2, semi


def test_h1_normalization_band():
    # weight times the H1 norm of each L2-normalized function stays within a factor 4
    # of a common center; the absolute band [1/4, 4] is exceeded by the wavelet
    # itself, whose normalized seminorm tends to sqrt(16.5)
    norms = {}
    for kind in (0, 1):
        for level in range(2, 9):
            _, vals = atom_nodal_values(kind, level, 0)
            norms[kind, level] = _pl_norms(vals)
    ratios = []
    for level in range(2, 9):
        l2, semi = norms[1, level]
        ratios.append(2.0**-level * np.sqrt(l2 + semi))
    l2, semi = norms[0, 2]
    ratios.append(0.25 * np.sqrt(l2 + semi))
    # 2D tensor products: |fg|_H1^2 = |f|^2 |g|_L2^2 + |f|_L2^2 |g|^2
    for (k1, l1), (k2, l2_) in [((0, 2), (1, 8)), ((1, 5), (1, 5)), ((1, 3), (1, 8)), ((0, 2), (0, 2))]:
        a, b = norms[k1, l1], norms[k2, l2_]
        h1sq = a[0] * b[0] + a[1] * b[0] + a[0] * b[1]
        w = h1_weight(AnisoIndex((l1 if k1 else 1, l2_ if k2 else 1), (0, 0)), 2)
        ratios.append(w * np.sqrt(h1sq))
    # isotropic: both factors at the same level, weight 2^-level
    for level in range(2, 9):
        a, b = norms[0, level], norms[1, level]
        ratios.append(2.0**-level * np.sqrt(a[0] * b[0] + a[1] * b[0] + a[0] * b[1]))
    ratios = np.array(ratios)
    center = np.sqrt(ratios.max() * ratios.min())
    assert np.all(ratios / center >= 0.25) and np.all(ratios / center <= 4.0), ratios
    assert ratios[6] == pytest.approx(np.sqrt(16.5 + 2.0**-16 * norms[1, 8][0]), rel=1e-12)
