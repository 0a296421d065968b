import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from octseg import features as F
from octseg.errors import DimensionMismatch, EmptyClass, EmptyDataset, InvalidPatch, UnknownFeature

from . import oracles


def dataset(n0, n1, d=7, seed=0):
    r = np.random.default_rng(seed)
    X = r.normal(size=(n0 + n1, d))
    y = np.array([0] * n0 + [1] * n1)
    return F.LabeledDataset(X, y)


def test_constant_patch():
    assert F.patch_features(np.full((11, 11), 60)).tolist() == [60, 0, 60, 60, 60, 0, 0]


def test_entropy_five_four():
    p = np.full((11, 11), 255)
    core = np.array([0, 0, 0, 0, 0, 255, 255, 255, 255]).reshape(3, 3)
    p[4:7, 4:7] = core
    expected = -(5 / 9 * math.log2(5 / 9) + 4 / 9 * math.log2(4 / 9))
    assert F.patch_features(p)[5] == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(0.9911, abs=1e-4)


def test_vertical_step_gradient():
    p = np.zeros((11, 11), int)
    p[:, 5:] = 100
    assert F.patch_features(p)[6] == 400


@pytest.mark.parametrize("shape", [(11, 10), (10, 10), (1, 1)])
def test_bad_patch(shape):
    with pytest.raises(InvalidPatch):
        F.patch_features(np.zeros(shape))


@given(arrays(np.uint8, (11, 11)))
def test_patch_invariants(p):
    f = F.patch_features(p)
    mean, std, lo, hi, med, ent, grad = f
    assert lo <= med <= hi and lo <= mean <= hi
    assert std >= 0 and ent >= 0 and grad >= 0
    assert ent <= math.log2(9) + 1e-12
    assert np.allclose(f, oracles.patch_features(p.ravel().tolist(), 11), rtol=0, atol=1e-9)


def test_extract_all_background_and_all_vessel(rng):
    img = rng.integers(0, 256, (4, 4))
    bg = F.extract_dataset(img, np.zeros((4, 4), np.uint8), patch=3)
    assert len(bg) == 16 and bg.y.sum() == 0 and not bg.balanced
    fg = F.extract_dataset(img, np.full((4, 4), 255, np.uint8), patch=3)
    assert fg.y.tolist() == [1] * 16


def test_extract_matches_oracle_32(rng):
    img = rng.integers(0, 256, (32, 32)).astype(np.uint8)
    mask = np.where(rng.random((32, 32)) < 0.3, 255, 0).astype(np.uint8)
    ds = F.extract_dataset(img, mask)
    X, y = oracles.extract_features(img, mask, 11)
    assert ds.feature_names == F.FEATURE_NAMES
    assert np.array_equal(ds.y, y)
    assert np.allclose(ds.X, X, rtol=0, atol=1e-9)
    # integer-valued features are exact
    assert np.array_equal(ds.X[:, [2, 3, 4, 6]], X[:, [2, 3, 4, 6]])


def test_extract_row_order_and_workers(rng):
    img = rng.integers(0, 256, (40, 23)).astype(np.uint8)
    mask = np.zeros_like(img)
    a = F.extract_dataset(img, mask, workers=1)
    b = F.extract_dataset(img, mask, workers=4)
    assert a.X.tobytes() == b.X.tobytes()
    assert np.array_equal(a.X[23 * 7 + 5], F.patch_features(F.pad_reflect(img, 5)[7:18, 5:16]))


def test_extract_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        F.extract_dataset(np.zeros((12, 12)), np.zeros((12, 11)))


def test_balance_keeps_minority():
    ds = dataset(400, 100)
    b = F.balance_dataset(ds, 1)
    assert b.counts() == (100, 100) and b.balanced
    assert np.array_equal(b.X[b.y == 1], ds.X[ds.y == 1])
    # every kept row is an original row, none repeated
    rows = {r.tobytes() for r in b.X}
    assert len(rows) == 200 and rows <= {r.tobytes() for r in ds.X}


def test_balance_identity_when_balanced():
    ds = dataset(50, 50)
    b = F.balance_dataset(ds, 3)
    assert np.array_equal(b.X, ds.X) and b.balanced


def test_balance_determinism():
    ds = dataset(300, 40)
    a, b, c = F.balance_dataset(ds, 7), F.balance_dataset(ds, 7), F.balance_dataset(ds, 8)
    assert np.array_equal(a.X, b.X)
    assert c.counts() == a.counts()
    assert not np.array_equal(a.X, c.X)


def test_balance_empty_class():
    with pytest.raises(EmptyClass):
        F.balance_dataset(dataset(5, 0), 0)


def test_split_exact_counts():
    tr, te = F.split_dataset(dataset(5, 5), F.SplitSpec(0.8, 1))
    assert tr.counts() == (4, 4) and te.counts() == (1, 1)
    tr, te = F.split_dataset(dataset(2, 2), F.SplitSpec(0.5, 1))
    assert len(tr) == 2 and len(te) == 2


@given(st.integers(1, 60), st.integers(1, 60), st.floats(0.05, 0.95), st.integers(0, 2**64 - 1))
def test_split_partition(n0, n1, frac, seed):
    ds = dataset(n0, n1)
    tr, te = F.split_dataset(ds, F.SplitSpec(frac, seed))
    rows = sorted(r.tobytes() for r in np.concatenate([tr.X, te.X]))
    assert rows == sorted(r.tobytes() for r in ds.X)
    for c, n in ((0, n0), (1, n1)):
        assert abs(tr.counts()[c] - frac * n) <= 1
    tr2, te2 = F.split_dataset(ds, F.SplitSpec(frac, seed))
    assert np.array_equal(tr.X, tr2.X) and np.array_equal(te.X, te2.X)


def test_split_empty():
    with pytest.raises(EmptyDataset):
        F.split_dataset(F.LabeledDataset(np.empty((0, 7)), np.empty(0)))


def test_standardize_rules():
    train = F.LabeledDataset(np.array([[0.0, 5.0], [2.0, 5.0]]), [0, 1], ("a", "b"))
    test = F.LabeledDataset(np.array([[4.0, 9.0]]), [1], ("a", "b"))
    tr, te, stats = F.standardize(train, test)
    assert tr.X[:, 0].tolist() == [-1.0, 1.0]
    assert tr.X[:, 1].tolist() == [5.0, 5.0]
    assert stats.std[1] == 0
    assert te.X.tolist() == [[3.0, 9.0]]


def test_standardize_moments():
    tr, _, _ = F.standardize(dataset(30, 40, seed=3))
    assert np.allclose(tr.X.mean(0), 0, atol=1e-9)
    assert np.allclose(tr.X.std(0), 1, atol=1e-9)


def test_histograms_single_row():
    ds = F.LabeledDataset(np.arange(7.0)[None, :], [1])
    h = F.feature_histograms(ds, 5)
    for name in F.FEATURE_NAMES:
        d0, d1 = h.density[name]
        assert d1.sum() == 1.0 and d1.max() == 1.0 and d0.sum() == 0


def test_histograms_normalised_and_ordered():
    r = np.random.default_rng(4)
    X = r.normal(size=(400, 7))
    y = np.repeat([0, 1], 200)
    X[:200, 5] = r.uniform(0.0, 1.0, 200)
    X[200:, 5] = r.uniform(2.0, 3.0, 200)
    h = F.feature_histograms(F.LabeledDataset(X, y), 20)
    for name in F.FEATURE_NAMES:
        for d in h.density[name]:
            assert d.sum() == pytest.approx(1.0, abs=1e-9)
    edges = h.edges["entropy"]
    centers = (edges[:-1] + edges[1:]) / 2
    d0, d1 = h.density["entropy"]
    assert (centers * d1).sum() > (centers * d0).sum()
    assert centers[d1 > 0].min() > centers[d0 > 0].max()


def test_histograms_csv(tmp_path):
    h = F.feature_histograms(dataset(10, 10), 4)
    h.to_csv(tmp_path / "h.csv")
    lines = (tmp_path / "h.csv").read_text().splitlines()
    assert lines[0] == "feature,bin,lo,hi,class0,class1"
    assert len(lines) == 1 + 7 * 4


def test_drop_min():
    ds = dataset(3, 3)
    d = F.drop_feature(ds, "min")
    assert d.feature_names == ("mean", "std", "max", "median", "entropy", "grad_mag")
    assert d.X.shape[1] == ds.X.shape[1] - 1
    assert np.array_equal(d.X, np.delete(ds.X, 2, axis=1))
    with pytest.raises(UnknownFeature):
        F.drop_feature(ds, "foo")


def test_dataset_csv_round_trip(tmp_path):
    ds = dataset(3, 4)
    ds.to_csv(tmp_path / "d.csv")
    text = (tmp_path / "d.csv").read_text().splitlines()
    assert text[0] == "mean,std,min,max,median,entropy,grad_mag,label"
    back = F.LabeledDataset.from_csv(tmp_path / "d.csv")
    assert np.allclose(back.X, ds.X, rtol=1e-8) and np.array_equal(back.y, ds.y)
