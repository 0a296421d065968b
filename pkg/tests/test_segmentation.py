from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from octseg.errors import DegenerateHistogram, InvalidSpec, LengthMismatch, TooFewIntensities
from octseg.phantom import PhantomSpec, generate_phantom
from octseg.segmentation import (
    KMeansTrace, apply_threshold, inertia, kmeans_segment, morph_refine, otsu_threshold,
)

from . import oracles

images = arrays(np.uint8, st.tuples(st.integers(1, 12), st.integers(2, 12)))
masks = arrays(np.uint8, st.tuples(st.integers(1, 14), st.integers(1, 14)), elements=st.sampled_from([0, 255]))


def test_otsu_half_black_half_white():
    img = np.array([[0, 255], [0, 255]], np.uint8)
    res = otsu_threshold(img)
    assert res.threshold == 0
    assert res.between_class_variance == pytest.approx(0.25 * 255**2)


def test_otsu_constant():
    with pytest.raises(DegenerateHistogram):
        otsu_threshold(np.full((3, 3), 9))


@given(images)
def test_otsu_matches_exhaustive_search(img):
    assume(len(np.unique(img)) >= 2)
    assert otsu_threshold(img).threshold == oracles.otsu_threshold(img)


@pytest.mark.parametrize("pixels, t, expected", [
    ([0, 128, 255], 0, [0, 255, 255]),
    ([0, 128, 255], 255, [0, 0, 0]),
    ([5, 5, 6], 5, [0, 0, 255]),
])
def test_apply_threshold(pixels, t, expected):
    assert apply_threshold(np.array([pixels]), t).pixels.ravel().tolist() == expected


def test_kmeans_separated():
    mask, trace = kmeans_segment(np.array([[10, 10, 250, 250]]))
    assert trace.iterations == 1 and trace.converged
    assert trace.centroids_per_iter == [(10.0, 250.0)]
    assert trace.inertia_per_iter == [0.0]
    assert mask.pixels.tolist() == [[0, 0, 255, 255]]


def test_kmeans_single_bright_pixel():
    mask, trace = kmeans_segment(np.array([[0, 0, 0, 90]]))
    assert trace.centroids_per_iter[-1] == (0.0, 90.0)
    assert trace.inertia_per_iter[-1] == 0.0
    assert mask.pixels.tolist() == [[0, 0, 0, 255]]


def test_kmeans_hand_run():
    # init (0, 100); 40 -> 0 and 60 -> 100; means 20 and 80; inertia 4 * 20^2
    mask, trace = kmeans_segment(np.array([[0, 40, 60, 100]]))
    assert trace.centroids_per_iter == [(20.0, 80.0), (20.0, 80.0)]
    assert trace.inertia_per_iter == [1600.0, 1600.0]
    assert mask.pixels.tolist() == [[0, 0, 255, 255]]


def test_kmeans_errors():
    with pytest.raises(TooFewIntensities):
        kmeans_segment(np.full((2, 2), 4))
    with pytest.raises(InvalidSpec):
        kmeans_segment(np.array([[1, 2]]), k=3)


@pytest.mark.parametrize("seed", range(5))
def test_kmeans_bimodal_phantom_converges_quickly(seed):
    polar, _ = generate_phantom(PhantomSpec(seed=seed))
    _, trace = kmeans_segment(polar)
    assert trace.converged and trace.iterations <= 6


@given(images)
def test_kmeans_trace_properties(img):
    assume(len(np.unique(img)) >= 2)
    mask, trace = kmeans_segment(img, tol=0.5)
    assert all(b <= a for a, b in zip(trace.inertia_per_iter, trace.inertia_per_iter[1:]))
    assert all(v >= 0 for v in trace.inertia_per_iter)
    if trace.converged and trace.iterations > 1:
        prev, last = trace.centroids_per_iter[-2], trace.centroids_per_iter[-1]
        assert max(abs(a - b) for a, b in zip(prev, last)) < 0.5
    # recorded inertia agrees with a direct double loop over the pixels
    c0, c1 = trace.centroids_per_iter[-1]
    lo_is_0 = c0 <= c1
    labels = [(0 if lo_is_0 else 1) if 2 * x <= c0 + c1 else (1 if lo_is_0 else 0) for x in img.ravel().tolist()]
    assert oracles.inertia(img.ravel(), labels, [c0, c1]) == pytest.approx(trace.inertia_per_iter[-1], rel=1e-9,
                                                                           abs=1e-9)


def _has_midpoint_tie(img, trace) -> bool:
    # exact ties between centroids break the inversion symmetry by definition
    levels = np.unique(img)
    for c0, c1 in [(int(levels[0]), int(levels[-1]))] + trace.centroids_per_iter:
        mid = Fraction(c0) + Fraction(c1)
        if any(2 * int(v) == mid for v in levels):
            return True
    return False


@given(images)
def test_kmeans_inversion_inverts_mask(img):
    assume(len(np.unique(img)) >= 2)
    mask, trace = kmeans_segment(img)
    assume(not _has_midpoint_tie(img, trace))
    inv_mask, _ = kmeans_segment(255 - img)
    assert np.array_equal(inv_mask.pixels, 255 - mask.pixels)


def test_inertia():
    assert inertia([3, 3, 7], [0, 0, 1], (3, 7)) == 0.0
    assert inertia([0, 2], [0, 0], (1, 5)) == 2.0
    with pytest.raises(LengthMismatch):
        inertia([1, 2], [0], (0, 0))


@given(st.lists(st.tuples(st.integers(0, 255), st.integers(0, 1)), min_size=1, max_size=50),
       st.floats(0, 255), st.floats(0, 255))
def test_inertia_matches_double_loop(pairs, c0, c1):
    px, lab = zip(*pairs)
    assert inertia(px, lab, (c0, c1)) == pytest.approx(oracles.inertia(px, lab, [c0, c1]), rel=1e-12)


def test_trace_csv_round_trip(tmp_path):
    _, trace = kmeans_segment(np.array([[0, 40, 60, 100, 7]]))
    trace.to_csv(tmp_path / "t.csv")
    back = KMeansTrace.from_csv(tmp_path / "t.csv")
    assert back.iterations == trace.iterations and back.converged == trace.converged
    assert np.allclose(back.inertia_per_iter, trace.inertia_per_iter)
    assert (tmp_path / "t.csv").read_text().splitlines()[0] == "iteration,c0,c1,inertia,converged"


def test_morph_empty():
    assert np.all(morph_refine(np.zeros((6, 6), np.uint8), 1).pixels == 0)


def test_morph_removes_speck():
    m = np.zeros((7, 7), np.uint8)
    m[3, 3] = 255
    assert np.all(morph_refine(m, 1).pixels == 0)


def test_morph_fills_hole():
    m = np.zeros((14, 14), np.uint8)
    m[2:12, 2:12] = 255
    m[6, 6] = 0
    out = morph_refine(m, 1).pixels
    assert out[6, 6] == 255
    assert np.array_equal(out[2:12, 2:12], np.full((10, 10), 255))
    assert out.sum() == 100 * 255


def test_morph_keeps_block_touching_border():
    m = np.zeros((8, 8), np.uint8)
    m[:, :4] = 255
    assert np.array_equal(morph_refine(m, 1).pixels, m)


def test_morph_bad_radius():
    with pytest.raises(InvalidSpec):
        morph_refine(np.zeros((3, 3), np.uint8), 0)


@given(masks, st.integers(1, 2))
def test_morph_idempotent(mask, radius):
    once = morph_refine(mask, radius)
    assert morph_refine(once, radius) == once
