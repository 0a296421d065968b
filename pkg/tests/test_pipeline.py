import json
from dataclasses import replace

import numpy as np
import pytest

from octseg.errors import DegenerateHistogram
from octseg.features import LabeledDataset
from octseg.models import load_model
from octseg.phantom import PhantomSpec, generate_phantom
from octseg.pipeline import PipelineConfig, PipelineError, run_pipeline
from octseg.raster import load_mask, load_pgm, save_pgm
from octseg.segmentation import KMeansTrace

CLEAN = PhantomSpec(speckle_sigma=0.0, salt_pepper_fraction=0.0, shadow_width=0)
SMALL = PhantomSpec(n_angles=64, n_radii=48, lumen_radius_base=14.0, wall_thickness=10, shadow_center_col=20, shadow_width=4)


def write_phantom(tmp_path, spec, name="in.pgm"):
    path = tmp_path / name
    save_pgm(generate_phantom(spec)[0], path)
    return path


def test_constant_input_fails_at_otsu(tmp_path):
    src = tmp_path / "flat.pgm"
    save_pgm(np.full((32, 32), 77, np.uint8), src)
    with pytest.raises(PipelineError) as exc:
        run_pipeline(src, PipelineConfig(), tmp_path / "out")
    assert exc.value.stage == "otsu"
    assert isinstance(exc.value.cause, DegenerateHistogram)
    rep = json.loads((tmp_path / "out" / "report.json").read_text())
    assert rep["status"] == "FAILED" and rep["failed_stage"] == "otsu"
    assert "DegenerateHistogram" in rep["error"]
    # earlier stages left their artifacts behind
    for rel in rep["artifacts"].values():
        assert (tmp_path / "out" / rel).exists()


def test_missing_input_fails_at_load(tmp_path):
    with pytest.raises(PipelineError) as exc:
        run_pipeline(tmp_path / "none.pgm", PipelineConfig(), tmp_path / "out")
    assert exc.value.stage == "load" and exc.value.exit_code == 3


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("small")
    src = write_phantom(tmp, SMALL)
    cfg = PipelineConfig(patch=5, epochs=500, drop_features=["entropy"], force_median=True)
    return tmp / "out", run_pipeline(src, cfg, tmp / "out")


def test_report_artifacts_exist_and_reload(small_run):
    out, rep = small_run
    on_disk = json.loads((out / "report.json").read_text())
    assert on_disk["status"] == "OK"
    for key, rel in on_disk["artifacts"].items():
        assert (out / rel).exists(), key
    assert load_pgm(out / "02_blended_display.pgm").width == 64 - 4
    assert load_mask(out / "05_kmeans_mask.pgm").shape == load_pgm(out / "03_cartesian.pgm").shape
    ds = LabeledDataset.from_csv(out / "features.csv")
    assert "entropy" not in ds.feature_names and len(ds) == 96 * 96
    trace = KMeansTrace.from_csv(out / "kmeans_trace.csv")
    assert trace.iterations == on_disk["kmeans"]["iterations"]
    model, names, stats, patch = load_model(out / "model_svm.json")
    assert names == ds.feature_names and patch == 5
    assert (out / "histograms.csv").read_text().startswith("feature,bin,lo,hi,class0,class1\n")
    assert (out / "pca.csv").read_text().startswith("pc1,pc2,label,")


def test_report_contents(small_run):
    _, rep = small_run
    d = rep.dataset
    assert d["class_0"] + d["class_1"] == d["total"]
    assert d["balanced"] == 2 * min(d["class_0"], d["class_1"]) == d["train"] + d["test"]
    assert rep.median_applied and rep.shadow_band["width"] == 4
    assert set(rep.metrics) == {"logreg", "svm"}
    assert 0.0 <= rep.mask_agreement <= 1.0
    assert set(rep.timings) >= {"load", "noise", "otsu", "kmeans", "features", "train_svm", "predict"}


def test_clean_phantom_agreement(tmp_path):
    rep = run_pipeline(write_phantom(tmp_path, CLEAN), PipelineConfig(), tmp_path / "out")
    assert rep.status == "OK"
    assert rep.mask_agreement >= 0.99
    assert rep.metrics["svm"]["accuracy"] >= 0.99


def test_blended_frame_never_reaches_features(tmp_path):
    # changing blend_width alters only the display artifact
    src = write_phantom(tmp_path, SMALL)
    base = dict(patch=5, epochs=200)
    a = run_pipeline(src, PipelineConfig(blend_width=0, **base), tmp_path / "a")
    b = run_pipeline(src, PipelineConfig(blend_width=6, **base), tmp_path / "b")
    assert (tmp_path / "a" / "02_blended_display.pgm").read_bytes() != (tmp_path / "b" / "02_blended_display.pgm").read_bytes()
    for name in ("features.csv", "model_svm.json", "06_svm_mask.pgm"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert a.metrics == b.metrics


def test_worker_count_small(tmp_path):
    src = write_phantom(tmp_path, replace(SMALL, seed=3))
    cfg = PipelineConfig(patch=5, epochs=200)
    a = run_pipeline(src, cfg, tmp_path / "w1", workers=1)
    b = run_pipeline(src, cfg, tmp_path / "w3", workers=3)
    assert a.to_json(include_timings=False) == b.to_json(include_timings=False)
    for rel in a.artifacts.values():
        assert (tmp_path / "w1" / rel).read_bytes() == (tmp_path / "w3" / rel).read_bytes()
