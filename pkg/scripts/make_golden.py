"""Regenerate the small golden samples under tests/golden/ (one per file format)."""
import argparse
from pathlib import Path

from octseg.cli import main as cli

GOLDEN = Path(__file__).resolve().parent.parent / "tests" / "golden"
PHANTOM = ["--n-angles", "16", "--n-radii", "12", "--lumen-radius-base", "4", "--wall-thickness", "4",
           "--shadow-center-col", "5", "--shadow-width", "2", "--seed", "1"]


def generate(out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    p = lambda name: str(out / name)
    steps = [
        ["phantom", "--out", p("phantom.pgm"), "--truth", p("truth.pgm"), "--sidecar", p("phantom.json"), *PHANTOM],
        ["segment", "--input", p("phantom.pgm"), "--output", p("kmeans_mask.pgm"), "--trace", p("kmeans_trace.csv")],
        ["features", "--image", p("phantom.pgm"), "--mask", p("truth.pgm"), "--output", p("features.csv"),
         "--patch", "3", "--histograms", p("histograms.csv"), "--bins", "4", "--pca", p("pca.csv")],
        ["train", "--features", p("features.csv"), "--model", "logreg", "--output", p("model_logreg.json"),
         "--patch", "3", "--epochs", "50", "--metrics", p("metrics.json")],
    ]
    for argv in steps:
        if cli(argv) != 0:
            raise SystemExit(f"failed: {' '.join(argv)}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=GOLDEN)
    generate(ap.parse_args().out)
