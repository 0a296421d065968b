"""Drop one feature at a time and report test accuracy of both classifiers on a phantom."""
import argparse
import tempfile
from pathlib import Path

from octseg.features import FEATURE_NAMES
from octseg.phantom import PhantomSpec, generate_phantom
from octseg.pipeline import PipelineConfig, run_pipeline
from octseg.raster import save_pgm


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--force-median", action=argparse.BooleanOptionalAction, default=True)
    args = ap.parse_args()

    root = Path(tempfile.mkdtemp(prefix="octseg-ablation-"))
    src = root / "phantom.pgm"
    save_pgm(generate_phantom(PhantomSpec(seed=args.seed))[0], src)
    print(f"{'dropped':>10} {'logreg':>8} {'svm':>8} {'agree':>8}")
    for drop in [None, *FEATURE_NAMES]:
        cfg = PipelineConfig(force_median=args.force_median, drop_features=[drop] if drop else [])
        rep = run_pipeline(src, cfg, root / (drop or "all"))
        print(f"{drop or '-':>10} {rep.metrics['logreg']['accuracy']:>8.4f} "
              f"{rep.metrics['svm']['accuracy']:>8.4f} {rep.mask_agreement:>8.4f}")


if __name__ == "__main__":
    main()
