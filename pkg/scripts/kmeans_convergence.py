"""Print K-means centroid and inertia traces on seeded phantoms, plus an iteration histogram."""
import argparse
from collections import Counter

from octseg.noise import median_filter
from octseg.phantom import PhantomSpec, generate_phantom
from octseg.segmentation import kmeans_segment


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=50)
    ap.add_argument("--median", action="store_true", help="median-filter each frame first")
    ap.add_argument("--show", type=int, default=3, help="print full traces for this many seeds")
    args = ap.parse_args()

    counts = Counter()
    for seed in range(args.seeds):
        img, _ = generate_phantom(PhantomSpec(seed=seed))
        if args.median:
            img = median_filter(img, 3)
        _, trace = kmeans_segment(img)
        counts[trace.iterations] += 1
        if seed < args.show:
            print(f"seed {seed}")
            for i, ((c0, c1), j) in enumerate(zip(trace.centroids_per_iter, trace.inertia_per_iter), 1):
                print(f"  iter {i}: centroids {c0:8.3f} {c1:8.3f}  inertia {j:.6g}")
    print("iterations histogram:", dict(sorted(counts.items())))


if __name__ == "__main__":
    main()
