#!/usr/bin/env python3
"""Builds the benchmark CSVs the manifests under manifests/ expect.

mnist.csv   -- first 35,000 rows of the canonical MNIST training set,
               decoded from the gzipped idx files vendored under
               datasets/raw/ (columns: id, p0..p783, label).
house.csv   -- King County house-sales table (21,613 rows, 12 numeric
               features + price). Built from datasets/raw/kc_house_data.csv
               when that file is present; otherwise a deterministic synthetic
               stand-in with the same schema, row count and realistic value
               ranges is generated (see synth_house below). The synthetic
               fallback keeps the pipeline runnable on machines that cannot
               fetch the Kaggle file; swap in the real CSV and re-run with
               --force for the genuine data.

Uses only the Python standard library. Idempotent: existing outputs are kept
unless --force is given.
"""

import argparse
import csv
import gzip
import math
import random
import struct
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
RAW = ROOT / "datasets" / "raw"
OUT = ROOT / "datasets"

MNIST_ROWS = 35000


def read_idx_images(path: Path) -> list[bytes]:
    with gzip.open(path, "rb") as f:
        magic, count, rows, cols = struct.unpack(">IIII", f.read(16))
        if magic != 2051:
            raise SystemExit(f"{path}: bad idx image magic {magic}")
        size = rows * cols
        return [f.read(size) for _ in range(count)]


def read_idx_labels(path: Path) -> bytes:
    with gzip.open(path, "rb") as f:
        magic, count = struct.unpack(">II", f.read(8))
        if magic != 2049:
            raise SystemExit(f"{path}: bad idx label magic {magic}")
        return f.read(count)


def build_mnist(out_path: Path) -> None:
    images = read_idx_images(RAW / "train-images-idx3-ubyte.gz")
    labels = read_idx_labels(RAW / "train-labels-idx1-ubyte.gz")
    n = min(MNIST_ROWS, len(images))
    with open(out_path, "w", newline="") as f:
        f.write("id," + ",".join(f"p{i}" for i in range(784)) + ",label\n")
        for i in range(n):
            f.write(f"{i},")
            f.write(",".join(map(str, images[i])))
            f.write(f",{labels[i]}\n")
    print(f"wrote {out_path} ({n} rows)")


KC_FEATURES = [
    "bedrooms", "bathrooms", "sqft_living", "sqft_lot", "floors", "waterfront",
    "view", "condition", "grade", "sqft_above", "sqft_basement", "yr_built",
]


def build_house_from_kaggle(src: Path, out_path: Path) -> None:
    with open(src, newline="") as f:
        reader = csv.DictReader(f)
        rows = list(reader)
    with open(out_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["id"] + KC_FEATURES + ["price"])
        for i, row in enumerate(rows):
            writer.writerow([i] + [row[c] for c in KC_FEATURES] + [row["price"]])
    print(f"wrote {out_path} ({len(rows)} rows, from {src.name})")


def synth_house(out_path: Path, n: int = 21613, seed: int = 20240801) -> None:
    """Deterministic synthetic stand-in mirroring the kc_house_data schema.

    Feature distributions and the log-linear price model are tuned to the
    published summary statistics of the King County sales table so that
    scaling, autoencoder reconstruction and a linear downstream learner
    behave comparably to the real data.
    """
    rng = random.Random(seed)
    bedroom_choices = [1, 2, 3, 4, 5, 6, 7, 8]
    bedroom_weights = [0.02, 0.09, 0.45, 0.32, 0.10, 0.015, 0.004, 0.001]

    with open(out_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["id"] + KC_FEATURES + ["price"])
        for i in range(n):
            bedrooms = rng.choices(bedroom_choices, bedroom_weights)[0]
            bathrooms = max(0.75, min(5.0, round((0.75 + 0.45 * bedrooms + rng.gauss(0, 0.5)) * 4) / 4))
            sqft_living = int(min(9000, max(370, math.exp(
                6.55 + 0.16 * bedrooms + 0.10 * bathrooms + rng.gauss(0, 0.28)))))
            sqft_lot = int(min(1_600_000, max(520, math.exp(rng.gauss(8.95, 0.82)))))
            yr_built = min(2015, 1900 + int(115 * rng.betavariate(1.7, 1.0)))
            floors = rng.choices([1.0, 1.5, 2.0, 2.5, 3.0],
                                 [0.45, 0.10, 0.38, 0.04, 0.03])[0]
            if yr_built > 1990 and floors == 1.0 and rng.random() < 0.5:
                floors = 2.0
            waterfront = 1 if rng.random() < 0.0075 else 0
            if waterfront:
                view = rng.choices([2, 3, 4], [0.1, 0.2, 0.7])[0]
            else:
                view = rng.choices([0, 1, 2, 3, 4], [0.90, 0.015, 0.045, 0.025, 0.015])[0]
            condition = rng.choices([1, 2, 3, 4, 5], [0.01, 0.008, 0.65, 0.26, 0.072])[0]
            grade = int(min(13, max(3, round(4.3 + 0.45 * math.log(sqft_living)
                                             + 0.35 * bathrooms + rng.gauss(0, 0.85)))))
            if rng.random() < 0.61:
                sqft_above = sqft_living
            else:
                sqft_above = int(sqft_living * rng.uniform(0.5, 0.95))
            sqft_basement = sqft_living - sqft_above

            log_price = (
                5.95
                + 0.405 * math.log(sqft_living)
                + 0.158 * grade
                + 0.540 * waterfront
                + 0.052 * view
                + 0.058 * condition
                + 0.045 * floors
                - 0.0022 * (yr_built - 1900)
                + 0.014 * math.log(sqft_lot)
                + rng.gauss(0, 0.255)
            )
            price = int(max(75000, min(7_700_000, math.exp(log_price))))
            writer.writerow([i, bedrooms, bathrooms, sqft_living, sqft_lot, floors,
                             waterfront, view, condition, grade, sqft_above,
                             sqft_basement, yr_built, price])
    print(f"wrote {out_path} ({n} rows, synthetic)")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--force", action="store_true", help="rebuild even if outputs exist")
    args = parser.parse_args()

    OUT.mkdir(parents=True, exist_ok=True)

    mnist_csv = OUT / "mnist.csv"
    if args.force or not mnist_csv.exists():
        build_mnist(mnist_csv)
    else:
        print(f"{mnist_csv} already present")

    house_csv = OUT / "house.csv"
    if args.force or not house_csv.exists():
        kaggle = RAW / "kc_house_data.csv"
        if kaggle.exists():
            build_house_from_kaggle(kaggle, house_csv)
        else:
            synth_house(house_csv)
    else:
        print(f"{house_csv} already present")
    return 0


if __name__ == "__main__":
    sys.exit(main())
