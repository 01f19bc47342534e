#!/usr/bin/env python3
"""Rebuild data/mnist-subset.tar.gz from the npm `mnist` package.

The package ships 10,000 MNIST digits as per-class JSON arrays of pixel
values rounded to three decimals; rounding back to bytes is exact. Each
class is split 80/20 into train/test, then both sets are shuffled with a
fixed seed and written as standard IDX files.

    npm pack mnist@1.1.0 && tar xzf mnist-1.1.0.tgz
    python3 tools/mnist_subset_from_npm.py package data/mnist-subset.tar.gz
"""
import argparse
import io
import json
import struct
import tarfile
from pathlib import Path

import numpy as np


def idx_images(images):
    n, h, w = images.shape
    return struct.pack(">IIII", 0x00000803, n, h, w) + images.astype(np.uint8).tobytes()


def idx_labels(labels):
    return struct.pack(">II", 0x00000801, len(labels)) + labels.astype(np.uint8).tobytes()


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("package_dir", type=Path)
    ap.add_argument("out", type=Path)
    ap.add_argument("--test-fraction", type=float, default=0.2)
    ap.add_argument("--seed", type=int, default=20201)
    args = ap.parse_args()

    train_x, train_y, test_x, test_y = [], [], [], []
    for digit in range(10):
        raw = json.loads((args.package_dir / "src" / "digits" / f"{digit}.json").read_text())["data"]
        pix = np.rint(np.asarray(raw, dtype=np.float64) * 255.0).reshape(-1, 28, 28)
        n_test = int(round(len(pix) * args.test_fraction))
        train_x.append(pix[:-n_test])
        test_x.append(pix[-n_test:])
        train_y.append(np.full(len(pix) - n_test, digit))
        test_y.append(np.full(n_test, digit))

    rng = np.random.default_rng(args.seed)
    files = {}
    for prefix, xs, ys in (("train", train_x, train_y), ("t10k", test_x, test_y)):
        x = np.concatenate(xs)
        y = np.concatenate(ys)
        order = rng.permutation(len(y))
        files[f"{prefix}-images-idx3-ubyte"] = idx_images(x[order])
        files[f"{prefix}-labels-idx1-ubyte"] = idx_labels(y[order])

    with tarfile.open(args.out, "w:gz") as tar:
        for name, blob in sorted(files.items()):
            info = tarfile.TarInfo(name)
            info.size = len(blob)
            info.mtime = 0
            tar.addfile(info, io.BytesIO(blob))


if __name__ == "__main__":
    main()
