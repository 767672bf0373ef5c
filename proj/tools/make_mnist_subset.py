#!/usr/bin/env python3
# Copyright 2026 The airfl Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes a 2,000/1,000 MNIST train/test subset in IDX format.

Source: the 5,000-sample MNIST extract bundled with the mlxtend wheel
(mlxtend/data/data/mnist_5k.csv.gz). Rows are 784 pixels then the label.
"""

import argparse
import gzip
import io
import pathlib
import struct
import zipfile

import numpy as np


def write_idx(path, array, magic):
    with open(path, "wb") as f:
        f.write(struct.pack(">I", magic))
        for dim in array.shape:
            f.write(struct.pack(">I", dim))
        f.write(array.astype(np.uint8).tobytes())


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--wheel", required=True, help="path to mlxtend .whl")
    parser.add_argument("--out", default="data/mnist")
    parser.add_argument("--train", type=int, default=2000)
    parser.add_argument("--test", type=int, default=1000)
    args = parser.parse_args()

    with zipfile.ZipFile(args.wheel) as wheel:
        raw = gzip.decompress(wheel.read("mlxtend/data/data/mnist_5k.csv.gz"))
    table = np.loadtxt(io.BytesIO(raw), delimiter=",").astype(np.int64)
    images, labels = table[:, :-1], table[:, -1]

    rng = np.random.default_rng(20240501)
    order = rng.permutation(len(labels))
    train = order[: args.train]
    test = order[args.train : args.train + args.test]

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, idx in (("train", train), ("t10k", test)):
        write_idx(out / f"{name}-images-idx3-ubyte",
                  images[idx].reshape(-1, 28, 28), 0x00000803)
        write_idx(out / f"{name}-labels-idx1-ubyte", labels[idx], 0x00000801)
        print(name, len(idx), np.bincount(labels[idx], minlength=10))


if __name__ == "__main__":
    main()
