#!/usr/bin/env python3
# Copyright 2026 The leaklab Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Builds an IDX-format MNIST subset from the 10k digits bundled in the npm
`mnist` package (https://github.com/cazala/mnist).

Usage: make_mnist_subset.py <unpacked npm package dir> <output dir>

Writes train-images-idx3-ubyte / train-labels-idx1-ubyte (8000 examples) and
t10k-images-idx3-ubyte / t10k-labels-idx1-ubyte (2000 examples).
"""
import json
import os
import random
import struct
import sys


def write_images(path, images):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        for img in images:
            f.write(bytes(img))


def write_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))


def main():
    src, out = sys.argv[1], sys.argv[2]
    samples = []
    for digit in range(10):
        with open(os.path.join(src, "src", "digits", f"{digit}.json")) as f:
            flat = json.load(f)["data"]
        for k in range(len(flat) // 784):
            px = flat[k * 784:(k + 1) * 784]
            samples.append(([min(255, max(0, round(v * 255))) for v in px], digit))
    random.Random(20210101).shuffle(samples)
    os.makedirs(out, exist_ok=True)
    train, test = samples[:8000], samples[8000:10000]
    write_images(os.path.join(out, "train-images-idx3-ubyte"), [s[0] for s in train])
    write_labels(os.path.join(out, "train-labels-idx1-ubyte"), [s[1] for s in train])
    write_images(os.path.join(out, "t10k-images-idx3-ubyte"), [s[0] for s in test])
    write_labels(os.path.join(out, "t10k-labels-idx1-ubyte"), [s[1] for s in test])
    print(f"wrote {len(train)} train / {len(test)} test examples to {out}")


if __name__ == "__main__":
    main()
