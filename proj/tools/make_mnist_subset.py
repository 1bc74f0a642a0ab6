#!/usr/bin/env python3
# Copyright 2026 The ReduNet-CPP Authors
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
"""Writes an IDX-format MNIST subset from the 5000-sample CSV bundled in mlxtend.

Usage: make_mnist_subset.py <mlxtend wheel or mnist_5k.csv.gz> <out dir> [per_class]

The source CSV is sorted by label, so the first per_class rows of every digit
are kept and interleaved round-robin (0,1,...,9,0,1,...).
"""
import gzip
import os
import struct
import sys
import zipfile


def load_rows(src):
    if src.endswith(".whl"):
        with zipfile.ZipFile(src) as z:
            raw = z.read("mlxtend/data/data/mnist_5k.csv.gz")
    else:
        with open(src, "rb") as f:
            raw = f.read()
    text = gzip.decompress(raw).decode()
    return [list(map(int, map(float, line.split(",")))) for line in text.splitlines()]


def main():
    src, out = sys.argv[1], sys.argv[2]
    per_class = int(sys.argv[3]) if len(sys.argv) > 3 else 200
    by_label = {}
    for r in load_rows(src):
        by_label.setdefault(r[784], []).append(r)
    rows = [by_label[d][i] for i in range(per_class) for d in sorted(by_label)]
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "images-idx3-ubyte"), "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(rows), 28, 28))
        for r in rows:
            f.write(bytes(r[:784]))
    with open(os.path.join(out, "labels-idx1-ubyte"), "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(rows)))
        f.write(bytes(r[784] for r in rows))


if __name__ == "__main__":
    main()
