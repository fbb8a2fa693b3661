#!/usr/bin/env python3
# Copyright 2026 The Milestone RL Authors.
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

"""Independent threshold-sweep oracle for the bundled labeled-pair fixture.

Works on exact integer bucket counts: cos = dot / sqrt(|a|^2 |b|^2). Fails if
any pair sits within MARGIN of a swept threshold, since float round-off could
then flip a prediction. Prints the rows frozen into the C++ tests.

usage: calibration_oracle.py fixtures/calibration_pairs.jsonl
"""

import json
import math
import re
import sys
from collections import Counter
from fractions import Fraction

DIM = 256
MARGIN = 1e-6
GRID = [round(0.55 + 0.05 * i, 9) for i in range(9)] + [0.5, 0.999]


def tokens(text):
    text = re.sub(r"<[^<>]*>", " ", text)
    return [t.lower() for t in re.split(r"[^A-Za-z0-9]+", text) if t]


def fnv1a64(s):
    h = 0xCBF29CE484222325
    for b in s.encode():
        h ^= b
        h = (h * 0x100000001B3) % (1 << 64)
    return h


def buckets(text):
    return Counter(fnv1a64(t) % DIM for t in tokens(text))


def cosine(a, b):
    na = sum(v * v for v in a.values())
    nb = sum(v * v for v in b.values())
    if na == 0 or nb == 0:
        return 0.0
    dot = sum(v * b.get(k, 0) for k, v in a.items())
    return dot / math.sqrt(na * nb)


def main(path):
    pairs = [json.loads(line) for line in open(path) if line.strip()]
    sims = [cosine(buckets(p["milestone"]), buckets(p["action"])) for p in pairs]
    for p, s in zip(pairs, sims):
        assert s < 1.0 - MARGIN, f"identical pair: {p}"
        for d in GRID:
            assert abs(s - d) > MARGIN, f"pair too close to {d}: {p} ({s})"
    for d in sorted(GRID):
        tp = sum(1 for p, s in zip(pairs, sims) if s > d and p["label"] == "matched")
        tn = sum(1 for p, s in zip(pairs, sims) if s <= d and p["label"] == "unmatched")
        fp = sum(1 for p, s in zip(pairs, sims) if s > d and p["label"] == "unmatched")
        fn = sum(1 for p, s in zip(pairs, sims) if s <= d and p["label"] == "matched")
        acc = Fraction(tp + tn, len(pairs))
        print(f"{{{d}, {tp}, {tn}, {fp}, {fn}}},  // accuracy {float(acc)}")


if __name__ == "__main__":
    main(sys.argv[1])
