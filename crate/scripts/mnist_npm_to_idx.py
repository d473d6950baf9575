#!/usr/bin/env python3
"""Convert the digit JSON files shipped in the `mnist` npm package into IDX files.

Usage: mnist_npm_to_idx.py <package/src/digits> <out_dir> [per_digit] [seed]

The npm package stores each digit class as one flat list of 784-pixel images with
intensities in [0, 1] rounded to three decimals; they are mapped back to bytes by
round(v * 255).
"""
import json
import random
import struct
import sys
from pathlib import Path


def main():
    src = Path(sys.argv[1])
    out = Path(sys.argv[2])
    per_digit = int(sys.argv[3]) if len(sys.argv) > 3 else 250
    seed = int(sys.argv[4]) if len(sys.argv) > 4 else 20250513
    rng = random.Random(seed)

    samples = []
    for digit in range(10):
        flat = json.loads((src / f"{digit}.json").read_text())["data"]
        images = [flat[i:i + 784] for i in range(0, len(flat), 784)]
        for img in rng.sample(images, per_digit):
            pixels = bytes(min(255, max(0, round(v * 255))) for v in img)
            samples.append((digit, pixels))
    rng.shuffle(samples)

    out.mkdir(parents=True, exist_ok=True)
    with open(out / "images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x803, len(samples), 28, 28))
        for _, px in samples:
            f.write(px)
    with open(out / "labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x801, len(samples)))
        f.write(bytes(label for label, _ in samples))


if __name__ == "__main__":
    main()
