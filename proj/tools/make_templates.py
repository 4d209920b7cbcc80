#!/usr/bin/env python3
"""Writes the blocky 8-bit PGM templates used by the bundled scenarios."""

import random
import sys
from pathlib import Path

TEMPLATES = {"bracket": 11, "cover": 23, "label": 37, "harness": 41}
SIZE = 32
CELL = 4


def pattern(seed):
    rng = random.Random(seed)
    cells = SIZE // CELL
    levels = [[rng.choice((26, 230)) for _ in range(cells)] for _ in range(cells)]
    return bytes(levels[y // CELL][x // CELL] for y in range(SIZE) for x in range(SIZE))


def main(out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = []
    for name, seed in TEMPLATES.items():
        path = out / f"{name}.pgm"
        path.write_bytes(f"P5\n{SIZE} {SIZE}\n255\n".encode() + pattern(seed))
        lines.append(f"template {name} {path.name}")
    (out / "manifest.txt").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "scenarios/reference/templates")
