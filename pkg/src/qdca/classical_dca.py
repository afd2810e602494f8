"""Classical differential attack: exhaustive right-pair counting and argmax.

This is the ground-truth baseline the quantum pipeline is checked against.
Counting is exact and cheap at desk scale, so the memory-heavy variant
(one counter per candidate subkey) is used directly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .toy_cipher import Characteristic, PairSet, ToyCipher, right_pair_table


@dataclass(frozen=True)
class CountTable:
    """counts[x] = exact number of right pairs of candidate subkey x."""

    counts: np.ndarray
    subkey_bits: int

    def __post_init__(self):
        if len(self.counts) != 1 << self.subkey_bits:
            raise ValueError("count table size must be 2**subkey_bits")
        if np.any(self.counts < 0):
            raise ValueError("negative count")

    def winner(self) -> int:
        """Argmax candidate; ties break toward the smallest subkey value."""
        return int(np.argmax(self.counts))

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            fh.write("# schema=counts-table-v1\n")
            w.writerow(["subkey_hex", "count"])
            for x, c in enumerate(self.counts):
                w.writerow([f"{x:02x}", int(c)])


def count_right_pairs(x: int, pairs: PairSet, cipher: ToyCipher,
                      ch: Characteristic) -> int:
    """Exact number of pairs j < N with e(x, j) = 1."""
    if not pairs.entries:
        return 0
    table = right_pair_table(cipher, ch, x, pairs)
    return int(table[:pairs.num_pairs].sum())


def count_table(pairs: PairSet, cipher: ToyCipher, ch: Characteristic) -> CountTable:
    k = ch.subkey_bits
    counts = np.array([count_right_pairs(x, pairs, cipher, ch) for x in range(1 << k)],
                      dtype=np.int64)
    return CountTable(counts, k)


def classical_attack(pairs: PairSet, cipher: ToyCipher,
                     ch: Characteristic) -> tuple[int, CountTable]:
    """Count right pairs for every candidate subkey; most right pairs wins."""
    table = count_table(pairs, cipher, ch)
    return table.winner(), table
