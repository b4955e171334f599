"""Sparse frequency tables of observed counts on {0, 1, 2, ...}."""
from __future__ import annotations

import numpy as np


class FrequencyTable:
    """Observed counts over a countable support, stored sparsely.

    Only support points with a strictly positive count are stored; an
    absent key means an empty cell (relative frequency zero).

    Parameters
    ----------
    counts : mapping of int -> int
        Support point to observed count. Counts must be positive,
        support points non-negative integers.
    n : int, optional
        Total count cross-check. Must equal the sum of counts when given.
    """

    __slots__ = ("_counts", "n", "support", "freqs", "rel_freqs")

    def __init__(self, counts, n=None):
        if not counts:
            raise ValueError("frequency table needs at least one cell")
        cleaned = {}
        for x, c in counts.items():
            xi, ci = int(x), int(c)
            if xi != x or ci != c:
                raise ValueError(f"non-integer cell ({x!r}: {c!r})")
            if xi < 0:
                raise ValueError(f"negative support point {xi}")
            if ci <= 0:
                raise ValueError(f"count for x={xi} must be positive, got {ci}")
            if xi in cleaned:
                raise ValueError(f"duplicate support point {xi}")
            cleaned[xi] = ci
        total = sum(cleaned.values())
        if n is not None and int(n) != total:
            raise ValueError(f"declared n={n} but counts sum to {total}")
        self._counts = dict(sorted(cleaned.items()))
        self.n = total
        self.support = np.fromiter(self._counts.keys(), dtype=np.int64)
        self.freqs = np.fromiter(self._counts.values(), dtype=np.int64)
        self.rel_freqs = self.freqs / float(total)

    @classmethod
    def from_samples(cls, values) -> "FrequencyTable":
        """Aggregate raw draws into a table."""
        xs, counts = np.unique(np.asarray(values, dtype=np.int64), return_counts=True)
        return cls(dict(zip(xs.tolist(), counts.tolist())))

    def count(self, x) -> int:
        return self._counts.get(int(x), 0)

    def rel_freq(self, x) -> float:
        return self._counts.get(int(x), 0) / self.n

    @property
    def max_x(self) -> int:
        return int(self.support[-1])

    @property
    def mean(self) -> float:
        return float(np.dot(self.support, self.freqs)) / self.n

    def items(self):
        return self._counts.items()

    def to_dict(self) -> dict:
        return dict(self._counts)

    def __len__(self):
        return len(self._counts)

    def __eq__(self, other):
        return isinstance(other, FrequencyTable) and self._counts == other._counts

    def __hash__(self):
        return hash(tuple(self._counts.items()))

    def __repr__(self):
        return f"FrequencyTable({self._counts!r})"
