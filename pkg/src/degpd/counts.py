"""Validated count samples stored as frequency tables."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import DomainError, UsageError


@dataclass(frozen=True, eq=False)
class CountSample:
    """Non-negative integer observations as a sorted frequency table.

    ``values`` holds the distinct observed counts in increasing order and
    ``counts`` their multiplicities. Every operation downstream (likelihood,
    KS distance, resampling) works on this table, which makes results
    independent of the order observations arrived in.
    """

    values: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.int64)
        c = np.asarray(self.counts, dtype=np.int64)
        if v.ndim != 1 or v.shape != c.shape:
            raise DomainError("values and counts must be 1-d arrays of equal length")
        if v.size and (np.any(v < 0) or np.any(np.diff(v) <= 0)):
            raise DomainError("values must be distinct, sorted and non-negative")
        if np.any(c <= 0):
            raise DomainError("multiplicities must be positive")
        v.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "counts", c)

    @classmethod
    def from_observations(cls, obs: Iterable[int]) -> "CountSample":
        arr = np.asarray(list(obs) if not isinstance(obs, np.ndarray) else obs)
        if arr.size == 0:
            return cls(np.empty(0, np.int64), np.empty(0, np.int64))
        if arr.dtype.kind == "f":
            if np.any(~np.isfinite(arr)) or np.any(arr != np.floor(arr)):
                raise DomainError("observations must be integers")
        elif arr.dtype.kind not in "iu":
            raise DomainError("observations must be integers")
        if np.any(arr < 0):
            raise DomainError("observations must be non-negative")
        vals, cnts = np.unique(arr.astype(np.int64), return_counts=True)
        return cls(vals, cnts)

    @classmethod
    def from_table(cls, table: Mapping[int, int] | Iterable[tuple[int, int]]) -> "CountSample":
        items = table.items() if isinstance(table, Mapping) else table
        acc: dict[int, int] = {}
        for value, count in items:
            if int(value) != value or int(count) != count:
                raise DomainError("table entries must be integers")
            if count < 0:
                raise DomainError("multiplicities must be non-negative")
            if count:
                acc[int(value)] = acc.get(int(value), 0) + int(count)
        keys = sorted(acc)
        return cls(np.array(keys, dtype=np.int64), np.array([acc[k] for k in keys], dtype=np.int64))

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    def __len__(self) -> int:
        return self.n

    def require_nonempty(self) -> "CountSample":
        if self.n == 0:
            raise UsageError("count sample is empty")
        return self

    def observations(self) -> np.ndarray:
        """Expanded observations in increasing order."""
        return np.repeat(self.values, self.counts)

    def as_dict(self) -> dict[int, int]:
        return {int(v): int(c) for v, c in zip(self.values, self.counts)}

    @property
    def zero_fraction(self) -> float:
        if self.n == 0:
            return 0.0
        return float(self.counts[0]) / self.n if self.values[0] == 0 else 0.0

    def exceedances(self, threshold: int) -> "CountSample":
        """Excesses ``y - threshold`` of observations ``y >= threshold``."""
        if int(threshold) != threshold or threshold < 0:
            raise DomainError("threshold must be a non-negative integer")
        keep = self.values >= threshold
        return CountSample(self.values[keep] - int(threshold), self.counts[keep])

    def resample(self, rng: np.random.Generator, n: int | None = None) -> "CountSample":
        """Draw ``n`` observations with replacement (default: the sample size)."""
        n = self.n if n is None else n
        draws = rng.multinomial(n, self.counts / self.n)
        keep = draws > 0
        return CountSample(self.values[keep], draws[keep])

    def fingerprint(self) -> str:
        h = hashlib.sha1()
        h.update(self.values.tobytes())
        h.update(self.counts.tobytes())
        return h.hexdigest()[:16]

    def __repr__(self) -> str:
        return f"CountSample(n={self.n}, distinct={self.values.size})"
