"""Finitely supported complex sequences on the non-negative integers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import InvalidInputError, InvariantViolation


@dataclass(frozen=True, eq=False)
class FinSeq:
    """A sequence ``u`` on ``{0, 1, 2, ...}`` with ``u(0) = 0`` and finite support.

    Only the explicitly stored indices (all >= 1) can be non-zero.  Stored
    entries keep their order and explicit zeros so that a sequence read from
    a file can be written back unchanged.
    """

    indices: np.ndarray
    values: np.ndarray
    _dense: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).reshape(-1)
        val = np.asarray(self.values, dtype=complex).reshape(-1)
        if idx.shape != val.shape:
            raise InvalidInputError("indices and values differ in length")
        if idx.size:
            if idx.min() < 1:
                raise InvariantViolation("index 0 cannot be stored: u(0) = 0 always")
            if np.any(np.diff(idx) <= 0):
                raise InvariantViolation("indices must be strictly increasing")
        if not np.all(np.isfinite(val)):
            raise InvalidInputError("sequence values must be finite")
        idx.setflags(write=False)
        val.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)
        nz = idx[val != 0]
        top = int(nz[-1]) if nz.size else 0
        dense = np.zeros(top + 1, dtype=complex)
        keep = idx <= top
        dense[idx[keep]] = val[keep]
        dense.setflags(write=False)
        object.__setattr__(self, "_dense", dense)

    @classmethod
    def zero(cls) -> "FinSeq":
        return cls(np.zeros(0, np.int64), np.zeros(0, complex))

    @classmethod
    def from_mapping(cls, entries: Mapping[int, complex]) -> "FinSeq":
        keys = sorted(entries)
        return cls(np.array(keys, dtype=np.int64), np.array([entries[k] for k in keys], dtype=complex))

    @classmethod
    def from_entries(cls, rows: Iterable) -> "FinSeq":
        """Rows of ``(n, re, im)`` or ``(n, z)``; must be sorted by ``n``."""
        idx, val = [], []
        for row in rows:
            if len(row) == 3:
                n, re, im = row
                z = complex(float(re), float(im))
            else:
                n, z = row
                z = complex(z)
            idx.append(int(n))
            val.append(z)
        return cls(np.array(idx, dtype=np.int64), np.array(val, dtype=complex))

    @classmethod
    def from_array(cls, values, start: int = 1) -> "FinSeq":
        """``values[k]`` becomes ``u(start + k)``."""
        values = np.asarray(values, dtype=complex).reshape(-1)
        return cls(np.arange(start, start + values.size, dtype=np.int64), values)

    @property
    def max_support(self) -> int:
        """Largest index carrying a non-zero value (0 for the zero sequence)."""
        return self._dense.size - 1

    @property
    def horizon(self) -> int:
        """Truncation index ``max_support + 1``; every later summand vanishes."""
        return self.max_support + 1

    def is_zero(self) -> bool:
        return self.max_support == 0

    def is_real(self) -> bool:
        return bool(np.all(self.values.imag == 0))

    def __getitem__(self, n: int) -> complex:
        if n < 0:
            raise IndexError(n)
        return complex(self._dense[n]) if n < self._dense.size else 0j

    def dense(self, length: int | None = None) -> np.ndarray:
        """Values ``u(0), ..., u(length - 1)`` as a fresh complex array."""
        if length is None:
            length = self.horizon + 1
        out = np.zeros(length, dtype=complex)
        m = min(length, self._dense.size)
        out[:m] = self._dense[:m]
        return out

    def scaled(self, factor: complex) -> "FinSeq":
        return FinSeq(self.indices, self.values * factor)

    def entries(self):
        """Stored ``(n, re, im)`` rows in index order."""
        return [(int(n), float(z.real), float(z.imag)) for n, z in zip(self.indices, self.values)]

    def __eq__(self, other):
        if not isinstance(other, FinSeq):
            return NotImplemented
        return np.array_equal(self._dense, other._dense)

    def __repr__(self):
        return f"FinSeq(max_support={self.max_support}, stored={self.indices.size})"
