"""Order-m symmetric tensors with canonical-orbit sparse storage.

Conventions, fixed once for the whole package:
  * vertex indices are 0-based, in range(n);
  * the canonical form of a multi-index is its ascending sorted tuple;
  * a stored orbit value is the common value of all n^m positions in the
    permutation orbit of the canonical index; unset orbits read as 0;
  * only orders m in {2, 6} are supported.
"""
from __future__ import annotations

import json
import math
from collections import Counter
from enum import Enum

import numpy as np

from . import _kernels

SUPPORTED_ORDERS = (2, 6)


class TensorShapeError(ValueError):
    """Mismatched order/dimension, unsupported order, or bad index."""


class IndexClass(Enum):
    EVEN_REPEAT = "even-repeat"  # every index value occurs an even number of times
    ODD_REPEAT = "odd-repeat"  # some repeat, but not all multiplicities even
    ALL_DISTINCT = "all-distinct"


def check_order(m: int) -> None:
    if m not in SUPPORTED_ORDERS:
        raise TensorShapeError(
            f"order m={m} not supported: the edge-energy construction only "
            f"closes for m in {SUPPORTED_ORDERS} at this scale"
        )


def canonical_index(idx) -> tuple:
    return tuple(sorted(int(i) for i in idx))


def validate_index(idx, n: int, m: int) -> tuple:
    idx = tuple(int(i) for i in idx)
    if len(idx) != m:
        raise TensorShapeError(f"multi-index {idx} has length {len(idx)}, expected {m}")
    for i in idx:
        if not 0 <= i < n:
            raise TensorShapeError(f"index entry {i} out of range [0, {n})")
    return idx


def classify_index(idx, n: int, m: int) -> IndexClass:
    idx = validate_index(idx, n, m)
    counts = Counter(idx)
    if all(c % 2 == 0 for c in counts.values()):
        return IndexClass.EVEN_REPEAT
    if any(c > 1 for c in counts.values()):
        return IndexClass.ODD_REPEAT
    return IndexClass.ALL_DISTINCT


def orbit_size(idx) -> int:
    """Number of distinct positions in the permutation orbit of idx."""
    counts = Counter(idx)
    size = math.factorial(len(idx))
    for c in counts.values():
        size //= math.factorial(c)
    return size


class SymmetricTensor:
    """Sparse symmetric tensor keyed by canonical (sorted) multi-indices."""

    __slots__ = ("m", "n", "_entries", "_rows_cache")

    def __init__(self, m: int, n: int, entries=None):
        check_order(m)
        if n < 1:
            raise TensorShapeError(f"dimension n={n} must be positive")
        self.m = m
        self.n = n
        self._entries: dict[tuple, float] = {}
        self._rows_cache = None
        if entries:
            for idx, value in dict(entries).items():
                self.set(idx, value)

    def set(self, idx, value: float) -> None:
        idx = canonical_index(validate_index(idx, self.n, self.m))
        self._rows_cache = None
        if value == 0.0:
            self._entries.pop(idx, None)
        else:
            self._entries[idx] = float(value)

    def add(self, idx, value: float) -> None:
        idx = canonical_index(validate_index(idx, self.n, self.m))
        self.set(idx, self._entries.get(idx, 0.0) + value)

    def get(self, idx) -> float:
        idx = canonical_index(validate_index(idx, self.n, self.m))
        return self._entries.get(idx, 0.0)

    __getitem__ = get

    @property
    def entries(self) -> dict[tuple, float]:
        return dict(self._entries)

    @property
    def nnz_orbits(self) -> int:
        return len(self._entries)

    def same_shape(self, other: "SymmetricTensor") -> None:
        if self.m != other.m or self.n != other.n:
            raise TensorShapeError(
                f"shape mismatch: (m={self.m}, n={self.n}) vs (m={other.m}, n={other.n})"
            )

    def _rows(self):
        """(R, m) int64 canonical index rows and orbit-weighted values."""
        if self._rows_cache is None:
            if self._entries:
                keys = sorted(self._entries)
                idx = np.array(keys, dtype=np.int64)
                vals = np.array([self._entries[k] for k in keys])
                weights = vals * np.array([orbit_size(k) for k in keys], dtype=float)
            else:
                idx = np.zeros((0, self.m), dtype=np.int64)
                vals = np.zeros(0)
                weights = np.zeros(0)
            self._rows_cache = (np.ascontiguousarray(idx), vals, weights)
        return self._rows_cache

    def inner_product(self, other: "SymmetricTensor") -> float:
        self.same_shape(other)
        a, b = self._entries, other._entries
        if len(b) < len(a):
            a, b = b, a
        total = 0.0
        for idx, value in a.items():
            ov = b.get(idx)
            if ov is not None:
                total += orbit_size(idx) * value * ov
        return total

    def frobenius_norm(self) -> float:
        return math.sqrt(self.inner_product(self))

    def form(self, v) -> float:
        """Outer-power form <T, v^(x)m> evaluated per orbit."""
        v = self._check_vector(v)
        idx, _, weights = self._rows()
        return float(np.dot(weights, _kernels.row_products(idx, v)))

    def form_gradient(self, v) -> np.ndarray:
        """Gradient of the outer-power form with respect to v."""
        v = self._check_vector(v)
        idx, _, weights = self._rows()
        return _kernels.row_grad_accumulate(idx, np.ascontiguousarray(weights), v)

    def scaled(self, alpha: float) -> "SymmetricTensor":
        return SymmetricTensor(
            self.m, self.n, {k: alpha * v for k, v in self._entries.items()}
        )

    def subtract(self, other: "SymmetricTensor") -> "SymmetricTensor":
        self.same_shape(other)
        out = SymmetricTensor(self.m, self.n, self._entries)
        for idx, value in other._entries.items():
            out.add(idx, -value)
        return out

    def _check_vector(self, v) -> np.ndarray:
        v = np.ascontiguousarray(v, dtype=float)
        if v.shape != (self.n,):
            raise TensorShapeError(f"vector shape {v.shape} != ({self.n},)")
        return v

    def to_json_dict(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "entries": [[list(idx), value] for idx, value in sorted(self._entries.items())],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "SymmetricTensor":
        tensor = cls(int(obj["m"]), int(obj["n"]))
        seen = set()
        for raw_idx, value in obj["entries"]:
            idx = validate_index(raw_idx, tensor.n, tensor.m)
            if list(idx) != sorted(idx):
                raise TensorShapeError(f"non-canonical index {list(raw_idx)} in tensor JSON")
            if idx in seen:
                raise TensorShapeError(f"duplicate orbit {list(raw_idx)} in tensor JSON")
            seen.add(idx)
            tensor.set(idx, float(value))
        return tensor

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def loads(cls, text: str) -> "SymmetricTensor":
        return cls.from_json_dict(json.loads(text))

    def __repr__(self):
        return f"SymmetricTensor(m={self.m}, n={self.n}, orbits={len(self._entries)})"


def inner_product(a: SymmetricTensor, b: SymmetricTensor) -> float:
    return a.inner_product(b)


def frobenius_norm(t: SymmetricTensor) -> float:
    return t.frobenius_norm()


def outer_power_form(t: SymmetricTensor, v) -> float:
    return t.form(v)


def outer_power_gradient(t: SymmetricTensor, v) -> np.ndarray:
    return t.form_gradient(v)


def rank_one(v, m: int) -> SymmetricTensor:
    """Symmetric tensor with entries v_{i1} ... v_{im} over all orbits."""
    check_order(m)
    v = np.asarray(v, dtype=float)
    n = v.shape[0]
    out = SymmetricTensor(m, n)
    import itertools

    support = np.flatnonzero(v)
    for idx in itertools.combinations_with_replacement(support.tolist(), m):
        out.set(idx, float(np.prod(v[list(idx)])))
    return out
