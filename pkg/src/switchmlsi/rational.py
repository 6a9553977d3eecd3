"""Exact rationals stored as integer numerator arrays over one shared denominator.

Arrays are ``int64`` whenever every value provably fits, and fall back to
``object`` arrays of Python ints otherwise, so arithmetic never wraps.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import reduce
from typing import Iterable

import numpy as np

_LIMIT = 2**62


def _maxabs(a: np.ndarray) -> int:
    if a.size == 0:
        return 0
    if a.dtype == object:
        return max(abs(int(x)) for x in a)
    return int(np.abs(a).max())


def int_array(values) -> np.ndarray:
    """Integer array, ``int64`` when safe and ``object`` otherwise."""
    if isinstance(values, np.ndarray) and values.dtype.kind in "iu":
        out = values.astype(np.int64, copy=False)
        return out
    vals = [int(v) for v in values]
    if all(-_LIMIT < v < _LIMIT for v in vals):
        return np.asarray(vals, dtype=np.int64)
    out = np.empty(len(vals), dtype=object)
    out[:] = vals
    return out


def _obj(a: np.ndarray) -> np.ndarray:
    return a if a.dtype == object else a.astype(object)


def mul(a: np.ndarray, b) -> np.ndarray:
    """Elementwise product without overflow."""
    a = np.asarray(a)
    if np.isscalar(b) or isinstance(b, int):
        bmax = abs(int(b))
        if a.dtype != object and _maxabs(a) * max(bmax, 1) < _LIMIT:
            return a * np.int64(int(b))
        return _obj(a) * int(b)
    b = np.asarray(b)
    if a.dtype != object and b.dtype != object and _maxabs(a) * max(_maxabs(b), 1) < _LIMIT:
        return a * b
    return _obj(a) * _obj(b)


def total(a: np.ndarray) -> int:
    """Exact sum as a Python int."""
    if a.size == 0:
        return 0
    if a.dtype != object and _maxabs(a) * a.size < _LIMIT:
        return int(a.sum())
    return int(sum(int(x) for x in a))


def group_sum(keys: np.ndarray, nums: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sum ``nums`` over equal ``keys``; returns sorted unique keys and exact sums."""
    if keys.size == 0:
        return keys.copy(), nums.copy()
    order = np.argsort(keys, kind="stable")
    k = keys[order]
    v = nums[order]
    starts = np.flatnonzero(np.r_[True, k[1:] != k[:-1]])
    if v.dtype != object and _maxabs(v) * v.size < _LIMIT:
        sums = np.add.reduceat(v, starts)
    else:
        sums = np.add.reduceat(_obj(v), starts)
    return k[starts], sums


def lcm_all(values: Iterable[int]) -> int:
    return reduce(lambda x, y: x * y // math.gcd(x, y), (int(v) for v in values), 1)


def from_fractions(values: Iterable) -> tuple[np.ndarray, int]:
    """Numerators over the least common denominator."""
    fr = [Fraction(v) for v in values]
    den = lcm_all(f.denominator for f in fr)
    return int_array([f.numerator * (den // f.denominator) for f in fr]), den


def reduced(nums: np.ndarray, den: int) -> tuple[np.ndarray, int]:
    """Divide numerators and denominator by their common gcd."""
    if nums.size == 0:
        return nums, den
    if nums.dtype == object:
        g = reduce(math.gcd, (int(x) for x in nums), int(den))
    else:
        g = math.gcd(int(np.gcd.reduce(np.abs(nums))), int(den))
    if g > 1:
        nums = nums // g
        den //= g
    if nums.dtype == object and _maxabs(nums) < _LIMIT:
        nums = nums.astype(np.int64)
    return nums, den


def rescale(nums: np.ndarray, den: int, new_den: int) -> np.ndarray:
    """Express ``nums/den`` over ``new_den`` (which must be a multiple of ``den``)."""
    if new_den % den:
        raise ValueError("new denominator must be a multiple of the old one")
    return mul(nums, new_den // den)


def to_float(nums: np.ndarray, den: int) -> np.ndarray:
    if nums.dtype == object:
        return np.array([float(Fraction(int(x), den)) for x in nums])
    return nums.astype(float) / float(den)


def frac_str(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_frac(s) -> Fraction:
    return Fraction(s)
