# ** -- coding: utf-8 -- **
# !/usr/bin/env python
#
# Copyright (c) 2021 python-compada authors
#
# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in
# all copies or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN
# THE SOFTWARE.
#

"""
Walsh-Hadamard kernels and the subsampled randomized Hadamard transform (SRHT).

All kernels compute the UNNORMALIZED transform (entries +1/-1, natural/Sylvester order):

    H_1 = [1],  H_2n = [[H_n, H_n], [H_n, -H_n]]

The orthogonal H = H_unnorm / sqrt(n) only shows up in SketchOperator, whose scale constant
folds the 1/sqrt(n) in. Lengths must be powers of two; callers pad.

    Pi       = sqrt(n / k) * R H Sigma     (Scaling.Scaled)
    Pi_tilde = R H Sigma                   (Scaling.Unscaled, Pi_tilde Pi_tilde^T = I)
    P        = Pi_tilde^T Pi_tilde,  P_perp = I - P

Every kernel takes an optional OpCounter which is charged with the number of
arithmetic operations (or component writes) it performs.
"""

__all__ = ['OpCounter', 'SparseVector', 'Scaling', 'SketchOperator',
           'wht_dense', 'wht_one_sparse', 'wht_sparse', 'wht_trimmed', 'hadamard_rows_column',
           'sketch_sample', 'apply_sketch', 'apply_sketch_adjoint', 'apply_projector', 'apply_complement',
           'dense_sketch']

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg

from compada import conf
from compada.util import CompError, as_vector, check_power_of_two


@dataclass
class OpCounter(object):
    """ counts arithmetic operations / component writes of the kernels """
    ops: int = 0

    def add(self, count):
        self.ops += int(count)

    def reset(self):
        self.ops = 0


def _charge(counter, count):
    if counter is not None:
        counter.add(count)


@dataclass(frozen=True)
class SparseVector(object):
    """ length-n vector stored as strictly increasing indices and nonzero values """
    n: int
    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        check_power_of_two(self.n, 'sparse vector length')
        idx = np.asarray(self.indices, dtype=np.int64)
        val = np.asarray(self.values, dtype=np.float64)
        if idx.shape != val.shape or idx.ndim != 1:
            raise CompError('format', 'indices and values must be 1-d of equal length')
        if idx.size and (idx[0] < 0 or idx[-1] >= self.n or np.any(np.diff(idx) <= 0)):
            raise CompError('format', 'indices must be strictly increasing and in [0, %d)' % self.n)
        keep = val != 0.0
        object.__setattr__(self, 'indices', idx[keep])
        object.__setattr__(self, 'values', val[keep])

    @classmethod
    def from_pairs(cls, n, pairs) -> 'SparseVector':
        pairs = sorted(pairs)
        return cls(n, np.array([p[0] for p in pairs], dtype=np.int64),
                   np.array([p[1] for p in pairs], dtype=np.float64))

    @classmethod
    def from_dense(cls, v) -> 'SparseVector':
        a = np.asarray(v, dtype=np.float64)
        idx = np.flatnonzero(a)
        return cls(a.shape[0], idx, a[idx])

    @property
    def nnz(self):
        return int(self.indices.shape[0])

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.n)
        out[self.indices] = self.values
        return out


# -----------------------------------------------------------
#    kernels
# -----------------------------------------------------------
def _butterfly(a, counter=None) -> np.ndarray:
    """ in-place unnormalized WHT of the float64 array @a """
    n = a.shape[0]
    h = 1
    while h < n:
        blocks = a.reshape(-1, 2, h)
        top = blocks[:, 0, :] + blocks[:, 1, :]
        bottom = blocks[:, 0, :] - blocks[:, 1, :]
        blocks[:, 0, :] = top
        blocks[:, 1, :] = bottom
        h *= 2
    if n > 1:
        _charge(counter, n * int(math.log2(n)))
    return a


def wht_dense(v, counter=None) -> np.ndarray:
    """ H_unnorm v by the butterfly recursion, O(n log n) """
    a = np.array(v, dtype=np.float64)
    if a.ndim != 1:
        raise CompError('dimension_mismatch', 'wht_dense expects a 1-d vector, got shape %s' % (a.shape,))
    check_power_of_two(a.shape[0])
    return _butterfly(a, counter)


def wht_one_sparse(n, i, value=1.0, counter=None) -> np.ndarray:
    """ value * (column i of H_unnorm) in O(n).

    r[0] = value, then the doubling loop copies r[0:m] (negated when the current low
    bit of i is set) into r[m:2m] for m = 1, 2, ..., n/2: n - 1 component writes in total.
    """
    check_power_of_two(n)
    if not 0 <= i < n:
        raise CompError('index_out_of_range', 'index %s not in [0, %d)' % (i, n))
    r = np.zeros(n)
    r[0] = value
    bits = int(i)
    m = 1
    while m < n:
        if bits & 1:
            np.negative(r[:m], out=r[m:2 * m])
        else:
            r[m:2 * m] = r[:m]
        _charge(counter, m)
        bits >>= 1
        m *= 2
    return r


def hadamard_rows_column(n, i, rows) -> np.ndarray:
    """ (R H_unnorm e_i): the entries (-1)^popcount(row & i) of column i at @rows, O(k log n) """
    check_power_of_two(n)
    if not 0 <= i < n:
        raise CompError('index_out_of_range', 'index %s not in [0, %d)' % (i, n))
    masked = np.asarray(rows, dtype=np.int64) & int(i)
    parity = np.zeros(masked.shape, dtype=np.int64)
    while np.any(masked):
        parity ^= masked & 1
        masked = masked >> 1
    return 1.0 - 2.0 * parity


def _sparse_wht(idx, val, n, counter):
    nnz = idx.shape[0]
    if nnz == 0:
        return np.zeros(n)
    if nnz == 1:
        return wht_one_sparse(n, int(idx[0]), float(val[0]), counter)
    if 2 * nnz >= n:
        dense = np.zeros(n)
        dense[idx] = val
        return _butterfly(dense, counter)

    half = n // 2
    split = int(np.searchsorted(idx, half))
    if split == nnz:
        # x_bot = 0: both halves are H_{n/2} x_top
        y = _sparse_wht(idx, val, half, counter)
        _charge(counter, half)
        return np.concatenate((y, y))
    if split == 0:
        # x_top = 0: [H x_bot; -H x_bot]
        y = _sparse_wht(idx - half, val, half, counter)
        _charge(counter, half)
        return np.concatenate((y, -y))

    top = _sparse_wht(idx[:split], val[:split], half, counter)
    bottom = _sparse_wht(idx[split:] - half, val[split:], half, counter)
    _charge(counter, n)
    return np.concatenate((top + bottom, top - bottom))


def wht_sparse(v, counter=None) -> np.ndarray:
    """ H_unnorm v for a SparseVector @v.

    Recursive halving on H_n x = [H_{n/2}(x_top + x_bot); H_{n/2}(x_top - x_bot)]; the half
    transforms are computed separately (by linearity) so that the support splits with the
    recursion. A zero half costs one copy ([y; y] or [y; -y]); 1-sparse pieces go to
    wht_one_sparse and pieces at least half full to the dense butterfly.
    """
    if not isinstance(v, SparseVector):
        raise CompError('format', 'wht_sparse expects a SparseVector')
    check_power_of_two(v.n)
    return _sparse_wht(v.indices, v.values, v.n, counter)


def _check_rows(rows, n) -> np.ndarray:
    r = np.asarray(rows, dtype=np.int64)
    if r.ndim != 1 or (r.size and (r[0] < 0 or r[-1] >= n or np.any(np.diff(r) <= 0))):
        raise CompError('format', 'rows must be a sorted subset of [0, %d)' % n)
    return r


def _trimmed(a, rows, counter):
    n = a.shape[0]
    k = rows.shape[0]
    if k == 0:
        return np.zeros(0)
    if k == n:
        return _butterfly(a.copy(), counter)
    half = n // 2
    split = int(np.searchsorted(rows, half))
    parts = []
    if split > 0:
        _charge(counter, half)
        parts.append(_trimmed(a[:half] + a[half:], rows[:split], counter))
    if split < k:
        _charge(counter, half)
        parts.append(_trimmed(a[:half] - a[half:], rows[split:] - half, counter))
    return np.concatenate(parts)


def wht_trimmed(v, rows, counter=None) -> np.ndarray:
    """ R H_unnorm v: only the output coordinates in @rows (sorted).

    Output-pruned recursion: subtrees whose output range holds no selected row are
    never computed, O(n log k).
    """
    a = np.asarray(v, dtype=np.float64)
    if a.ndim != 1:
        raise CompError('dimension_mismatch', 'wht_trimmed expects a 1-d vector, got shape %s' % (a.shape,))
    check_power_of_two(a.shape[0])
    return _trimmed(a, _check_rows(rows, a.shape[0]), counter)


# -----------------------------------------------------------
#    SRHT operator
# -----------------------------------------------------------
class Scaling(Enum):
    Scaled = 'Scaled'  # Pi = sqrt(n/k) R H Sigma
    Unscaled = 'Unscaled'  # Pi_tilde = R H Sigma


@dataclass(frozen=True)
class SketchOperator(object):
    """ a sampled SRHT. Immutable, may be shared between threads. """
    n: int
    k: int
    signs: np.ndarray  # diagonal of Sigma, +1/-1
    rows: np.ndarray  # sorted k-subset of range(n), the row selector R
    seed: int
    scaling: Scaling = Scaling.Scaled

    def __post_init__(self):
        check_power_of_two(self.n, 'ambient dimension n')
        if not 0 <= self.k <= self.n:
            raise CompError('invalid_k', 'k must be in [0, n], got k=%s, n=%s' % (self.k, self.n))
        signs = np.array(self.signs, dtype=np.float64)
        rows = _check_rows(self.rows, self.n).copy()
        if signs.shape != (self.n,) or not np.all(np.abs(signs) == 1.0):
            raise CompError('format', 'signs must be a length-n vector of +1/-1')
        if rows.shape[0] != self.k:
            raise CompError('format', 'rows must hold exactly k=%d entries' % self.k)
        signs.setflags(write=False)
        rows.setflags(write=False)
        object.__setattr__(self, 'signs', signs)
        object.__setattr__(self, 'rows', rows)

    @property
    def scale(self) -> float:
        """ c in Pi = c * Pi_tilde """
        if self.scaling == Scaling.Scaled and self.k > 0:
            return math.sqrt(self.n / self.k)
        return 1.0

    def __repr__(self):
        return f'<SketchOperator: n={self.n}, k={self.k}, seed={self.seed}, {self.scaling.value}>'


def sketch_sample(n, k, seed, scaling=Scaling.Scaled) -> SketchOperator:
    """ sample (Sigma, R) deterministically from @seed.

    Philox (counter based) stream: n Rademacher signs first, then a partial
    Fisher-Yates shuffle of range(n) whose first k slots give the rows (sorted).
    """
    check_power_of_two(n, 'ambient dimension n')
    if not 0 <= k <= n:
        raise CompError('invalid_k', 'k must be in [0, n], got k=%s, n=%s' % (k, n))
    rng = np.random.Generator(np.random.Philox(seed))
    signs = rng.integers(0, 2, size=n) * 2.0 - 1.0
    pool = np.arange(n, dtype=np.int64)
    for j in range(k):
        s = int(rng.integers(j, n))
        pool[j], pool[s] = pool[s], pool[j]
    rows = np.sort(pool[:k])
    return SketchOperator(n=n, k=k, signs=signs, rows=rows, seed=seed, scaling=Scaling(scaling))


def apply_sketch(S, v, unit=False, counter=None) -> np.ndarray:
    """ Pi v (length k). With @unit=True, Pi_tilde v whatever the scaling mode. """
    a = as_vector(v, S.n, 'sketch input')
    if S.k == 0:
        return np.zeros(0)
    c = (1.0 if unit else S.scale) / math.sqrt(S.n)
    return c * _trimmed(S.signs * a, S.rows, counter)


def apply_sketch_adjoint(S, z, unit=False, counter=None) -> np.ndarray:
    """ Pi^T z (length n): scatter z to the rows, sparse WHT, then Sigma. """
    z = as_vector(z, S.k, 'sketch adjoint input')
    if S.k == 0:
        return np.zeros(S.n)
    c = (1.0 if unit else S.scale) / math.sqrt(S.n)
    keep = z != 0.0
    return c * S.signs * _sparse_wht(S.rows[keep], z[keep], S.n, counter)


def apply_projector(S, v, counter=None) -> np.ndarray:
    """ P v = Pi_tilde^T Pi_tilde v; independent of the scaling mode """
    return apply_sketch_adjoint(S, apply_sketch(S, v, unit=True, counter=counter), unit=True, counter=counter)


def apply_complement(S, v, counter=None) -> np.ndarray:
    """ P_perp v = v - P v """
    a = as_vector(v, S.n, 'complement input')
    return a - apply_projector(S, a, counter)


def dense_sketch(S, unit=False) -> np.ndarray:
    """ materialized k x n matrix Pi (or Pi_tilde); small n only """
    if S.n > conf.g_dense_guard:
        raise CompError('dense_guard', 'n=%d exceeds the dense guard %d' % (S.n, conf.g_dense_guard))
    c = (1.0 if unit else S.scale) / math.sqrt(S.n)
    H = scipy.linalg.hadamard(S.n).astype(np.float64)
    return c * H[S.rows] * S.signs[np.newaxis, :]
