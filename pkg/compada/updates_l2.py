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
Closed form composite update for phi(x) = (lam / 2) ||x||^2.

With g_eff = eta * g and lam_eff = eta * lam the update solves

    x_next = argmin_x  <g_eff, x> + lam_eff/2 ||x||^2 + 1/2 ||x - x_t||^2_A,
    A = Pi^T K Pi + P_perp D P_perp

which splits into two independent problems on range(P) and range(P_perp):

    parallel:       (c^2 K + lam_eff I) z = c^2 K Pi_tilde x_t - Pi_tilde g_eff,   x_par = Pi_tilde^T z
    perpendicular:  x_perp = B (y - Pi_tilde^T nu),   B = (D + lam_eff)^-1,
                    y = -P_perp g_eff + D P_perp x_t,
                    (Pi_tilde B Pi_tilde^T) nu = Pi_tilde B y

c is the scale of the sketch (Pi = c Pi_tilde). Nothing of size n x n is formed.
"""

__all__ = ['update_l2', 'solve_parallel', 'solve_perp', 'build_sketch_gram']

import numpy as np

from compada.adastate import regularizer_matrices
from compada.transforms import (apply_complement, apply_sketch, apply_sketch_adjoint, wht_one_sparse,
                                wht_trimmed)
from compada.util import CompError, as_vector, spd_solve


def build_sketch_gram(S, w, counter=None) -> np.ndarray:
    """ Pi_tilde diag(w) Pi_tilde^T (k x k) in O(k n log k).

    Entry (i, j) is (1/n) sum_l H[r_i, l] w_l H[r_j, l]; the signs cancel. Column j is the
    trimmed transform of w * (column r_j of H).
    """
    w = as_vector(w, S.n, 'gram weights')
    k = S.k
    M = np.empty((k, k))
    for j, r in enumerate(S.rows):
        column = wht_one_sparse(S.n, int(r), 1.0, counter)
        column *= w
        M[:, j] = wht_trimmed(column, S.rows, counter)
    M /= S.n
    return 0.5 * (M + M.T)


def solve_parallel(state, K, g_eff, lam_eff, counter=None) -> np.ndarray:
    S = state.sketch
    if S.k == 0:
        return np.zeros(S.n)
    c2 = S.scale ** 2
    px = apply_sketch(S, state.x, unit=True, counter=counter)
    pg = apply_sketch(S, g_eff, unit=True, counter=counter)
    M = c2 * K + lam_eff * np.eye(S.k)
    z = spd_solve(M, c2 * (K @ px) - pg, 'parallel system')
    return apply_sketch_adjoint(S, z, unit=True, counter=counter)


def solve_perp(state, D, g_eff, lam_eff, counter=None) -> np.ndarray:
    S = state.sketch
    if S.k == S.n:
        # P_perp = 0
        return np.zeros(S.n)
    denom = D + lam_eff
    if float(np.min(denom)) <= 0.0:
        raise CompError('singular_system', 'D + eta * lam must be positive on the complement',
                        {'min': float(np.min(denom))})
    y = -apply_complement(S, g_eff, counter) + D * apply_complement(S, state.x, counter)
    if S.k == 0:
        return y / denom
    b = 1.0 / denom
    M = build_sketch_gram(S, b, counter)
    nu = spd_solve(M, apply_sketch(S, b * y, unit=True, counter=counter), 'complement dual system')
    return b * (y - apply_sketch_adjoint(S, nu, unit=True, counter=counter))


def update_l2(state, g, counter=None) -> np.ndarray:
    """ x_{t+1} for phi = (lam/2)||x||^2; @state must already have observed @g.

    @counter collects the transform operations; the k x k solves are not counted.
    """
    g = as_vector(g, state.n, 'gradient')
    pair = regularizer_matrices(state)
    g_eff = state.eta * g
    lam_eff = state.eta * state.lam
    x_next = (solve_parallel(state, pair.K, g_eff, lam_eff, counter)
              + solve_perp(state, pair.D, g_eff, lam_eff, counter))
    if not np.all(np.isfinite(x_next)):
        raise CompError('non_finite', 'l2 update produced non-finite entries', {'round': state.round})
    return x_next

