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
Per-learner adaptive statistics of CompAdaGrad and the regularizer matrices built from them.

    gtilde  = sum_s (Pi g_s)(Pi g_s)^T            k x k, sketched gram
    perp_sq = sum_s (P_perp g_s)^2                n, squared column norms of the complement

    K = sqrt(gtilde + delta_r I)   (InsideSqrt)   or   sqrt(gtilde) + delta_r I   (OutsideSqrt)
    D = tau * (sqrt(perp_sq) + delta_c)
"""

__all__ = ['DeltaMode', 'CompState', 'RegularizerPair', 'new_state', 'observe_gradient', 'matrix_sqrt_psd',
           'regularizer_matrices', 'replay_gtilde', 'dense_metric']

from dataclasses import dataclass
from enum import Enum

import numpy as np

from compada import conf
from compada.conf import g_logger
from compada.transforms import (SketchOperator, apply_complement, apply_sketch, dense_sketch)
from compada.util import CompError, as_vector


class DeltaMode(Enum):
    InsideSqrt = 'InsideSqrt'
    OutsideSqrt = 'OutsideSqrt'


@dataclass
class CompState(object):
    """ mutable state of one CompAdaGrad learner; not shared between threads """
    sketch: SketchOperator
    gtilde: np.ndarray
    perp_sq: np.ndarray
    x: np.ndarray
    eta: float
    lam: float = 0.0
    tau: float = 1.0
    delta_r: float = 0.1
    delta_c: float = 0.1
    delta_mode: DeltaMode = DeltaMode.OutsideSqrt
    round: int = 0

    @property
    def n(self):
        return self.sketch.n

    @property
    def k(self):
        return self.sketch.k

    def __repr__(self):
        return f'<CompState: n={self.n}, k={self.k}, round={self.round}, eta={self.eta}, lam={self.lam}>'


@dataclass
class RegularizerPair(object):
    K: np.ndarray  # k x k, regularizer of the sketched subspace
    D: np.ndarray  # n, diagonal regularizer of the complement
    singular: bool = False  # K or D is not strictly positive (update solvers then fail)


def new_state(sketch, eta, lam=0.0, tau=1.0, delta_r=0.1, delta_c=0.1, delta_mode=DeltaMode.OutsideSqrt,
              x0=None) -> CompState:
    if not eta > 0:
        raise CompError('config', 'eta must be positive, got %s' % eta)
    if lam < 0 or tau < 0 or delta_r < 0 or delta_c < 0:
        raise CompError('config', 'lam, tau, delta_r and delta_c must be nonnegative')
    x = np.zeros(sketch.n) if x0 is None else as_vector(x0, sketch.n, 'x0').copy()
    return CompState(sketch=sketch, gtilde=np.zeros((sketch.k, sketch.k)), perp_sq=np.zeros(sketch.n), x=x,
                     eta=float(eta), lam=float(lam), tau=float(tau), delta_r=float(delta_r),
                     delta_c=float(delta_c), delta_mode=DeltaMode(delta_mode))


def observe_gradient(state, g) -> CompState:
    """ fold the gradient @g of this round into the statistics (in place) """
    g = as_vector(g, state.n, 'gradient')
    if state.k > 0:
        s = apply_sketch(state.sketch, g)
        state.gtilde += np.outer(s, s)
    p = apply_complement(state.sketch, g)
    state.perp_sq += p * p
    state.round += 1
    return state


def matrix_sqrt_psd(M) -> np.ndarray:
    """ symmetric square root of a PSD matrix by eigendecomposition.

    Eigenvalues below g_eig_clamp_rel * (largest eigenvalue), negative roundoff included,
    are clamped to 0.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise CompError('dimension_mismatch', 'expected a square matrix, got shape %s' % (M.shape,))
    if M.size == 0:
        return M.copy()
    if not np.all(np.isfinite(M)):
        raise CompError('non_finite', 'matrix has non-finite entries')
    scale = max(1.0, float(np.max(np.abs(M))))
    if float(np.max(np.abs(M - M.T))) > 1e-8 * scale:
        raise CompError('not_symmetric', 'matrix is not symmetric')
    w, V = np.linalg.eigh(0.5 * (M + M.T))
    top = max(float(w[-1]), 0.0)
    w = np.where(w > conf.g_eig_clamp_rel * top, w, 0.0)
    R = (V * np.sqrt(w)) @ V.T
    return 0.5 * (R + R.T)


def regularizer_matrices(state) -> RegularizerPair:
    k = state.k
    if k > 0:
        if state.delta_mode == DeltaMode.InsideSqrt:
            K = matrix_sqrt_psd(state.gtilde + state.delta_r * np.eye(k))
        else:
            K = matrix_sqrt_psd(state.gtilde) + state.delta_r * np.eye(k)
    else:
        K = np.zeros((0, 0))
    D = state.tau * (np.sqrt(state.perp_sq) + state.delta_c)

    singular = False
    if k > 0 and float(np.linalg.eigvalsh(K)[0]) <= 0.0:
        singular = True
    if k < state.n and float(np.min(D)) <= 0.0:
        singular = True
    if singular:
        g_logger.debug('regularizer matrices are singular at round %d (delta_r=%s, delta_c=%s, tau=%s)'
                       % (state.round, state.delta_r, state.delta_c, state.tau))
    return RegularizerPair(K=K, D=D, singular=singular)


def replay_gtilde(sketch, gradients, unit=False) -> np.ndarray:
    """ sum_s (Pi g_s)(Pi g_s)^T recomputed from a gradient history """
    out = np.zeros((sketch.k, sketch.k))
    for g in gradients:
        s = apply_sketch(sketch, g, unit=unit)
        out += np.outer(s, s)
    return out


def dense_metric(state, pair=None) -> np.ndarray:
    """ n x n matrix Pi^T K Pi + P_perp diag(D) P_perp; small n only """
    pair = pair or regularizer_matrices(state)
    S = state.sketch
    Pi = dense_sketch(S)
    Pt = dense_sketch(S, unit=True)
    C = np.eye(S.n) - Pt.T @ Pt
    return Pi.T @ pair.K @ Pi + C @ (pair.D[:, np.newaxis] * C)
