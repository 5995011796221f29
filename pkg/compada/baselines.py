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
Reference learners: online (sub)gradient descent, diagonal AdaGrad and full-matrix AdaGrad,
each with the same composite terms as CompAdaGrad. They share the OnlineLearner interface
so the game runner does not care which one it drives.
"""

__all__ = ['OnlineLearner', 'OGD', 'DiagAdaGrad', 'FullAdaGrad', 'ogd_update', 'diag_adagrad_update',
           'full_adagrad_update', 'bound_rhs_diag', 'bound_rhs_full']

import math

import numpy as np

from compada import conf
from compada.adastate import matrix_sqrt_psd
from compada.conf import g_logger
from compada.updates_l1 import dense_lasso_cd
from compada.util import CompError, Regularizer, as_vector, composite_value, soft_threshold, spd_solve


class OnlineLearner(object):
    """ base of every learner: holds the iterate x_t and plays one update per round """
    name = 'OnlineLearner'

    def __init__(self, n, eta, lam=0.0, regularizer=Regularizer.L2Sq, x0=None):
        if not eta > 0:
            raise CompError('config', 'eta must be positive, got %s' % eta)
        if lam < 0:
            raise CompError('config', 'lam must be nonnegative, got %s' % lam)
        self.n = int(n)
        self.eta = float(eta)
        self.lam = float(lam)
        self.regularizer = Regularizer(regularizer)
        self.x = np.zeros(self.n) if x0 is None else as_vector(x0, self.n, 'x0').copy()

    def update(self, g) -> np.ndarray:
        """ observe the gradient @g at x_t, move to (and return) x_{t+1} """
        raise NotImplementedError()

    def phi(self, x) -> float:
        return composite_value(self.regularizer, self.lam, x)

    def __repr__(self):
        return f'<{self.name}: n={self.n}, eta={self.eta}, lam={self.lam}, {self.regularizer.value}>'


def ogd_update(x, g, eta, lam, regularizer=Regularizer.L2Sq) -> np.ndarray:
    v = x - eta * g
    if regularizer == Regularizer.L1:
        return soft_threshold(v, eta * lam)
    return v / (1.0 + eta * lam)


def diag_adagrad_update(s, x, g, eta, lam, delta, regularizer=Regularizer.L2Sq) -> np.ndarray:
    """ @s is the sum of squared gradients, the current one included """
    h = np.sqrt(s) + delta
    v = h * x - eta * g
    if regularizer == Regularizer.L1:
        if np.any(h <= 0.0):
            raise CompError('not_positive_definite', 'diagonal metric has a zero entry; use delta > 0')
        return soft_threshold(v, eta * lam) / h
    denom = h + eta * lam
    if np.any(denom <= 0.0):
        raise CompError('singular_system', 'diagonal metric has a zero entry; use delta > 0 or lam > 0')
    return v / denom


def full_adagrad_update(G, x, g, eta, lam, delta, regularizer=Regularizer.L2Sq) -> np.ndarray:
    """ @G is the sum of gradient outer products, the current one included """
    n = x.shape[0]
    if n > conf.g_dense_guard:
        raise CompError('dense_guard', 'full AdaGrad with n=%d exceeds the dense guard %d' % (n, conf.g_dense_guard))
    M = matrix_sqrt_psd(G) + delta * np.eye(n)
    if regularizer == Regularizer.L1:
        return dense_lasso_cd(M, eta * g - M @ x, eta * lam)
    return spd_solve(M + eta * lam * np.eye(n), M @ x - eta * g, 'full AdaGrad system')


class OGD(OnlineLearner):
    name = 'OGD'

    def update(self, g):
        g = as_vector(g, self.n, 'gradient')
        self.x = ogd_update(self.x, g, self.eta, self.lam, self.regularizer)
        return self.x


class DiagAdaGrad(OnlineLearner):
    name = 'DiagAdaGrad'

    def __init__(self, n, eta, lam=0.0, delta=0.1, regularizer=Regularizer.L2Sq, x0=None):
        super(DiagAdaGrad, self).__init__(n, eta, lam, regularizer, x0)
        self.delta = float(delta)
        self.s = np.zeros(self.n)

    def update(self, g):
        g = as_vector(g, self.n, 'gradient')
        self.s += g * g
        self.x = diag_adagrad_update(self.s, self.x, g, self.eta, self.lam, self.delta, self.regularizer)
        return self.x


class FullAdaGrad(OnlineLearner):
    name = 'FullAdaGrad'

    def __init__(self, n, eta, lam=0.0, delta=0.1, regularizer=Regularizer.L2Sq, x0=None):
        super(FullAdaGrad, self).__init__(n, eta, lam, regularizer, x0)
        if self.n > conf.g_dense_guard:
            raise CompError('dense_guard', 'full AdaGrad with n=%d exceeds the dense guard %d'
                            % (self.n, conf.g_dense_guard))
        self.delta = float(delta)
        self.G = np.zeros((self.n, self.n))

    def update(self, g):
        g = as_vector(g, self.n, 'gradient')
        self.G += np.outer(g, g)
        self.x = full_adagrad_update(self.G, self.x, g, self.eta, self.lam, self.delta, self.regularizer)
        return self.x


# -----------------------------------------------------------
#    regret bounds (right-hand sides), on a recorded game
# -----------------------------------------------------------
def _history(trace):
    gradients = np.asarray(trace.gradients, dtype=np.float64)
    iterates = np.asarray(trace.iterates, dtype=np.float64)
    if gradients.ndim != 2 or gradients.shape[0] == 0:
        raise CompError('empty_trace', 'the recorded game has no rounds')
    return gradients, iterates


def bound_rhs_diag(trace, x_star, eta, delta) -> float:
    """ (delta/2eta)||x*-x_1||^2 + (1/2eta) max_t ||x*-x_t||_inf^2 sum_j ||g_{1:T,j}|| + eta sum_j ||g_{1:T,j}|| """
    gradients, iterates = _history(trace)
    x_star = as_vector(x_star, gradients.shape[1], 'comparator')
    colnorm_sum = float(np.sum(np.sqrt(np.sum(gradients * gradients, axis=0))))
    dist_inf = float(np.max(np.abs(iterates - x_star[np.newaxis, :])))
    first = float(np.sum((x_star - iterates[0]) ** 2))
    return delta / (2.0 * eta) * first + dist_inf ** 2 / (2.0 * eta) * colnorm_sum + eta * colnorm_sum


def bound_rhs_full(trace, x_star, eta, delta) -> float:
    """ (delta/eta)||x*||^2 + (1/2eta) max_t ||x*-x_t||^2 tr(G_T^1/2) + eta tr(G_T^1/2) """
    gradients, iterates = _history(trace)
    x_star = as_vector(x_star, gradients.shape[1], 'comparator')
    n = gradients.shape[1]
    if n > conf.g_dense_guard:
        raise CompError('dense_guard', 'n=%d exceeds the dense guard %d' % (n, conf.g_dense_guard))
    eig = np.linalg.eigvalsh(gradients.T @ gradients)
    trace_sqrt = float(np.sum(np.sqrt(np.maximum(eig, 0.0))))
    dist2 = float(np.max(np.sum((iterates - x_star[np.newaxis, :]) ** 2, axis=1)))
    value = delta / eta * float(np.dot(x_star, x_star)) + dist2 / (2.0 * eta) * trace_sqrt + eta * trace_sqrt
    if not math.isfinite(value):
        g_logger.error('full bound is not finite')
    return value
