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
The online game: losses, the example stream, the CompAdaGrad learner and regret bookkeeping.

Each round the runner reveals a mini-batch, charges the learner the batch loss at x_t
plus phi(x_t), hands it the (sub)gradient and lets it move to x_{t+1}.
"""

__all__ = ['LossKind', 'LossFn', 'Dataset', 'CompAdaGrad', 'TraceRow', 'RunTrace', 'RegretLedger', 'RegretResult',
           'run_game', 'compute_regret', 'solve_comparator', 'bound_rhs_comp']

import math
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.sparse
import scipy.special

from compada import conf
from compada.adastate import DeltaMode, matrix_sqrt_psd, new_state, observe_gradient, replay_gtilde
from compada.baselines import OnlineLearner
from compada.conf import g_logger
from compada.transforms import Scaling, apply_complement, apply_projector, sketch_sample
from compada.updates_l1 import update_l1
from compada.updates_l2 import update_l2
from compada.util import CompError, Regularizer, Status, as_vector, composite_value, soft_threshold


class LossKind(Enum):
    Logistic = 'Logistic'  # log(1 + exp(-y <x, a>))
    Hinge = 'Hinge'  # max(0, 1 - y <x, a>)
    Squared = 'Squared'  # (1/2) (<x, a> - y)^2


@dataclass(frozen=True)
class LossFn(object):
    kind: LossKind = LossKind.Logistic

    def values(self, margins, y) -> np.ndarray:
        """ per-example losses from the raw scores @margins = A x """
        if self.kind == LossKind.Logistic:
            return np.logaddexp(0.0, -y * margins)
        if self.kind == LossKind.Hinge:
            return np.maximum(0.0, 1.0 - y * margins)
        r = margins - y
        return 0.5 * r * r

    def derivatives(self, margins, y) -> np.ndarray:
        """ d loss / d score, per example (a subgradient for the hinge) """
        if self.kind == LossKind.Logistic:
            return -y * scipy.special.expit(-y * margins)
        if self.kind == LossKind.Hinge:
            return np.where(y * margins <= 1.0, -y, 0.0)
        return margins - y

    def value(self, x, A, y) -> float:
        """ mean loss of the batch (@A: rows are examples) """
        return float(np.mean(self.values(A @ x, y)))

    def gradient(self, x, A, y) -> np.ndarray:
        return A.T @ self.derivatives(A @ x, y) / A.shape[0]

    @staticmethod
    def mistakes(x, A, y) -> int:
        """ zero-one count: prediction is +1 when <x, a> > 0 and -1 otherwise """
        predicted = np.where(A @ x > 0.0, 1.0, -1.0)
        return int(np.sum(predicted != np.sign(y)))


@dataclass
class Dataset(object):
    """ labelled examples; @features is a dense array or a scipy.sparse CSR matrix (rows are examples) """
    features: object
    labels: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.float64)
        if self.features.shape[0] != self.labels.shape[0]:
            raise CompError('dimension_mismatch', '%d feature rows but %d labels'
                            % (self.features.shape[0], self.labels.shape[0]))

    def __len__(self):
        return int(self.labels.shape[0])

    @property
    def n(self):
        return int(self.features.shape[1])

    @property
    def is_sparse(self):
        return scipy.sparse.issparse(self.features)

    def dense(self) -> np.ndarray:
        if self.is_sparse:
            return self.features.toarray()
        return np.asarray(self.features, dtype=np.float64)

    def batch(self, start, stop):
        rows = self.features[start:stop]
        if self.is_sparse:
            rows = rows.toarray()
        return np.asarray(rows, dtype=np.float64), self.labels[start:stop]

    def subset(self, index) -> 'Dataset':
        index = np.asarray(index, dtype=np.int64)
        return Dataset(self.features[index], self.labels[index], dict(self.meta))

    def padded(self, n) -> 'Dataset':
        """ zero columns appended up to dimension @n """
        if n < self.n:
            raise CompError('dimension_mismatch', 'cannot pad dimension %d down to %d' % (self.n, n))
        if n == self.n:
            return self
        if self.is_sparse:
            X = self.features.tocsr()
            features = scipy.sparse.csr_matrix((X.data, X.indices, X.indptr), shape=(X.shape[0], n))
        else:
            features = np.pad(self.dense(), ((0, 0), (0, n - self.n)))
        return Dataset(features, self.labels, dict(self.meta))

    def __repr__(self):
        return f'<Dataset: m={len(self)}, n={self.n}, sparse={self.is_sparse}>'


class CompAdaGrad(OnlineLearner):
    """ sketched AdaGrad: full-matrix adaptivity on a k-dimensional SRHT subspace, diagonal on its complement """
    name = 'CompAdaGrad'

    def __init__(self, n, k, eta, lam=0.0, tau=1.0, delta_r=0.1, delta_c=0.1,
                 delta_mode=DeltaMode.OutsideSqrt, scaling=Scaling.Scaled, seed=0,
                 regularizer=Regularizer.L2Sq, x0=None, sketch=None):
        super(CompAdaGrad, self).__init__(n, eta, lam, regularizer, x0)
        self.sketch = sketch if sketch is not None else sketch_sample(self.n, k, seed, Scaling(scaling))
        if self.sketch.n != self.n:
            raise CompError('dimension_mismatch', 'sketch of dimension %d for n=%d' % (self.sketch.n, self.n))
        self.state = new_state(self.sketch, eta, lam, tau, delta_r, delta_c, DeltaMode(delta_mode), x0=self.x)
        self.basis_cache = {}

    @property
    def analyzed(self) -> bool:
        """ whether the configuration is the one the comp regret bound covers """
        s = self.state
        return (self.sketch.scaling == Scaling.Unscaled and s.delta_mode == DeltaMode.OutsideSqrt
                and s.tau == 1.0 and s.delta_r == s.delta_c)

    def update(self, g):
        g = as_vector(g, self.n, 'gradient')
        observe_gradient(self.state, g)
        if self.regularizer == Regularizer.L1:
            x_next = update_l1(self.state, g, basis_cache=self.basis_cache)
        else:
            x_next = update_l2(self.state, g)
        self.state.x = x_next
        self.x = x_next
        return x_next

    def __repr__(self):
        return f'<CompAdaGrad: n={self.n}, k={self.sketch.k}, eta={self.eta}, lam={self.lam}, {self.regularizer.value}>'


# -----------------------------------------------------------
#    trace of a game
# -----------------------------------------------------------
@dataclass
class TraceRow(object):
    round: int
    composite_loss: float  # f_t(x_t) + phi(x_t)
    zero_one: int  # mistakes of x_t on the batch
    cumulative_loss: float
    cumulative_zero_one: int
    examples: int  # examples seen so far
    wall_time: float = 0.0


@dataclass
class RunTrace(object):
    rows: list = field(default_factory=list)
    status: Status = Status.SUCCESS
    message: str = 'ok'
    final_x: np.ndarray = None

    @property
    def online_zero_one(self) -> float:
        """ mistakes per example over the whole stream """
        if not self.rows or self.rows[-1].examples == 0:
            return float('nan')
        return self.rows[-1].cumulative_zero_one / self.rows[-1].examples

    @property
    def cumulative_loss(self) -> float:
        return self.rows[-1].cumulative_loss if self.rows else 0.0


@dataclass
class RegretLedger(object):
    """ full record of a (small) game, for the exact regret and the bounds """
    learner: OnlineLearner
    loss: LossFn
    batches: list = field(default_factory=list)  # (A_t, y_t)
    gradients: list = field(default_factory=list)
    iterates: list = field(default_factory=list)  # x_t, before the update
    composite_losses: list = field(default_factory=list)  # f_t(x_t) + phi(x_t)
    composite_losses_next: list = field(default_factory=list)  # f_t(x_t) + phi(x_{t+1})
    perp_colnorms: np.ndarray = None  # sum_t (P_perp g_t)^2

    def __post_init__(self):
        if self.learner.n > conf.g_regret_guard_n:
            raise CompError('regret_guard', 'exact regret needs n <= %d, got %d'
                            % (conf.g_regret_guard_n, self.learner.n))
        self.perp_colnorms = np.zeros(self.learner.n)

    @property
    def sketch(self):
        return getattr(self.learner, 'sketch', None)

    def record(self, x_t, A, y, loss_value, g, x_next):
        if len(self.batches) >= conf.g_regret_guard_T:
            raise CompError('regret_guard', 'exact regret needs T <= %d rounds' % conf.g_regret_guard_T)
        self.batches.append((np.array(A), np.array(y)))
        self.gradients.append(np.array(g))
        self.iterates.append(np.array(x_t))
        self.composite_losses.append(loss_value + self.learner.phi(x_t))
        self.composite_losses_next.append(loss_value + self.learner.phi(x_next))
        perp = g if self.sketch is None else apply_complement(self.sketch, g)
        self.perp_colnorms += perp * perp

    def __len__(self):
        return len(self.batches)


@dataclass
class RegretResult(object):
    regret: float
    x_star: np.ndarray
    comparator_value: float  # sum_t f_t(x*) + T phi(x*)
    learner_value: float
    converged: bool


def run_game(learner, stream, config, ledger=None) -> RunTrace:
    """ play the stream in mini-batches of config.batch_size (first config.T examples, all when 0).

    A non-finite loss or gradient ends the game with status FAILED; the rows so far are kept.
    """
    if stream.n != learner.n:
        raise CompError('dimension_mismatch', 'stream dimension %d, learner dimension %d' % (stream.n, learner.n))
    total = len(stream) if config.T == 0 else min(config.T, len(stream))
    if total == 0:
        raise CompError('empty_dataset', 'the example stream is empty')
    loss = LossFn(LossKind(config.loss))
    trace = RunTrace()
    cumulative_loss, cumulative_zero_one = 0.0, 0
    for r, start in enumerate(range(0, total, config.batch_size)):
        started = time.perf_counter()
        A, y = stream.batch(start, min(start + config.batch_size, total))
        x_t = learner.x.copy()
        f = loss.value(x_t, A, y)
        g = loss.gradient(x_t, A, y)
        if not math.isfinite(f) or not np.all(np.isfinite(g)):
            trace.status, trace.message = Status.FAILED, 'non-finite loss or gradient at round %d' % (r + 1)
            g_logger.error(trace.message)
            break
        mistakes = LossFn.mistakes(x_t, A, y)
        composite = f + learner.phi(x_t)
        try:
            x_next = learner.update(g)
        except CompError as e:
            trace.status = Status.FAILED if e.code == 'non_finite' else Status.ERROR
            trace.message = 'round %d: %s' % (r + 1, e)
            g_logger.error(trace.message)
            break
        cumulative_loss += composite
        cumulative_zero_one += mistakes
        trace.rows.append(TraceRow(round=r + 1, composite_loss=composite, zero_one=mistakes,
                                   cumulative_loss=cumulative_loss, cumulative_zero_one=cumulative_zero_one,
                                   examples=start + A.shape[0], wall_time=time.perf_counter() - started))
        if ledger is not None:
            ledger.record(x_t, A, y, f, g, x_next)
    trace.final_x = learner.x.copy()
    g_logger.info('%s: %d rounds, status %s' % (learner, len(trace.rows), trace.status.name))
    return trace


# -----------------------------------------------------------
#    comparator and regret
# -----------------------------------------------------------
def _stacked(ledger):
    A = np.vstack([b[0] for b in ledger.batches])
    y = np.concatenate([b[1] for b in ledger.batches])
    weights = np.concatenate([np.full(b[0].shape[0], 1.0 / b[0].shape[0]) for b in ledger.batches])
    return A, y, weights


def solve_comparator(ledger):
    """ x* = argmin sum_t f_t(x) + T phi(x) over the recorded batches.

    Smooth losses: FISTA with adaptive restart (prox of the l1 term when phi is l1).
    Hinge: proximal subgradient with the best iterate kept; never reported converged.
    Returns (x*, objective, converged).
    """
    learner = ledger.learner
    A, y, weights = _stacked(ledger)
    T = len(ledger)
    lam_total = T * learner.lam
    l1 = learner.regularizer == Regularizer.L1
    loss = ledger.loss

    def smooth_grad(x):
        grad = A.T @ (weights * loss.derivatives(A @ x, y))
        return grad if l1 else grad + lam_total * x

    def objective(x):
        return float(np.dot(weights, loss.values(A @ x, y))) + T * composite_value(learner.regularizer, learner.lam, x)

    n = A.shape[1]
    x = np.zeros(n)
    if loss.kind == LossKind.Hinge:
        scale = float(np.sum(weights * np.linalg.norm(A, axis=1))) + lam_total + 1e-300
        best_x, best_f = x.copy(), objective(x)
        for it in range(conf.g_comparator_max_iter):
            step = 1.0 / (scale * math.sqrt(it + 1.0))
            v = x - step * (A.T @ (weights * loss.derivatives(A @ x, y)))
            x = soft_threshold(v, step * lam_total) if l1 else v - step * lam_total * x
            f = objective(x)
            if f < best_f:
                best_x, best_f = x.copy(), f
        g_logger.warning('hinge comparator is a subgradient approximation (flagged)')
        return best_x, best_f, False

    curvature = 0.25 if loss.kind == LossKind.Logistic else 1.0
    L = curvature * float(np.linalg.norm(np.sqrt(weights)[:, np.newaxis] * A, 2)) ** 2
    if not l1:
        L += lam_total
    L = L if L > 0.0 else 1.0

    def prox(v):
        return soft_threshold(v, lam_total / L) if l1 else v

    f_old = objective(x)
    point, t = x.copy(), 1.0
    converged = False
    for it in range(conf.g_comparator_max_iter):
        x_new = prox(point - smooth_grad(point) / L)
        f_new = objective(x_new)
        if f_new > f_old:
            if t == 1.0:
                converged = True
                break
            # restart the momentum
            point, t = x.copy(), 1.0
            continue
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        point = x_new + ((t - 1.0) / t_new) * (x_new - x)
        done = abs(f_old - f_new) <= conf.g_comparator_rtol * max(1.0, abs(f_new))
        x, f_old, t = x_new, f_new, t_new
        if done and it > 0:
            converged = True
            break
    if not converged:
        g_logger.warning('comparator did not converge in %d iterations' % conf.g_comparator_max_iter)
    return x, f_old, converged


def compute_regret(ledger, variant='iterate', comparator=None) -> RegretResult:
    """ sum_t (f_t(x_t) + phi(x_t)) - min_x sum_t (f_t(x) + phi(x)).

    @variant 'next' charges phi(x_{t+1}) instead of phi(x_t), the form the composite bound is stated in.
    @comparator reuses a (x*, value, converged) result of solve_comparator for this ledger.
    Regret can be negative: the comparator is fixed while the learner moves.
    """
    if len(ledger) == 0:
        raise CompError('empty_trace', 'the recorded game has no rounds')
    if variant not in ('iterate', 'next'):
        raise CompError('config', 'unknown regret variant: %s' % variant)
    charged = ledger.composite_losses if variant == 'iterate' else ledger.composite_losses_next
    learner_value = float(np.sum(charged))
    x_star, value, converged = comparator if comparator is not None else solve_comparator(ledger)
    return RegretResult(regret=learner_value - value, x_star=x_star, comparator_value=value,
                        learner_value=learner_value, converged=converged)


def bound_rhs_comp(ledger, x_star, eta, delta) -> float:
    """ right-hand side of the composite regret bound (Unscaled, OutsideSqrt, tau = 1, delta_r = delta_c = delta):

        (delta/2eta)||x*-x_1||^2
        + (1/2eta) (max_t ||P(x*-x_t)||^2 tr(gtilde_T^1/2) + max_t ||P_perp(x*-x_t)||_inf^2 sum_j ||(P_perp g)_{1:T,j}||)
        + eta (tr(gtilde_T^1/2) + sum_j ||(P_perp g)_{1:T,j}||)
    """
    learner = ledger.learner
    if not isinstance(learner, CompAdaGrad) or not learner.analyzed:
        raise CompError('not_analyzed', 'the composite bound needs CompAdaGrad with Unscaled, OutsideSqrt, '
                                        'tau = 1 and delta_r = delta_c')
    if delta != learner.state.delta_r:
        raise CompError('not_analyzed', 'delta %s differs from the learner delta %s' % (delta, learner.state.delta_r))
    if len(ledger) == 0:
        raise CompError('empty_trace', 'the recorded game has no rounds')
    S = learner.sketch
    x_star = as_vector(x_star, S.n, 'comparator')
    gtilde = replay_gtilde(S, ledger.gradients, unit=True)
    trace_sqrt = float(np.trace(matrix_sqrt_psd(gtilde))) if S.k else 0.0
    perp_sum = float(np.sum(np.sqrt(ledger.perp_colnorms)))
    par, perp = 0.0, 0.0
    for x_t in ledger.iterates:
        diff = x_star - x_t
        p = apply_projector(S, diff)
        par = max(par, float(np.dot(p, p)))
        perp = max(perp, float(np.max(np.abs(diff - p))))
    first = float(np.sum((x_star - ledger.iterates[0]) ** 2))
    return (delta / (2.0 * eta) * first + (par * trace_sqrt + perp ** 2 * perp_sum) / (2.0 * eta)
            + eta * (trace_sqrt + perp_sum))
