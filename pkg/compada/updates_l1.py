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
Composite update for phi(x) = lam ||x||_1 by a LARS-LASSO homotopy on

    min_beta  1/2 beta^T A beta + u^T beta + lam_eff ||beta||_1,
    A = c^2 Pi_tilde^T K Pi_tilde + P_perp D P_perp,   u = g_eff - A x_t

A is never materialized. Matrix-vector products use

    A beta = D beta - D Pi_tilde^T Pi_tilde beta + Pi_tilde^T (Q Pi_tilde beta - Pi_tilde D beta),
    Q      = c^2 K + Pi_tilde D Pi_tilde^T          (k x k, once per round)

and the entries of A restricted to the active set come from the columns b_i = R H e_i
(orthogonal H) of the sketch:

    A_ii = d_i + <b_i, Q b_i> - 2 d_i k / n
    A_ij = s_i s_j (<b_j, Q b_i> - (d_i + d_j) <b_j, b_i>)

The active gram is kept as an upper cholesky factor R (R^T R = G), updated in
O(|active|^2) per insertion or deletion.
"""

__all__ = ['LarsWorkspace', 'precompute_Q', 'apply_A', 'make_workspace', 'basis_column', 'gram_entry_diag',
           'gram_entry_cross', 'cholesky_insert', 'cholesky_delete', 'lars_solve', 'update_l1', 'dense_lasso_cd']

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from compada import conf
from compada.adastate import regularizer_matrices
from compada.conf import g_logger
from compada.transforms import apply_sketch, apply_sketch_adjoint, hadamard_rows_column
from compada.updates_l2 import build_sketch_gram
from compada.util import CompError, as_vector, soft_threshold


@dataclass
class LarsWorkspace(object):
    """ per-round data of the homotopy """
    sketch: object
    Q: np.ndarray
    d: np.ndarray
    u: np.ndarray
    basis_cache: dict = field(default_factory=dict)  # i -> b_i, valid while the sketch is fixed
    qb_cache: dict = field(default_factory=dict)  # i -> Q b_i, this round only
    active: list = field(default_factory=list)
    signs: list = field(default_factory=list)
    chol: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    breakpoints: list = field(default_factory=list)  # max |correlation| after each step
    steps: int = 0
    counter: object = None  # OpCounter charged by the transforms, or None


def precompute_Q(state, pair=None, counter=None) -> np.ndarray:
    pair = pair or regularizer_matrices(state)
    S = state.sketch
    if S.k == 0:
        return np.zeros((0, 0))
    return S.scale ** 2 * pair.K + build_sketch_gram(S, pair.D, counter)


def apply_A(state, Q, beta, d, counter=None) -> np.ndarray:
    S = state.sketch
    beta = as_vector(beta, S.n, 'beta')
    pb = apply_sketch(S, beta, unit=True, counter=counter)
    out = d * beta - d * apply_sketch_adjoint(S, pb, unit=True, counter=counter)
    out += apply_sketch_adjoint(S, Q @ pb - apply_sketch(S, d * beta, unit=True, counter=counter), unit=True,
                                counter=counter)
    return out


def make_workspace(state, g_eff, pair=None, basis_cache=None, counter=None) -> LarsWorkspace:
    pair = pair or regularizer_matrices(state)
    Q = precompute_Q(state, pair, counter)
    u = as_vector(g_eff, state.n, 'gradient') - apply_A(state, Q, state.x, pair.D, counter)
    return LarsWorkspace(sketch=state.sketch, Q=Q, d=pair.D, u=u,
                         basis_cache=basis_cache if basis_cache is not None else {}, counter=counter)


def basis_column(ws, i) -> np.ndarray:
    b = ws.basis_cache.get(i)
    if b is None:
        S = ws.sketch
        b = hadamard_rows_column(S.n, i, S.rows) / math.sqrt(S.n)
        ws.basis_cache[i] = b
    return b


def _qb(ws, i):
    qb = ws.qb_cache.get(i)
    if qb is None:
        qb = ws.Q @ basis_column(ws, i)
        ws.qb_cache[i] = qb
    return qb


def gram_entry_diag(ws, i) -> float:
    S = ws.sketch
    d_i = float(ws.d[i])
    return d_i + float(np.dot(basis_column(ws, i), _qb(ws, i))) - 2.0 * d_i * S.k / S.n


def gram_entry_cross(ws, i, j) -> float:
    if i == j:
        return gram_entry_diag(ws, i)
    lo, hi = (i, j) if i < j else (j, i)
    sigma = ws.sketch.signs
    b_lo, b_hi = basis_column(ws, lo), basis_column(ws, hi)
    value = float(np.dot(b_hi, _qb(ws, lo))) - (float(ws.d[lo]) + float(ws.d[hi])) * float(np.dot(b_hi, b_lo))
    return float(sigma[lo] * sigma[hi]) * value


def cholesky_insert(R, cross, diag) -> np.ndarray:
    """ extend the upper factor @R of G to [[G, cross], [cross^T, diag]] """
    m = R.shape[0]
    if m == 0:
        r = np.zeros(0)
    else:
        r = scipy.linalg.solve_triangular(R, np.asarray(cross, dtype=np.float64), trans='T', lower=False)
    rho2 = diag - float(np.dot(r, r))
    if not rho2 > conf.g_cholesky_pivot_min * max(1.0, abs(diag)):
        raise CompError('singular_system', 'active gram lost positive definiteness',
                        {'pivot': rho2, 'active': m})
    out = np.zeros((m + 1, m + 1))
    out[:m, :m] = R
    out[:m, m] = r
    out[m, m] = math.sqrt(rho2)
    return out


def cholesky_delete(R, pos) -> np.ndarray:
    """ upper factor of G with row/column @pos removed (givens rotations) """
    R = np.delete(R, pos, axis=1)
    m = R.shape[0]
    for j in range(pos, m - 1):
        a, b = R[j, j], R[j + 1, j]
        r = math.hypot(a, b)
        if r == 0.0:
            continue
        cs, sn = a / r, b / r
        upper = R[j, j:].copy()
        lower = R[j + 1, j:].copy()
        R[j, j:] = cs * upper + sn * lower
        R[j + 1, j:] = -sn * upper + cs * lower
        R[j + 1, j] = 0.0
    return R[:m - 1].copy()


def _activate(ws, i, sign):
    cross = [gram_entry_cross(ws, i, j) for j in ws.active]
    ws.chol = cholesky_insert(ws.chol, cross, gram_entry_diag(ws, i))
    ws.active.append(int(i))
    ws.signs.append(float(sign))
    g_logger.debug('lars: add %d (sign %+d), |active|=%d' % (i, sign, len(ws.active)))


def _deactivate(ws, pos):
    i = ws.active.pop(pos)
    ws.signs.pop(pos)
    ws.chol = cholesky_delete(ws.chol, pos)
    g_logger.debug('lars: drop %d, |active|=%d' % (i, len(ws.active)))
    return i


def _entry_steps(C, c, a):
    """ smallest step at which each inactive correlation reaches the active level """
    out1 = np.full(c.shape, np.inf)
    out2 = np.full(c.shape, np.inf)
    den1 = 1.0 - a
    den2 = 1.0 + a
    np.divide(np.maximum(C - c, 0.0), den1, out=out1, where=den1 > 1e-15)
    np.divide(np.maximum(C + c, 0.0), den2, out=out2, where=den2 > 1e-15)
    return np.minimum(out1, out2)


def _objective(state, ws, beta, lam) -> float:
    return (0.5 * float(np.dot(beta, apply_A(state, ws.Q, beta, ws.d, ws.counter))) + float(np.dot(ws.u, beta))
            + lam * float(np.sum(np.abs(beta))))


def _settle(state, ws, beta, lam, max_iter):
    """ exact solve on the active set with the current signs.

    When the solve flips signs, the best point among the zero crossings on the segment and the solve
    itself is kept; coordinates that land on zero leave the active set and the rest take their new signs.
    """
    for _ in range(max_iter):
        if not ws.active:
            return np.zeros(state.n)
        act = np.asarray(ws.active, dtype=np.int64)
        s = np.asarray(ws.signs)
        target = scipy.linalg.cho_solve((ws.chol, False), -ws.u[act] - lam * s)
        if np.all(target * s >= 0.0):
            beta = np.zeros(state.n)
            beta[act] = target
            return beta
        current = beta[act]
        change = current - target
        candidates = [(target, -1)]
        for p in np.flatnonzero((target * s < 0.0) & (change != 0.0)):
            t = float(current[p] / change[p])
            if 0.0 <= t < 1.0:
                candidates.append((current - t * change, int(p)))
        best, best_f = None, math.inf
        for point, p in candidates:
            if p >= 0:
                point[p] = 0.0
            trial = np.zeros(state.n)
            trial[act] = point
            f = _objective(state, ws, trial, lam)
            if f < best_f:
                best, best_f = trial, f
        beta = best
        for pos in range(len(act) - 1, -1, -1):
            if beta[act[pos]] == 0.0:
                _deactivate(ws, pos)
            else:
                ws.signs[pos] = float(np.sign(beta[act[pos]]))
    raise CompError('kkt_violation', 'active set solve did not settle within %d steps' % max_iter,
                    {'round': state.round, 'active': len(ws.active)})


def _polish(state, ws, beta, lam):
    """ settle the active system at the final lam, then pull in any coordinate that still violates
    |correlation| <= lam until the optimality conditions hold """
    n = state.n
    max_iter = max(1, conf.g_lars_max_iter_factor * n)
    tol = 1e-10 * max(1.0, lam)
    for _ in range(max_iter):
        beta = _settle(state, ws, beta, lam, max_iter)
        c = -(ws.u + apply_A(state, ws.Q, beta, ws.d, ws.counter))
        inactive = np.ones(n, dtype=bool)
        inactive[ws.active] = False
        if not inactive.any():
            return beta
        candidates = np.flatnonzero(inactive)
        j = int(candidates[np.argmax(np.abs(c[candidates]))])
        if abs(c[j]) - lam <= tol:
            return beta
        g_logger.debug('lars: polish pulls in %d (excess %.3g)' % (j, abs(c[j]) - lam))
        _activate(ws, j, np.sign(c[j]))
    raise CompError('kkt_violation', 'optimality conditions still violated after %d corrections' % max_iter,
                    {'round': state.round, 'active': len(ws.active)})


def _overshoot(ws, c, C, n, skip=-1) -> np.ndarray:
    """ inactive coordinates whose correlation already passed the active level """
    inactive = np.ones(n, dtype=bool)
    inactive[ws.active] = False
    if skip >= 0:
        inactive[skip] = False
    return np.flatnonzero(inactive & (np.abs(c) > C * (1.0 + 1e-9)))


def lars_solve(state, ws, lam) -> np.ndarray:
    """ follow the solution path from beta = 0 down to the regularization level @lam """
    n = state.n
    u = ws.u
    beta = np.zeros(n)
    c = -u.copy()
    C = float(np.max(np.abs(c))) if n else 0.0
    ws.breakpoints = [C]
    if C <= lam * (1.0 + 1e-9):
        return beta

    max_steps = conf.g_lars_max_iter_factor * n
    pending = int(np.argmax(np.abs(c)))
    just_dropped = -1
    for step in range(max_steps):
        if pending >= 0:
            _activate(ws, pending, np.sign(c[pending]))
            pending = -1
        for j in _overshoot(ws, c, C, n, just_dropped):
            g_logger.debug('lars: %d overshot the active level, added at zero step' % j)
            _activate(ws, int(j), np.sign(c[j]))
        active = np.asarray(ws.active, dtype=np.int64)
        w = scipy.linalg.cho_solve((ws.chol, False), np.asarray(ws.signs))
        direction = np.zeros(n)
        direction[active] = w
        a = apply_A(state, ws.Q, direction, ws.d, ws.counter)

        gamma, event, where = C - lam, 'target', -1
        inactive = np.ones(n, dtype=bool)
        inactive[active] = False
        if just_dropped >= 0:
            inactive[just_dropped] = False
        if inactive.any():
            candidates = np.flatnonzero(inactive)
            steps = _entry_steps(C, c[candidates], a[candidates])
            pos = int(np.argmin(steps))
            if steps[pos] < gamma:
                gamma, event, where = float(steps[pos]), 'add', int(candidates[pos])
        crossing = beta[active] * w < 0.0
        if crossing.any():
            zeros = np.full(active.shape[0], np.inf)
            zeros[crossing] = -beta[active][crossing] / w[crossing]
            pos = int(np.argmin(zeros))
            if zeros[pos] < gamma:
                gamma, event, where = float(zeros[pos]), 'drop', pos

        beta[active] += gamma * w
        C -= gamma
        ws.breakpoints.append(C)
        ws.steps = step + 1
        just_dropped = -1
        if event == 'target':
            break
        if event == 'add':
            pending = where
        else:
            j = _deactivate(ws, where)
            beta[j] = 0.0
            just_dropped = j
        c = -(u + apply_A(state, ws.Q, beta, ws.d, ws.counter))
        if not ws.active and pending < 0:
            pending = int(np.argmax(np.abs(c)))
    else:
        raise CompError('iteration_cap', 'lars did not reach lam within %d steps' % max_steps,
                        {'round': state.round, 'active': len(ws.active)})
    return _polish(state, ws, beta, lam)


def _check_positive_definite(state, pair):
    S = state.sketch
    if S.k < S.n and float(np.min(pair.D)) <= 0.0:
        raise CompError('not_positive_definite', 'complement regularizer D must be positive for the l1 update')
    if S.k > 0 and float(np.linalg.eigvalsh(pair.K)[0]) <= 0.0:
        raise CompError('not_positive_definite', 'sketched regularizer K must be positive for the l1 update')


def update_l1(state, g, lam=None, basis_cache=None, counter=None) -> np.ndarray:
    """ x_{t+1} for phi = lam ||x||_1; @state must already have observed @g.

    @lam defaults to state.lam. @counter collects the transform operations of the homotopy.
    """
    lam = state.lam if lam is None else float(lam)
    if lam < 0.0:
        raise CompError('config', 'lam must be >= 0', {'lam': lam})
    g = as_vector(g, state.n, 'gradient')
    pair = regularizer_matrices(state)
    _check_positive_definite(state, pair)
    ws = make_workspace(state, state.eta * g, pair, basis_cache, counter)
    x_next = lars_solve(state, ws, state.eta * lam)
    if not np.all(np.isfinite(x_next)):
        raise CompError('non_finite', 'l1 update produced non-finite entries', {'round': state.round})
    return x_next


def dense_lasso_cd(A, u, lam, tol=1e-13, max_sweeps=100000) -> np.ndarray:
    """ min 1/2 x^T A x + u^T x + lam ||x||_1 by cyclic coordinate descent (dense A, small n) """
    A = np.asarray(A, dtype=np.float64)
    u = as_vector(u, A.shape[0], 'linear term')
    n = u.shape[0]
    if np.any(np.diag(A) <= 0.0):
        raise CompError('not_positive_definite', 'lasso matrix needs a positive diagonal')
    x = np.zeros(n)
    grad = u.copy()  # u + A x
    for sweep in range(max_sweeps):
        biggest = 0.0
        for j in range(n):
            old = x[j]
            z = A[j, j] * old - grad[j]
            new = float(soft_threshold(z, lam)) / A[j, j]
            if new != old:
                grad += A[:, j] * (new - old)
                x[j] = new
                biggest = max(biggest, abs(new - old))
        if biggest <= tol * max(1.0, float(np.max(np.abs(x)))):
            return x
    g_logger.warning('dense lasso did not converge in %d sweeps' % max_sweeps)
    return x
