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

import math

import numpy as np
import pytest

from compada import conf, updates_l1
from compada.adastate import DeltaMode, dense_metric, new_state, observe_gradient, regularizer_matrices
from compada.baselines import diag_adagrad_update
from compada.transforms import Scaling, dense_sketch, sketch_sample, wht_one_sparse
from compada.updates_l1 import *
from compada.updates_l2 import update_l2
from compada.util import CompError, Regularizer


def played_state(n, k, seed=0, rounds=5, scaling=Scaling.Scaled, lam=0.5, mode=DeltaMode.OutsideSqrt):
    r = np.random.default_rng(seed)
    S = sketch_sample(n, k, seed, scaling)
    state = new_state(S, 0.5, lam=lam, delta_r=0.3, delta_c=0.3, delta_mode=mode, x0=r.standard_normal(n))
    g = None
    for _ in range(rounds):
        g = r.standard_normal(n)
        observe_gradient(state, g)
    return state, g


def dense_l1_oracle(state, g):
    A = dense_metric(state)
    return dense_lasso_cd(A, state.eta * g - A @ state.x, state.eta * state.lam)


@pytest.mark.parametrize('k', [0, 3, 16])
@pytest.mark.parametrize('scaling', [Scaling.Scaled, Scaling.Unscaled])
@pytest.mark.parametrize('lam', [0.05, 0.5, 2.0])
def test_update_l1_matches_dense(k, scaling, lam):
    state, g = played_state(16, k, seed=k + 3, scaling=scaling, lam=lam)
    x = update_l1(state, g)
    np.testing.assert_allclose(x, dense_l1_oracle(state, g), atol=1e-8)


def test_update_l1_inside_sqrt():
    state, g = played_state(32, 6, seed=4, mode=DeltaMode.InsideSqrt, lam=0.2)
    np.testing.assert_allclose(update_l1(state, g), dense_l1_oracle(state, g), atol=1e-8)


def test_update_l1_large_lam_is_zero():
    state, g = played_state(16, 4, seed=1, lam=1e6)
    np.testing.assert_array_equal(update_l1(state, g), np.zeros(16))


def test_update_l1_without_lam_is_unregularized_solve():
    state, g = played_state(16, 4, seed=2, lam=0.0)
    np.testing.assert_allclose(update_l1(state, g), update_l2(state, g), atol=1e-9)


def test_update_l1_explicit_lam_overrides_state():
    state, g = played_state(16, 4, seed=1, lam=0.0)
    np.testing.assert_array_equal(update_l1(state, g, lam=1e6), np.zeros(16))
    with pytest.raises(CompError):
        update_l1(state, g, lam=-1.0)


def test_update_l1_k0_is_diagonal_adagrad():
    r = np.random.default_rng(12)
    state = new_state(sketch_sample(16, 0, 0), 0.5, lam=0.3, delta_r=0.1, delta_c=0.1)
    s = np.zeros(16)
    for _ in range(4):
        g = r.standard_normal(16)
        observe_gradient(state, g)
        s += g * g
        expected = diag_adagrad_update(s, state.x, g, 0.5, 0.3, 0.1, Regularizer.L1)
        state.x = update_l1(state, g)
        np.testing.assert_allclose(state.x, expected, atol=1e-12)


def test_gram_entries_match_dense():
    state, g = played_state(16, 5, seed=7)
    ws = make_workspace(state, state.eta * g)
    A = dense_metric(state)
    for i in range(16):
        assert gram_entry_diag(ws, i) == pytest.approx(A[i, i], abs=1e-10)
        for j in range(16):
            assert gram_entry_cross(ws, i, j) == pytest.approx(A[i, j], abs=1e-10)
            assert gram_entry_cross(ws, i, j) == gram_entry_cross(ws, j, i)


def test_apply_A_matches_dense():
    state, g = played_state(32, 6, seed=8, scaling=Scaling.Unscaled)
    pair = regularizer_matrices(state)
    Q = precompute_Q(state, pair)
    beta = np.random.default_rng(0).standard_normal(32)
    np.testing.assert_allclose(apply_A(state, Q, beta, pair.D), dense_metric(state) @ beta, atol=1e-10)


def test_basis_column():
    state, g = played_state(32, 6, seed=9)
    ws = make_workspace(state, g)
    S = state.sketch
    for i in (0, 5, 31):
        np.testing.assert_allclose(basis_column(ws, i), wht_one_sparse(32, i)[S.rows] / math.sqrt(32))
    assert set(ws.basis_cache) >= {0, 5, 31}


def test_cholesky_insert_delete():
    r = np.random.default_rng(3)
    B = r.standard_normal((8, 6))
    G = B.T @ B + 0.1 * np.eye(6)
    R = np.zeros((0, 0))
    for m in range(6):
        R = cholesky_insert(R, G[m, :m], G[m, m])
    np.testing.assert_allclose(R.T @ R, G, atol=1e-12)
    np.testing.assert_allclose(R, np.linalg.cholesky(G).T, atol=1e-12)
    for pos in (0, 2, 5):
        Rd = cholesky_delete(R, pos)
        keep = [i for i in range(6) if i != pos]
        np.testing.assert_allclose(Rd.T @ Rd, G[np.ix_(keep, keep)], atol=1e-12)
        np.testing.assert_allclose(np.tril(Rd, -1), np.zeros((5, 5)), atol=0)
        assert np.all(np.diag(Rd) > 0)


def test_cholesky_insert_singular():
    R = cholesky_insert(np.zeros((0, 0)), [], 1.0)
    with pytest.raises(CompError) as e:
        cholesky_insert(R, [1.0], 1.0)
    assert e.value.code == 'singular_system'


def test_lars_breakpoints_decrease():
    state, g = played_state(16, 4, seed=11, lam=0.05)
    ws = make_workspace(state, state.eta * g)
    lars_solve(state, ws, state.eta * state.lam)
    assert len(ws.breakpoints) >= 2
    assert all(a >= b for a, b in zip(ws.breakpoints, ws.breakpoints[1:]))
    assert ws.breakpoints[-1] == pytest.approx(state.eta * state.lam)


def test_lars_iteration_cap():
    state, g = played_state(16, 4, seed=11, lam=0.05)
    old = conf.g_lars_max_iter_factor
    conf.g_lars_max_iter_factor = 0
    try:
        with pytest.raises(CompError) as e:
            update_l1(state, g)
        assert e.value.code == 'iteration_cap'
    finally:
        conf.g_lars_max_iter_factor = old


def test_update_l1_not_positive_definite():
    state = new_state(sketch_sample(16, 4, 0), 0.5, lam=0.1, delta_r=0.0, delta_c=0.0)
    with pytest.raises(CompError) as e:
        update_l1(state, np.ones(16))
    assert e.value.code == 'not_positive_definite'


def test_dense_lasso_cd():
    A = np.diag([2.0, 4.0])
    x = dense_lasso_cd(A, np.array([-3.0, 1.0]), 1.0)
    np.testing.assert_allclose(x, [1.0, 0.0])


def test_lars_kkt():
    state, g = played_state(16, 4, seed=13, lam=0.2)
    x = update_l1(state, g)
    A = dense_metric(state)
    u = state.eta * g - A @ state.x
    lam = state.eta * state.lam
    r = u + A @ x
    for j in range(16):
        if x[j] == 0.0:
            assert abs(r[j]) <= lam + 1e-7
        else:
            assert r[j] == pytest.approx(-lam * np.sign(x[j]), abs=1e-7)


def test_apply_A_pure_sketched_metric():
    state, g = played_state(8, 8, seed=14)
    pair = regularizer_matrices(state)
    d = np.zeros(8)
    Q = state.sketch.scale ** 2 * pair.K
    Pi = dense_sketch(state.sketch)
    beta = np.random.default_rng(5).standard_normal(8)
    np.testing.assert_allclose(apply_A(state, Q, beta, d), Pi.T @ pair.K @ Pi @ beta, atol=1e-10)


def assert_lasso_optimal(A, u, lam, x, tol=1e-7):
    r = u + A @ x
    for j in range(x.shape[0]):
        if x[j] == 0.0:
            assert abs(r[j]) <= lam + tol
        else:
            assert r[j] == pytest.approx(-lam * np.sign(x[j]), abs=tol)


@pytest.mark.parametrize('n', [8, 16, 32])
@pytest.mark.parametrize('mode', [DeltaMode.InsideSqrt, DeltaMode.OutsideSqrt])
@pytest.mark.parametrize('scaling', [Scaling.Scaled, Scaling.Unscaled])
def test_update_l1_random_instances(n, mode, scaling):
    for k in range(n + 1):
        for i, lam in enumerate([0.0, 0.01, 0.1, 1.0]):
            state, g = played_state(n, k, seed=100 * n + 4 * k + i, scaling=scaling, lam=lam, mode=mode)
            x = update_l1(state, g)
            A = dense_metric(state)
            u = state.eta * g - A @ state.x
            assert_lasso_optimal(A, u, state.eta * lam, x)
            np.testing.assert_allclose(x, dense_lasso_cd(A, u, state.eta * lam), atol=1e-6)


def test_polish_recovers_a_lost_coordinate():
    state, g = played_state(16, 4, seed=13, lam=0.05)
    lam = state.eta * state.lam
    ws = make_workspace(state, state.eta * g)
    beta = lars_solve(state, ws, lam)
    assert np.count_nonzero(beta) >= 2
    # knock one coordinate out of the path result; the polish must bring it back
    ws2 = make_workspace(state, state.eta * g)
    lars_solve(state, ws2, lam)
    dropped = ws2.active[0]
    assert beta[dropped] != 0.0
    ws2.chol = cholesky_delete(ws2.chol, 0)
    ws2.active.pop(0)
    ws2.signs.pop(0)
    start = beta.copy()
    start[dropped] = 0.0
    A = dense_metric(state)
    u = state.eta * g - A @ state.x
    x = updates_l1._polish(state, ws2, start, lam)
    assert_lasso_optimal(A, u, lam, x)
    np.testing.assert_allclose(x, beta, atol=1e-8)
