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

import numpy as np
import pytest
import scipy.sparse

from compada import conf
from compada.baselines import OGD, DiagAdaGrad
from compada.conf import RunConfig
from compada.learner import *
from compada.transforms import Scaling
from compada.util import CompError, Regularizer, Status


def small_stream(m=40, n=8, seed=0):
    r = np.random.default_rng(seed)
    X = r.standard_normal((m, n))
    w = r.standard_normal(n)
    y = np.where(X @ w + 0.3 * r.standard_normal(m) > 0, 1.0, -1.0)
    return Dataset(X, y)


@pytest.mark.parametrize('kind', [LossKind.Logistic, LossKind.Squared, LossKind.Hinge])
def test_loss_gradient_finite_difference(kind):
    loss = LossFn(kind)
    r = np.random.default_rng(1)
    A = r.standard_normal((5, 4))
    y = np.array([1.0, -1.0, 1.0, 1.0, -1.0])
    x = 0.1 * r.standard_normal(4)
    g = loss.gradient(x, A, y)
    eps = 1e-6
    for j in range(4):
        e = np.zeros(4)
        e[j] = eps
        fd = (loss.value(x + e, A, y) - loss.value(x - e, A, y)) / (2 * eps)
        assert g[j] == pytest.approx(fd, abs=1e-6)


def test_loss_values():
    margins = np.array([0.0, 2.0, -1.0])
    y = np.array([1.0, 1.0, 1.0])
    np.testing.assert_allclose(LossFn(LossKind.Logistic).values(margins, y), np.log1p(np.exp(-margins)))
    np.testing.assert_allclose(LossFn(LossKind.Hinge).values(margins, y), [1.0, 0.0, 2.0])
    np.testing.assert_allclose(LossFn(LossKind.Squared).values(margins, y), [0.5, 0.5, 2.0])
    # no overflow for large margins
    assert np.isfinite(LossFn(LossKind.Logistic).values(np.array([-1000.0]), np.array([1.0]))[0])


def test_mistakes():
    A = np.array([[1.0], [-1.0], [0.0]])
    assert LossFn.mistakes(np.array([1.0]), A, np.array([1.0, 1.0, -1.0])) == 1


def test_dataset():
    X = scipy.sparse.csr_matrix(np.array([[1.0, 0.0], [0.0, 2.0], [3.0, 0.0]]))
    ds = Dataset(X, [1, -1, 1])
    assert len(ds) == 3 and ds.n == 2 and ds.is_sparse
    A, y = ds.batch(1, 3)
    np.testing.assert_array_equal(A, [[0.0, 2.0], [3.0, 0.0]])
    np.testing.assert_array_equal(y, [-1.0, 1.0])
    p = ds.padded(4)
    assert p.n == 4
    np.testing.assert_array_equal(p.dense()[:, :2], ds.dense())
    np.testing.assert_array_equal(ds.subset([2, 0]).labels, [1.0, 1.0])
    with pytest.raises(CompError):
        ds.padded(1)
    with pytest.raises(CompError):
        Dataset(np.zeros((2, 2)), [1.0])
    assert ds.__repr__()


def test_comp_adagrad_learner():
    learner = CompAdaGrad(16, 4, 0.5, lam=0.1, seed=3)
    assert learner.__repr__()
    g = np.random.default_rng(2).standard_normal(16)
    x = learner.update(g)
    np.testing.assert_array_equal(learner.state.x, x)
    assert learner.state.round == 1
    assert not learner.analyzed
    assert CompAdaGrad(16, 4, 0.5, scaling=Scaling.Unscaled).analyzed


def test_run_game_trace():
    stream = small_stream()
    config = RunConfig(batch_size=7, loss='Logistic')
    trace = run_game(CompAdaGrad(8, 3, 0.5, seed=1), stream, config)
    assert trace.status == Status.SUCCESS
    assert len(trace.rows) == 6
    assert trace.rows[-1].examples == 40
    total_loss, total_mistakes = 0.0, 0
    for row in trace.rows:
        total_loss += row.composite_loss
        total_mistakes += row.zero_one
        assert row.cumulative_loss == pytest.approx(total_loss)
        assert row.cumulative_zero_one == total_mistakes
    # x_1 = 0 predicts -1 everywhere
    assert trace.rows[0].zero_one == int(np.sum(stream.labels[:7] > 0))
    assert trace.rows[0].composite_loss == pytest.approx(np.log(2.0))
    assert trace.final_x.shape == (8,)


def test_run_game_limits_and_errors():
    stream = small_stream()
    trace = run_game(OGD(8, 0.1), stream, RunConfig(batch_size=1, T=5))
    assert len(trace.rows) == 5
    with pytest.raises(CompError) as e:
        run_game(OGD(8, 0.1), Dataset(np.zeros((0, 8)), []), RunConfig())
    assert e.value.code == 'empty_dataset'
    with pytest.raises(CompError) as e:
        run_game(OGD(4, 0.1), stream, RunConfig())
    assert e.value.code == 'dimension_mismatch'


def test_run_game_non_finite_fails():
    X = np.ones((4, 2))
    X[2, 0] = np.inf
    trace = run_game(OGD(2, 0.1), Dataset(X, [1, -1, 1, 1]), RunConfig(batch_size=1))
    assert trace.status == Status.FAILED
    assert len(trace.rows) == 2


def test_regret_ledger_guard():
    old = (conf.g_regret_guard_n, conf.g_regret_guard_T)
    conf.set_regret_guard(4, 2)
    try:
        with pytest.raises(CompError):
            RegretLedger(OGD(8, 0.1), LossFn())
        ledger = RegretLedger(OGD(4, 0.1), LossFn())
        with pytest.raises(CompError) as e:
            run_game(OGD(4, 0.1), small_stream(n=4), RunConfig(batch_size=1), ledger)
        assert e.value.code == 'regret_guard'
    finally:
        conf.set_regret_guard(*old)


def test_comparator_is_optimal():
    stream = small_stream(m=30, n=4)
    learner = DiagAdaGrad(4, 0.5, lam=0.2)
    ledger = RegretLedger(learner, LossFn())
    run_game(learner, stream, RunConfig(batch_size=3), ledger)
    x_star, value, converged = solve_comparator(ledger)
    assert converged
    grad = sum(LossFn().gradient(x_star, A, y) for A, y in ledger.batches) + len(ledger) * 0.2 * x_star
    np.testing.assert_allclose(grad, np.zeros(4), atol=1e-3)
    result = compute_regret(ledger)
    assert result.comparator_value == pytest.approx(value)
    assert result.learner_value == pytest.approx(sum(ledger.composite_losses))
    assert compute_regret(ledger, 'next').learner_value == pytest.approx(sum(ledger.composite_losses_next))


def test_comparator_l1_kkt():
    stream = small_stream(m=30, n=4, seed=5)
    learner = OGD(4, 0.5, lam=0.05, regularizer=Regularizer.L1)
    ledger = RegretLedger(learner, LossFn())
    run_game(learner, stream, RunConfig(batch_size=1), ledger)
    x_star, value, converged = solve_comparator(ledger)
    grad = sum(LossFn().gradient(x_star, A, y) for A, y in ledger.batches)
    lam_total = len(ledger) * 0.05
    for j in range(4):
        if x_star[j] != 0.0:
            assert grad[j] == pytest.approx(-lam_total * np.sign(x_star[j]), abs=1e-3)
        else:
            assert abs(grad[j]) <= lam_total + 1e-3


def test_hinge_comparator_flagged():
    learner = OGD(4, 0.5)
    ledger = RegretLedger(learner, LossFn(LossKind.Hinge))
    run_game(learner, small_stream(m=10, n=4), RunConfig(batch_size=2, loss='Hinge'), ledger)
    assert not compute_regret(ledger).converged


def test_bound_rhs_comp_rejects_other_configs():
    learner = CompAdaGrad(8, 2, 0.5, scaling=Scaling.Scaled)
    ledger = RegretLedger(learner, LossFn())
    run_game(learner, small_stream(m=6), RunConfig(batch_size=2), ledger)
    with pytest.raises(CompError) as e:
        bound_rhs_comp(ledger, np.zeros(8), 0.5, 0.1)
    assert e.value.code == 'not_analyzed'


def test_regret_within_comp_bound():
    learner = CompAdaGrad(8, 3, 0.5, lam=0.0, delta_r=0.5, delta_c=0.5, scaling=Scaling.Unscaled, seed=4)
    ledger = RegretLedger(learner, LossFn())
    run_game(learner, small_stream(m=60, seed=9), RunConfig(batch_size=1), ledger)
    result = compute_regret(ledger, 'next')
    assert result.regret <= bound_rhs_comp(ledger, result.x_star, 0.5, 0.5) + 1e-9
