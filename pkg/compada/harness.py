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
Experiment harness of python-compada: data sources, experiments, grids, benchmarks and the cli.

    $ compada run  --config doc/configs/lowdim_grid.json --out out/lowdim
    $ compada grid --config doc/configs/lowdim_grid.json --out out/grid
    $ compada bench --op wht_sparse --sizes 1024,4096,16384
    $ compada gen --config my.json --out data/lowdim

Every command prints an OperationResponse as json and exits with 0 on success, 1 otherwise.
Outputs are byte-identical for the same config and seed unless record_timing is on.
"""

__all__ = ['load_svmlight', 'dump_svmlight', 'gen_lowdim_correlated', 'gen_rbf_prototypes', 'build_dataset',
           'make_learner', 'ExperimentResult', 'GridResult', 'execute_experiment', 'write_experiment',
           'run_experiment', 'run_grid', 'bench_scaling', 'sparse_wht_report', 'main']

import argparse
import csv
import itertools
import json
import logging
import math
import os
import statistics
import sys
import time
from dataclasses import dataclass, field

from joblib import Parallel, delayed
import numpy as np
import requests
import scipy.sparse
import scipy.spatial.distance

from compada import conf
from compada.adastate import DeltaMode, new_state, observe_gradient
from compada.baselines import OGD, DiagAdaGrad, FullAdaGrad, bound_rhs_diag, bound_rhs_full
from compada.conf import RunConfig, g_logger
from compada.learner import (CompAdaGrad, Dataset, LossFn, LossKind, RegretLedger, bound_rhs_comp, compute_regret,
                             run_game, solve_comparator)
from compada.transforms import (OpCounter, Scaling, SparseVector, apply_sketch, apply_sketch_adjoint, sketch_sample,
                                wht_dense, wht_one_sparse, wht_sparse, wht_trimmed)
from compada.updates_l1 import update_l1
from compada.updates_l2 import update_l2
from compada.util import (CompError, OperationResponse, Regularizer, Status, check_power_of_two,
                          next_power_of_two)

BENCH_OPS = ('wht_dense', 'wht_one_sparse', 'wht_sparse', 'wht_trimmed', 'apply_sketch', 'apply_sketch_adjoint',
             'update_l2', 'update_l1')

TRACE_COLUMNS = ('permutation', 'round', 'composite_loss', 'zero_one', 'cumulative_loss', 'cumulative_zero_one',
                 'examples')


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), '.17g')
    return str(v)


def _output_file(path, newline=None):
    """ open @path for writing, creating its directory first """
    try:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        return open(path, 'w', newline=newline)
    except OSError as e:
        raise CompError('io', 'cannot write %s: %s' % (path, e), {'path': path})


def _write_json(path, payload):
    with _output_file(path) as f:
        f.write(json.dumps(payload, indent=2, sort_keys=True))
        f.write('\n')


# -----------------------------------------------------------
#    data sources
# -----------------------------------------------------------
def _read_source(source) -> str:
    if source.startswith(('http://', 'https://')):
        g_logger.info('fetching svmlight data from %s' % source)
        try:
            r = requests.get(source, timeout=60)
            r.raise_for_status()
        except requests.RequestException as e:
            g_logger.error('could not fetch %s: %s' % (source, e))
            raise CompError('io', 'could not fetch "%s": %s' % (source, e))
        return r.text
    try:
        with open(source) as f:
            return f.read()
    except OSError as e:
        raise CompError('io', 'could not read "%s": %s' % (source, e))


def load_svmlight(source, n_override=None, binarize=True) -> Dataset:
    """ read "label idx:val idx:val ..." lines (1-based indices) from a path or an http(s) url.

    The dimension is padded to a power of two; @n_override (a power of two, at least the
    largest index) fixes it instead. Labels > 0 become +1 and the others -1 when @binarize.
    """
    text = _read_source(source)
    labels, rows, cols, vals = [], [], [], []
    max_index = 0

    def bad(lineno, msg):
        g_logger.error('%s:%d: %s' % (source, lineno, msg))
        return CompError('format', 'line %d: %s' % (lineno, msg), {'line': lineno, 'source': source})

    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            label = float(tokens[0])
        except ValueError:
            raise bad(lineno, 'invalid label "%s"' % tokens[0])
        seen = set()
        for token in tokens[1:]:
            if token.startswith('qid:'):
                continue
            idx_s, sep, val_s = token.partition(':')
            try:
                if not sep:
                    raise ValueError(token)
                idx, val = int(idx_s), float(val_s)
            except ValueError:
                raise bad(lineno, 'malformed feature "%s"' % token)
            if idx < 1:
                raise bad(lineno, 'feature index %d is not 1-based' % idx)
            if idx in seen:
                raise bad(lineno, 'duplicate feature index %d' % idx)
            if not math.isfinite(val):
                raise bad(lineno, 'non-finite value for feature %d' % idx)
            seen.add(idx)
            rows.append(len(labels))
            cols.append(idx - 1)
            vals.append(val)
            max_index = max(max_index, idx)
        labels.append(label)

    if not labels:
        g_logger.warning('no examples in "%s"' % source)
    if n_override is not None:
        check_power_of_two(n_override, 'n_override')
        if n_override < max_index:
            raise CompError('dimension_mismatch', 'n_override %d is below the largest feature index %d'
                            % (n_override, max_index))
        n = n_override
    else:
        n = next_power_of_two(max_index)
    X = scipy.sparse.csr_matrix((np.asarray(vals, dtype=np.float64),
                                 (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
                                shape=(len(labels), n))
    y = np.asarray(labels, dtype=np.float64)
    if binarize:
        y = np.where(y > 0.0, 1.0, -1.0)
    g_logger.info('loaded %d examples of dimension %d from %s' % (len(labels), n, source))
    return Dataset(X, y, {'source': source, 'max_index': max_index})


def dump_svmlight(dataset, path):
    X = scipy.sparse.csr_matrix(dataset.features)
    with _output_file(path) as f:
        for i in range(len(dataset)):
            start, stop = X.indptr[i], X.indptr[i + 1]
            order = np.argsort(X.indices[start:stop], kind='stable')
            items = ['%d:%s' % (X.indices[start + j] + 1, _fmt(X.data[start + j])) for j in order
                     if X.data[start + j] != 0.0]
            f.write(' '.join([_fmt(dataset.labels[i])] + items) + '\n')


def gen_lowdim_correlated(n, d_true, T, noise, seed) -> Dataset:
    """ T examples concentrated near a random d_true-dimensional subspace of R^n.

    x = U z + noise * e with an orthonormal frame U (n x d_true), z and e standard normal;
    label = sign(<v, z>) for a planted unit v, so w = U v separates the noiseless data.
    """
    if not 0 < d_true <= n:
        raise CompError('config', 'lowdim needs 0 < d_true <= n, got d_true=%s, n=%s' % (d_true, n))
    if T < 0 or noise < 0:
        raise CompError('config', 'lowdim needs T >= 0 and noise >= 0')
    rng = np.random.default_rng(seed)
    U, _ = np.linalg.qr(rng.standard_normal((n, d_true)))
    v = rng.standard_normal(d_true)
    v /= np.linalg.norm(v)
    Z = rng.standard_normal((T, d_true))
    X = Z @ U.T + noise * rng.standard_normal((T, n))
    y = np.where(Z @ v >= 0.0, 1.0, -1.0)
    padded = next_power_of_two(n)
    ds = Dataset(X, y, {'generator': 'lowdim', 'separator': U @ v, 'frame': U})
    return ds.padded(padded)


def gen_rbf_prototypes(dataset, m, bandwidth, seed, balanced=True) -> Dataset:
    """ featurize @dataset with m gaussian kernels centered at training examples:
    phi_j(x) = exp(-||x - p_j||^2 / (2 bandwidth^2)); output dimension padded to a power of two.
    """
    if not bandwidth > 0:
        raise CompError('config', 'rbf bandwidth must be positive, got %s' % bandwidth)
    if not 0 < m <= len(dataset):
        raise CompError('config', 'rbf needs 0 < prototypes <= examples, got %s' % m)
    rng = np.random.default_rng(seed)
    positives = np.flatnonzero(dataset.labels > 0)
    negatives = np.flatnonzero(dataset.labels <= 0)
    if balanced and len(positives) >= m - m // 2 and len(negatives) >= m // 2:
        chosen = np.concatenate((rng.choice(positives, m - m // 2, replace=False),
                                 rng.choice(negatives, m // 2, replace=False)))
    else:
        chosen = rng.choice(len(dataset), m, replace=False)
    chosen = np.sort(chosen)
    X = dataset.dense()
    sq = scipy.spatial.distance.cdist(X, X[chosen], 'sqeuclidean')
    features = np.exp(-sq / (2.0 * bandwidth * bandwidth))
    meta = dict(dataset.meta)
    meta.update({'prototypes': chosen, 'bandwidth': bandwidth})
    return Dataset(features, dataset.labels, meta).padded(next_power_of_two(m))


def build_dataset(config) -> Dataset:
    if config.dataset == 'svmlight':
        ds = load_svmlight(config.dataset_path, n_override=config.n or None)
    else:
        n = config.n or next_power_of_two(2 * config.d_true)
        ds = gen_lowdim_correlated(n, config.d_true, config.n_samples, config.noise, config.seed)
    if config.dataset == 'rbf' or config.rbf_prototypes > 0:
        ds = gen_rbf_prototypes(ds, config.rbf_prototypes, config.rbf_bandwidth, config.seed)
        if config.n:
            ds = ds.padded(config.n)
    return ds


def make_learner(config, n):
    regularizer = Regularizer(config.regularizer)
    if config.algorithm == 'CompAdaGrad':
        return CompAdaGrad(n, config.k, config.eta, config.lam, config.tau, config.delta_r, config.delta_c,
                           DeltaMode(config.delta_mode), Scaling(config.scaling), config.seed, regularizer)
    if config.algorithm == 'FullAdaGrad':
        return FullAdaGrad(n, config.eta, config.lam, config.delta_r, regularizer)
    if config.algorithm == 'DiagAdaGrad':
        return DiagAdaGrad(n, config.eta, config.lam, config.delta_c, regularizer)
    return OGD(n, config.eta, config.lam, regularizer)


# -----------------------------------------------------------
#    experiments
# -----------------------------------------------------------
@dataclass
class ExperimentResult(object):
    config: RunConfig
    traces: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    @property
    def status(self) -> Status:
        return Status[self.summary.get('status', 'ERROR')]


def _rate(mistakes, count):
    return mistakes / count if count else None


def regret_report(ledger, config) -> {}:
    comparator = solve_comparator(ledger)
    x_star, _, converged = comparator
    report = {'comparator_converged': converged}
    for variant in ('iterate', 'next'):
        report['regret_' + variant] = compute_regret(ledger, variant, comparator).regret
    learner = ledger.learner
    if isinstance(learner, CompAdaGrad) and learner.analyzed:
        report['bound'] = bound_rhs_comp(ledger, x_star, config.eta, config.delta_r)
    elif isinstance(learner, FullAdaGrad):
        report['bound'] = bound_rhs_full(ledger, x_star, config.eta, config.delta_r)
    elif isinstance(learner, DiagAdaGrad):
        report['bound'] = bound_rhs_diag(ledger, x_star, config.eta, config.delta_c)
    return report


def execute_experiment(config) -> ExperimentResult:
    """ run config.permutations random train/test splits of the dataset; writes nothing """
    config.validate()
    ds = build_dataset(config)
    loss = LossFn(LossKind(config.loss))
    cut = int(math.floor(config.train_fraction * len(ds)))
    result = ExperimentResult(config=config)
    per_permutation = []
    wall = 0.0
    for p in range(config.permutations):
        order = np.random.default_rng([config.seed, p]).permutation(len(ds))
        train, test = ds.subset(order[:cut]), ds.subset(order[cut:])
        learner = make_learner(config, ds.n)
        ledger = RegretLedger(learner, loss) if config.regret_check and p == 0 else None
        started = time.perf_counter()
        trace = run_game(learner, train, config, ledger)
        wall += time.perf_counter() - started
        result.traces.append(trace)
        x = trace.final_x
        entry = {'permutation': p, 'status': trace.status.name, 'rounds': len(trace.rows),
                 'cumulative_loss': trace.cumulative_loss,
                 'online_zero_one': trace.online_zero_one if trace.rows else None,
                 'final_train_zero_one': _rate(LossFn.mistakes(x, train.features, train.labels), len(train)),
                 'test_zero_one': _rate(LossFn.mistakes(x, test.features, test.labels), len(test))}
        if ledger is not None and trace.status == Status.SUCCESS:
            entry.update(regret_report(ledger, config))
        per_permutation.append(entry)

    def mean(key):
        values = [e[key] for e in per_permutation if e[key] is not None]
        return float(np.mean(values)) if values else None

    failed = [e['status'] for e in per_permutation if e['status'] != Status.SUCCESS.name]
    result.summary = {'algorithm': config.algorithm, 'regularizer': config.regularizer, 'loss': config.loss,
                      'n': ds.n, 'k': config.k if config.algorithm == 'CompAdaGrad' else None,
                      'examples': len(ds), 'train_examples': cut, 'seed': config.seed,
                      'status': failed[0] if failed else Status.SUCCESS.name,
                      'online_zero_one': mean('online_zero_one'),
                      'final_train_zero_one': mean('final_train_zero_one'),
                      'test_zero_one': mean('test_zero_one'),
                      'cumulative_loss': mean('cumulative_loss'),
                      'permutations': per_permutation}
    if config.record_timing:
        result.summary['wall_time'] = wall
    return result


def write_experiment(result, prefix) -> []:
    """ <prefix>.trace.csv (one row per round and permutation) and <prefix>.summary.json """
    timing = result.config.record_timing
    trace_path, summary_path = prefix + '.trace.csv', prefix + '.summary.json'
    with _output_file(trace_path, newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(TRACE_COLUMNS + (('wall_time',) if timing else ()))
        for p, trace in enumerate(result.traces):
            for row in trace.rows:
                values = [p, row.round, row.composite_loss, row.zero_one, row.cumulative_loss,
                          row.cumulative_zero_one, row.examples] + ([row.wall_time] if timing else [])
                writer.writerow([_fmt(v) for v in values])
    _write_json(summary_path, result.summary)
    return [trace_path, summary_path]


def run_experiment(config, out=None) -> (ExperimentResult, []):
    result = execute_experiment(config)
    files = write_experiment(result, out or config.outputs)
    return result, files


# -----------------------------------------------------------
#    grid
# -----------------------------------------------------------
@dataclass
class GridResult(object):
    cells: list  # RunConfig per cell
    results: list  # ExperimentResult per cell
    winner: int = -1
    files: list = field(default_factory=list)


def expand_grid(template) -> []:
    """ one RunConfig per point of the cartesian product of the grid axes (axes in sorted order) """
    base = {k: v for k, v in template.to_dict().items() if not k.startswith(conf.GRID_PREFIX)}
    axes = sorted(template.grid)
    cells = []
    for i, values in enumerate(itertools.product(*[template.grid[a] for a in axes])):
        d = dict(base)
        d.update(zip(axes, values))
        d['outputs'] = '%s.cell%03d' % (template.outputs, i)
        cells.append(RunConfig.from_dict(d))
    return cells


def _execute_cell(config) -> ExperimentResult:
    try:
        return execute_experiment(config)
    except CompError as e:
        g_logger.error('grid cell %s failed: %s' % (config.outputs, e))
        return ExperimentResult(config=config, summary={'status': Status.ERROR.name, 'error': e.to_dict()})


def select_winner(results, selection='online') -> int:
    key = 'online_zero_one' if selection == 'online' else 'final_train_zero_one'
    best, best_score = -1, None
    for i, r in enumerate(results):
        score = r.summary.get(key)
        if r.status != Status.SUCCESS or score is None:
            continue
        if best_score is None or score < best_score:
            best, best_score = i, score
    return best


def run_grid(template, write=True) -> GridResult:
    """ execute every cell on template.workers threads; only this thread writes files """
    template.validate()
    cells = expand_grid(template)
    g_logger.info('grid: %d cells on %d workers' % (len(cells), template.workers))
    results = Parallel(n_jobs=template.workers, prefer='threads')(delayed(_execute_cell)(cell) for cell in cells)
    grid = GridResult(cells=cells, results=results, winner=select_winner(results, template.selection))
    if not write:
        return grid
    for cell, result in zip(cells, results):
        if result.traces:
            grid.files.extend(write_experiment(result, cell.outputs))
    axes = sorted(template.grid)
    table_path = template.outputs + '.grid.csv'
    with _output_file(table_path, newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(['cell'] + axes + ['status', 'online_zero_one', 'final_train_zero_one', 'test_zero_one'])
        for i, (cell, result) in enumerate(zip(cells, results)):
            s = result.summary
            writer.writerow([i] + [_fmt(getattr(cell, a)) for a in axes] +
                            [s.get('status')] + [_fmt(s.get(key)) for key in
                                                 ('online_zero_one', 'final_train_zero_one', 'test_zero_one')])
    summary_path = template.outputs + '.grid.json'
    winner = {'cell': grid.winner, 'selection': template.selection,
              'config': cells[grid.winner].to_dict() if grid.winner >= 0 else None,
              'summary': results[grid.winner].summary if grid.winner >= 0 else None}
    _write_json(summary_path, winner)
    grid.files.extend([table_path, summary_path])
    return grid


# -----------------------------------------------------------
#    benchmarks
# -----------------------------------------------------------
def _bench_call(op, n, k, rng):
    """ a zero-argument callable running @op once on fresh random inputs of size @n """
    if op == 'wht_dense':
        v = rng.standard_normal(n)
        return lambda counter=None: wht_dense(v, counter)
    if op == 'wht_one_sparse':
        i = int(rng.integers(0, n))
        return lambda counter=None: wht_one_sparse(n, i, 1.0, counter)
    if op == 'wht_sparse':
        idx = np.sort(rng.choice(n, min(k, n), replace=False))
        sv = SparseVector(n, idx, rng.standard_normal(idx.shape[0]))
        return lambda counter=None: wht_sparse(sv, counter)
    S = sketch_sample(n, min(k, n), int(rng.integers(0, 2 ** 31)))
    if op == 'wht_trimmed':
        v = rng.standard_normal(n)
        return lambda counter=None: wht_trimmed(v, S.rows, counter)
    if op == 'apply_sketch':
        v = rng.standard_normal(n)
        return lambda counter=None: apply_sketch(S, v, counter=counter)
    if op == 'apply_sketch_adjoint':
        z = rng.standard_normal(S.k)
        return lambda counter=None: apply_sketch_adjoint(S, z, counter=counter)
    state = new_state(S, 0.1, 0.01)
    g = rng.standard_normal(n)
    observe_gradient(state, g)
    if op == 'update_l2':
        return lambda counter=None: update_l2(state, g, counter)
    return lambda counter=None: update_l1(state, g, counter=counter)


def bench_scaling(op, sizes, repetitions=5, k=32, seed=0) -> []:
    """ median wall time of @op over @repetitions runs, and its operation count, per size n """
    if op not in BENCH_OPS:
        raise CompError('config', 'unknown bench op: %s (one of %s)' % (op, ', '.join(BENCH_OPS)))
    if repetitions < 1:
        raise CompError('config', 'repetitions must be >= 1')
    rng = np.random.default_rng(seed)
    rows = []
    for n in sizes:
        check_power_of_two(n, 'bench size')
        call = _bench_call(op, n, k, rng)
        counter = OpCounter()
        call(counter)
        times = []
        for _ in range(repetitions):
            started = time.perf_counter()
            call()
            times.append(time.perf_counter() - started)
        rows.append({'op': op, 'n': n, 'k': min(k, n), 'median_seconds': statistics.median(times),
                     'ops': counter.ops})
        g_logger.info('bench %s n=%d: %.3g s, %d ops' % (op, n, rows[-1]['median_seconds'], counter.ops))
    return rows


def sparse_wht_report(n=2 ** 14, sparsities=(1, 2, 4, 8, 16, 32, 64), seed=0, trials=3) -> {}:
    """ operation counts of wht_sparse against n log2(2r) for r-sparse inputs.

    'max_constant' is the largest ops / (n log2(2r)); 'exponent' the fitted slope of
    log(ops) against log(log2(2r)), close to 1 when the cost is n log r.
    """
    check_power_of_two(n)
    rng = np.random.default_rng(seed)
    rows = []
    for r in sparsities:
        worst = 0
        for _ in range(trials):
            idx = np.sort(rng.choice(n, r, replace=False))
            counter = OpCounter()
            wht_sparse(SparseVector(n, idx, rng.standard_normal(r) + 3.0), counter)
            worst = max(worst, counter.ops)
        reference = n * math.log2(2 * r)
        rows.append({'r': r, 'ops': worst, 'reference': reference, 'constant': worst / reference})
    x = np.log([math.log2(2 * row['r']) for row in rows])
    y = np.log([row['ops'] for row in rows])
    exponent = float(np.polyfit(x, y, 1)[0]) if len(rows) > 1 else float('nan')
    return {'n': n, 'rows': rows, 'exponent': exponent, 'max_constant': max(row['constant'] for row in rows)}


# -----------------------------------------------------------
#    cli
# -----------------------------------------------------------
def _cmd_run(config, args) -> OperationResponse:
    result, files = run_experiment(config)
    status = result.status
    return OperationResponse(status=status, message='ok' if status == Status.SUCCESS else 'run did not complete',
                             payload={'files': files, 'summary': result.summary})


def _cmd_grid(config, args) -> OperationResponse:
    grid = run_grid(config)
    if grid.winner < 0:
        return OperationResponse(status=Status.FAILED, message='no grid cell completed',
                                 payload={'files': grid.files})
    return OperationResponse(status=Status.SUCCESS, payload={'files': grid.files, 'winner': grid.winner,
                                                             'cells': len(grid.cells)})


def _cmd_bench(config, args) -> OperationResponse:
    try:
        sizes = [int(s) for s in args.sizes.split(',') if s.strip()]
    except ValueError:
        raise CompError('config', 'invalid --sizes: %s' % args.sizes)
    if not sizes:
        raise CompError('config', '--sizes needs at least one size')
    if args.report:
        payload = sparse_wht_report(n=sizes[-1], seed=config.seed)
    else:
        payload = {'rows': bench_scaling(args.op, sizes, args.repetitions, args.k, config.seed)}
    path = config.outputs + '.bench.json'
    _write_json(path, payload)
    payload['files'] = [path]
    return OperationResponse(status=Status.SUCCESS, payload=payload)


def _cmd_gen(config, args) -> OperationResponse:
    ds = build_dataset(config)
    path = config.outputs + '.svm'
    dump_svmlight(ds, path)
    return OperationResponse(status=Status.SUCCESS, payload={'files': [path], 'examples': len(ds), 'n': ds.n})


_COMMANDS = {'run': _cmd_run, 'grid': _cmd_grid, 'bench': _cmd_bench, 'gen': _cmd_gen}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='compada', description='sketched composite AdaGrad experiments')
    parser.add_argument('-v', '--verbose', action='count', default=0, help='-v: info, -vv: debug')
    sub = parser.add_subparsers(dest='command')
    sub.required = True
    for name, text in (('run', 'run one experiment'), ('grid', 'run a hyper-parameter grid'),
                       ('bench', 'time the kernels and updates'), ('gen', 'write a synthetic dataset as svmlight')):
        p = sub.add_parser(name, help=text)
        p.add_argument('--config', help='json config file (defaults when omitted)')
        p.add_argument('--seed', type=int, help='overrides the seed of the config')
        p.add_argument('--out', help='output prefix, overrides "outputs" of the config')
        if name == 'bench':
            p.add_argument('--op', choices=BENCH_OPS, default='wht_sparse')
            p.add_argument('--sizes', default='1024,4096,16384', help='comma separated powers of two')
            p.add_argument('--repetitions', type=int, default=5)
            p.add_argument('--k', type=int, default=32)
            p.add_argument('--report', action='store_true', help='sparse WHT op-count report instead of timings')
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(format='%(asctime)s %(name)s %(levelname)s %(message)s')
    if args.verbose:
        conf.set_global_logger_level(logging.DEBUG if args.verbose > 1 else logging.INFO)
    try:
        config = RunConfig.load(args.config) if args.config else RunConfig()
        if args.seed is not None:
            config = config.replace(seed=args.seed)
        if args.out:
            config = config.replace(outputs=args.out)
        response = _COMMANDS[args.command](config, args)
    except CompError as e:
        response = OperationResponse.from_error(e)
    except Exception as e:
        g_logger.error('%s failed: %r' % (args.command, e))
        response = OperationResponse.from_error(e)
    print(response.to_json())
    return 0 if response.ok() else 1


if __name__ == '__main__':
    sys.exit(main())
