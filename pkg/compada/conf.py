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
configuration of python-compada: logger, numeric tunables and the experiment config (RunConfig)
"""

import dataclasses
import json
import logging
import os
from dataclasses import dataclass, field

# -----------------------------------------------------------
# log settings.

g_logger = logging.getLogger("python-compada")


def set_logger_level(logger, logging_level=logging.DEBUG):
    """ set logger level """
    logger.setLevel(logging_level)


# for production mode, you might set it to logging.WARNING
def set_global_logger_level(logging_level=logging.DEBUG):
    return set_logger_level(g_logger, logging_level)


def silent_global_logger():
    """ silent the global logger """
    return set_global_logger_level(logging.CRITICAL)


set_global_logger_level(logging.WARNING)  # for release
# set_global_logger_level(logging.DEBUG) # for development

# -----------------------------------------------------------
# numeric tunables.

# eigenvalues below g_eig_clamp_rel * (largest eigenvalue) are treated as 0 before a square root
g_eig_clamp_rel = 1e-12

# largest n for which an n x n matrix may be materialized (full-matrix AdaGrad, dense oracles)
g_dense_guard = 256

# regret bookkeeping keeps the whole gradient/iterate history; only allowed at desk scale
g_regret_guard_n = 64
g_regret_guard_T = 1000

# smallest admissible pivot of a Cholesky insert
g_cholesky_pivot_min = 1e-12

# LARS gives up after g_lars_max_iter_factor * n steps
g_lars_max_iter_factor = 3

# comparator solve of the regret ledger
g_comparator_max_iter = 20000
g_comparator_rtol = 1e-10


def set_eig_clamp_rel(rel):
    global g_eig_clamp_rel
    g_eig_clamp_rel = rel


def set_dense_guard(n):
    global g_dense_guard
    g_dense_guard = n


def set_regret_guard(n, T):
    global g_regret_guard_n, g_regret_guard_T
    g_regret_guard_n = n
    g_regret_guard_T = T


def set_comparator_limits(max_iter, rtol):
    global g_comparator_max_iter, g_comparator_rtol
    g_comparator_max_iter = max_iter
    g_comparator_rtol = rtol


# -----------------------------------------------------------
# experiment configuration.

SCHEMA_VERSION = 1
GRID_PREFIX = 'grid.'

ALGORITHMS = ('CompAdaGrad', 'DiagAdaGrad', 'FullAdaGrad', 'OGD')
REGULARIZERS = ('L2Sq', 'L1')
LOSSES = ('Logistic', 'Squared', 'Hinge')
DELTA_MODES = ('InsideSqrt', 'OutsideSqrt')
SCALINGS = ('Scaled', 'Unscaled')
DATASETS = ('lowdim', 'svmlight', 'rbf')
SELECTIONS = ('online', 'final')


@dataclass
class RunConfig(object):
    """ configuration of one experiment (one cell of a grid).

    Stored on disk as a flat json object. Every key must be a field below, except
    keys starting with "grid." which hold the value lists of grid axes, eg:
        {"schema_version": 1, "algorithm": "CompAdaGrad", "grid.eta": [0.1, 1.0]}
    """
    schema_version: int = SCHEMA_VERSION
    algorithm: str = 'CompAdaGrad'
    regularizer: str = 'L2Sq'
    loss: str = 'Logistic'

    n: int = 0  # 0: take the (padded) dimension of the data
    k: int = 8
    seed: int = 0
    eta: float = 0.1
    lam: float = 0.0
    tau: float = 1.0
    delta_r: float = 0.1
    delta_c: float = 0.1
    delta_mode: str = 'OutsideSqrt'
    scaling: str = 'Scaled'
    batch_size: int = 160
    T: int = 0  # number of training examples to stream, 0: all of them

    dataset: str = 'lowdim'
    dataset_path: str = ''  # local path or http(s) url of a svmlight file
    n_samples: int = 4000
    d_true: int = 16
    noise: float = 0.05
    rbf_prototypes: int = 0  # > 0: featurize the base dataset with gaussian prototypes
    rbf_bandwidth: float = 0.0

    train_fraction: float = 0.75
    permutations: int = 4
    selection: str = 'online'  # 'online': online zero-one loss, 'final': final hypothesis training loss
    regret_check: bool = False
    record_timing: bool = False
    workers: int = 1
    outputs: str = 'compada-out/run'

    grid: dict = field(default_factory=dict)

    def validate(self):
        """ raise CompError(config) if a field is out of its domain """
        from compada.util import CompError

        def check(cond, msg):
            if not cond:
                raise CompError('config', msg)

        check(self.schema_version == SCHEMA_VERSION,
              'unsupported schema_version: %s (expected %d)' % (self.schema_version, SCHEMA_VERSION))
        check(self.algorithm in ALGORITHMS, 'unknown algorithm: %s' % self.algorithm)
        check(self.regularizer in REGULARIZERS, 'unknown regularizer: %s' % self.regularizer)
        check(self.loss in LOSSES, 'unknown loss: %s' % self.loss)
        check(self.delta_mode in DELTA_MODES, 'unknown delta_mode: %s' % self.delta_mode)
        check(self.scaling in SCALINGS, 'unknown scaling: %s' % self.scaling)
        check(self.dataset in DATASETS, 'unknown dataset: %s' % self.dataset)
        check(self.selection in SELECTIONS, 'unknown selection: %s' % self.selection)
        check(self.n >= 0 and self.k >= 0, 'n and k must be nonnegative')
        check(self.seed >= 0, 'seed must be nonnegative')
        check(self.eta > 0, 'eta must be positive')
        check(self.lam >= 0 and self.tau >= 0, 'lam and tau must be nonnegative')
        check(self.delta_r >= 0 and self.delta_c >= 0, 'delta_r and delta_c must be nonnegative')
        check(self.batch_size >= 1, 'batch_size must be >= 1')
        check(self.T >= 0, 'T must be nonnegative')
        check(0.0 < self.train_fraction <= 1.0, 'train_fraction must be in (0, 1]')
        check(self.permutations >= 1, 'permutations must be >= 1')
        check(self.workers >= 1, 'workers must be >= 1')
        if self.dataset == 'svmlight':
            check(bool(self.dataset_path), 'dataset "svmlight" needs dataset_path')
        if self.dataset == 'lowdim':
            check(0 < self.d_true and self.n_samples > 0, 'lowdim needs d_true > 0 and n_samples > 0')
        for axis, values in self.grid.items():
            check(axis in _field_types(), 'invalid grid axis: %s' % axis)
            check(axis not in ('grid', 'schema_version'), 'invalid grid axis: %s' % axis)
            check(isinstance(values, list) and len(values) > 0, 'grid axis %s needs a non-empty list' % axis)
        return self

    def to_dict(self) -> {}:
        d = {}
        for f in dataclasses.fields(self):
            if f.name == 'grid':
                continue
            d[f.name] = getattr(self, f.name)
        for axis, values in self.grid.items():
            d[GRID_PREFIX + axis] = list(values)
        return d

    @classmethod
    def from_dict(cls, d) -> 'RunConfig':
        from compada.util import CompError

        types = _field_types()
        kws = {}
        grid = {}
        for key, value in d.items():
            if key.startswith(GRID_PREFIX):
                grid[key[len(GRID_PREFIX):]] = value
                continue
            if key not in types or key == 'grid':
                raise CompError('config', 'unknown config key: %s' % key)
            kws[key] = _coerce(key, types[key], value)
        config = cls(**kws)
        config.grid = grid
        return config.validate()

    def replace(self, **changes) -> 'RunConfig':
        """ a copy with @changes applied (values coerced to the field types) """
        types = _field_types()
        d = self.to_dict()
        for key, value in changes.items():
            d[key] = _coerce(key, types.get(key, object), value)
        return RunConfig.from_dict(d)

    def save(self, path):
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, 'w') as f:
            f.write(json.dumps(self.to_dict(), indent=2, sort_keys=True))
            f.write('\n')

    @classmethod
    def load(cls, path) -> 'RunConfig':
        from compada.util import CompError

        try:
            with open(path) as f:
                d = json.load(f)
        except (OSError, ValueError) as e:
            raise CompError('config', 'could not read config "%s": %s' % (path, e))
        if not isinstance(d, dict):
            raise CompError('config', 'config "%s" is not a flat json object' % path)
        return cls.from_dict(d)


def _field_types():
    return {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _coerce(key, kind, value):
    from compada.util import CompError

    try:
        if kind in (int, 'int'):
            if isinstance(value, bool) or float(value) != int(value):
                raise ValueError('not an integer')
            return int(value)
        if kind in (float, 'float'):
            if isinstance(value, bool):
                raise ValueError('not a number')
            return float(value)
        if kind in (bool, 'bool'):
            if not isinstance(value, bool):
                raise ValueError('not a boolean')
            return value
        if kind in (str, 'str'):
            if not isinstance(value, str):
                raise ValueError('not a string')
            return value
    except (TypeError, ValueError) as e:
        raise CompError('config', 'bad value for %s: %r (%s)' % (key, value, e))
    return value
