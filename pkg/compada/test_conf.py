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

import json
import logging

import pytest

from compada import conf
from compada.conf import *
from compada.util import *


def test_logger_level():
    set_global_logger_level(logging.INFO)
    assert g_logger.level == logging.INFO
    silent_global_logger()
    assert g_logger.level == logging.CRITICAL
    set_global_logger_level(logging.WARNING)


def test_default_config_is_valid():
    config = RunConfig()
    assert config.validate() is config
    assert config.algorithm == 'CompAdaGrad'
    assert config.schema_version == SCHEMA_VERSION


def test_config_from_dict_grid_keys():
    config = RunConfig.from_dict({'algorithm': 'DiagAdaGrad', 'eta': 1, 'grid.eta': [0.1, 1.0], 'grid.lam': [0.0]})
    assert config.algorithm == 'DiagAdaGrad'
    assert config.eta == 1.0 and isinstance(config.eta, float)
    assert config.grid == {'eta': [0.1, 1.0], 'lam': [0.0]}
    d = config.to_dict()
    assert d['grid.eta'] == [0.1, 1.0]
    assert 'grid' not in d
    assert RunConfig.from_dict(d) == config


@pytest.mark.parametrize('d', [
    {'no_such_key': 1},
    {'algorithm': 'SGD'},
    {'eta': 0.0},
    {'k': 2.5},
    {'regret_check': 'yes'},
    {'schema_version': 99},
    {'grid.eta': []},
    {'grid.no_such_axis': [1]},
    {'dataset': 'svmlight'},
])
def test_config_rejects(d):
    with pytest.raises(CompError) as e:
        RunConfig.from_dict(d)
    assert e.value.code == 'config'


def test_config_save_load(tmp_path):
    config = RunConfig().replace(seed=7, lam='0.5')
    assert config.lam == 0.5
    path = str(tmp_path / 'sub' / 'c.json')
    config.save(path)
    with open(path) as f:
        assert json.load(f)['seed'] == 7
    assert RunConfig.load(path) == config


def test_config_load_errors(tmp_path):
    with pytest.raises(CompError):
        RunConfig.load(str(tmp_path / 'missing.json'))
    path = tmp_path / 'list.json'
    path.write_text('[1, 2]')
    with pytest.raises(CompError):
        RunConfig.load(str(path))


def test_tunable_setters():
    old = conf.g_dense_guard
    set_dense_guard(16)
    assert conf.g_dense_guard == 16
    set_dense_guard(old)
    n, T = conf.g_regret_guard_n, conf.g_regret_guard_T
    set_regret_guard(8, 10)
    assert (conf.g_regret_guard_n, conf.g_regret_guard_T) == (8, 10)
    set_regret_guard(n, T)
