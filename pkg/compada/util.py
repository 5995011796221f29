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
utils of python-compada: status/error types, the operation response of the cli and small numeric helpers.
"""
import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg

from compada.conf import g_logger


class Status(Enum):
    SUCCESS = 0
    FAILED = 1
    ERROR = 2


class Regularizer(Enum):
    """ composite term phi of the update """
    L2Sq = 'L2Sq'  # (lam / 2) * ||x||_2^2
    L1 = 'L1'  # lam * ||x||_1


class CompError(Exception):
    """ structured error of python-compada.

    @code is machine readable (eg: 'dimension_mismatch', 'singular_system'),
    @message is for humans and @details holds whatever helps to diagnose.
    """

    def __init__(self, code, message='', details=None):
        super(CompError, self).__init__('%s: %s' % (code, message))
        self.code = code
        self.message = message
        self.details = details or {}

    def to_dict(self) -> {}:
        return {'code': self.code, 'message': self.message, 'details': self.details}


@dataclass
class OperationResponse(dict):
    """ A dataclass representing the result of a cli operation like "run, grid, bench, gen"
    """
    status: Status = Status.FAILED  # similar to "jsend"
    message: str = 'ok'  # message for the status.
    code: str = ''  # CompError code when status is not SUCCESS
    payload: dict = field(default_factory=dict)  # files written, summary numbers, ...

    def __bool__(self):
        return self.ok()

    def ok(self):
        return self.status == Status.SUCCESS

    def to_json(self) -> str:
        return json.dumps({'status': self.status.name, 'message': self.message,
                           'code': self.code, 'payload': self.payload}, sort_keys=True, default=str)

    @classmethod
    def from_error(cls, e) -> 'OperationResponse':
        if isinstance(e, CompError):
            return cls(status=Status.ERROR, message=e.message, code=e.code, payload=e.details)
        return cls(status=Status.ERROR, message=str(e), code=type(e).__name__)


# -----------------------------------------------------------
#    numeric helpers
# -----------------------------------------------------------
def is_power_of_two(n) -> bool:
    return isinstance(n, (int, np.integer)) and n >= 1 and (n & (n - 1)) == 0


def next_power_of_two(n) -> int:
    """ smallest power of two >= @n (1 for n <= 1) """
    if n <= 1:
        return 1
    return 1 << int(math.ceil(math.log2(n)))


def check_power_of_two(n, what='length'):
    if not is_power_of_two(n):
        raise CompError('not_power_of_two', '%s must be a power of two, got %s' % (what, n))


def as_vector(v, n=None, name='vector') -> np.ndarray:
    """ float64 1-d copy-free view of @v, checked for length @n and finite entries """
    a = np.asarray(v, dtype=np.float64)
    if a.ndim != 1:
        raise CompError('dimension_mismatch', '%s must be 1-d, got shape %s' % (name, a.shape))
    if n is not None and a.shape[0] != n:
        raise CompError('dimension_mismatch', '%s has length %d, expected %d' % (name, a.shape[0], n))
    if not np.all(np.isfinite(a)):
        g_logger.error('non-finite entries in %s' % name)
        raise CompError('non_finite', '%s has non-finite entries' % name)
    return a


def soft_threshold(v, t) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def composite_value(regularizer, lam, x) -> float:
    """ phi(x) for the composite term """
    if regularizer == Regularizer.L1:
        return lam * float(np.sum(np.abs(x)))
    return 0.5 * lam * float(np.dot(x, x))


def spd_solve(M, rhs, what='system') -> np.ndarray:
    """ solve M x = rhs for symmetric positive definite @M by cholesky """
    try:
        factor = scipy.linalg.cho_factor(M, lower=False, check_finite=True)
        return scipy.linalg.cho_solve(factor, rhs)
    except (np.linalg.LinAlgError, ValueError) as e:
        g_logger.error('cholesky failed for %s: %s' % (what, e))
        raise CompError('singular_system', '%s is not positive definite' % what, {'reason': str(e)})
