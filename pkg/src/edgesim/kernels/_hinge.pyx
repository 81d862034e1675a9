# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hinge-loss SGD pass; mirrors kernels._hinge_py step for step."""

import numpy as np

from libc.stdint cimport int64_t


def hinge_sgd_pass(double[:, ::1] weights, double[:, ::1] features,
                   const int64_t[::1] labels, const int64_t[::1] order,
                   double lam, int64_t t0):
    """Same contract as kernels._hinge_py.hinge_sgd_pass."""
    cdef Py_ssize_t n_classes = weights.shape[0]
    cdef Py_ssize_t d = weights.shape[1] - 1
    cdef Py_ssize_t m = order.shape[0]
    cdef int64_t t = t0
    cdef double s = 1.0
    cdef double eta, coef, acc, ysign
    cdef Py_ssize_t i, j, c, k
    cdef int64_t target
    cdef double[::1] scores = np.empty(n_classes)

    for i in range(m):
        j = order[i]
        for c in range(n_classes):
            acc = weights[c, d]
            for k in range(d):
                acc += weights[c, k] * features[j, k]
            scores[c] = acc * s
        target = labels[j]
        t += 1
        eta = 1.0 / (lam * t)
        if t == 1:
            for c in range(n_classes):
                for k in range(d + 1):
                    weights[c, k] = 0.0
            s = 1.0
        else:
            s *= 1.0 - 1.0 / t
        for c in range(n_classes):
            ysign = 1.0 if c == target else -1.0
            if ysign * scores[c] < 1.0:
                coef = eta / s * ysign
                for k in range(d):
                    weights[c, k] += coef * features[j, k]
                weights[c, d] += coef

    for c in range(n_classes):
        for k in range(d + 1):
            weights[c, k] *= s
    return int(t)
