"""Pure numpy implementation of the hinge-loss SGD pass."""

import numpy as np


def hinge_sgd_pass(weights, features, labels, order, lam, t0):
    """Run one SGD pass over the samples listed in `order`.

    One-vs-rest hinge loss with ridge strength `lam` and the 1/(lam*t)
    step schedule, where t is the lifetime step counter starting from
    `t0`. Every class row shrinks by (t-1)/t each step; rows whose margin
    is violated additionally receive the subgradient step. The weights
    are kept factored as s*V so the shrink costs O(1); `weights` is
    updated in place and the final step counter is returned.
    """
    n_classes = weights.shape[0]
    d = weights.shape[1] - 1
    t = int(t0)
    s = 1.0
    v = weights  # scaled view: true weights are s * v
    for j in order:
        x = features[j]
        scores = (v[:, :d] @ x + v[:, d]) * s
        t += 1
        eta = 1.0 / (lam * t)
        if t == 1:
            # shrink factor (t - 1) / t is exactly zero: restart the scale
            v[:] = 0.0
            s = 1.0
        else:
            s *= 1.0 - 1.0 / t
        ysign = np.full(n_classes, -1.0)
        ysign[labels[j]] = 1.0
        violated = ysign * scores < 1.0
        if violated.any():
            coef = (eta / s) * ysign[violated]
            v[violated, :d] += coef[:, None] * x
            v[violated, d] += coef
    weights *= s
    return t
