"""Compiled SMO inner loop.

Solves

    min_a  1/2 a^T Q a + p^T a   s.t.  y^T a = 0,  0 <= a_t <= upper

with ``Q[s, t] = y[s] y[t] K[idx[s], idx[t]]``, so one kernel matrix serves
both the C-SVM (``idx = arange(N)``) and the 2N-variable epsilon-SVR
(``idx = [arange(N), arange(N)]``).  The working pair is chosen by
second-order selection: ``i`` is the maximal KKT violator and ``j`` the
partner giving the largest guaranteed decrease of the objective.  The
two-variable update and clipping follow the usual analytic form.
"""

import numpy as np
from numba import njit

TAU = 1e-12


@njit(cache=True, nogil=True)
def smo_solve(K, idx, y, p, upper, tol, max_iter, track):
    n = y.shape[0]
    alpha = np.zeros(n)
    grad = p.copy()
    qd = np.empty(n)
    for s in range(n):
        qd[s] = K[idx[s], idx[s]]

    worst_rise = 0.0
    obj = 0.0
    it = 0
    converged = False
    while it < max_iter:
        # i: maximal violator among I_up
        gmax = -np.inf
        i = -1
        for s in range(n):
            if y[s] > 0:
                if alpha[s] < upper and -grad[s] > gmax:
                    gmax = -grad[s]
                    i = s
            else:
                if alpha[s] > 0.0 and grad[s] > gmax:
                    gmax = grad[s]
                    i = s
        if i < 0:
            converged = True
            break
        # j: second-order choice among I_low; gmin2 = -min_{I_low} -y G for the stopping test
        ki = idx[i]
        gmin2 = -np.inf
        best = np.inf
        j = -1
        for s in range(n):
            if y[s] > 0:
                if alpha[s] > 0.0:
                    if grad[s] > gmin2:
                        gmin2 = grad[s]
                    b = gmax + grad[s]
                else:
                    continue
            else:
                if alpha[s] < upper:
                    if -grad[s] > gmin2:
                        gmin2 = -grad[s]
                    b = gmax - grad[s]
                else:
                    continue
            if b > 0.0:
                a = qd[i] + qd[s] - 2.0 * K[ki, idx[s]]
                if a <= 0.0:
                    a = TAU
                gain = -(b * b) / a
                if gain <= best:
                    best = gain
                    j = s
        if j < 0 or gmax + gmin2 < tol:
            converged = True
            break

        kj = idx[j]
        qij = y[i] * y[j] * K[ki, kj]
        old_i = alpha[i]
        old_j = alpha[j]
        if y[i] != y[j]:
            quad = qd[i] + qd[j] + 2.0 * qij
            if quad <= 0.0:
                quad = TAU
            delta = (-grad[i] - grad[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0.0:
                if alpha[j] < 0.0:
                    alpha[j] = 0.0
                    alpha[i] = diff
            else:
                if alpha[i] < 0.0:
                    alpha[i] = 0.0
                    alpha[j] = -diff
            if diff > 0.0:
                if alpha[i] > upper:
                    alpha[i] = upper
                    alpha[j] = upper - diff
            else:
                if alpha[j] > upper:
                    alpha[j] = upper
                    alpha[i] = upper + diff
        else:
            quad = qd[i] + qd[j] - 2.0 * qij
            if quad <= 0.0:
                quad = TAU
            delta = (grad[i] - grad[j]) / quad
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > upper:
                if alpha[i] > upper:
                    alpha[i] = upper
                    alpha[j] = total - upper
                if alpha[j] > upper:
                    alpha[j] = upper
                    alpha[i] = total - upper
            else:
                if alpha[j] < 0.0:
                    alpha[j] = 0.0
                    alpha[i] = total
                if alpha[i] < 0.0:
                    alpha[i] = 0.0
                    alpha[j] = total

        di = alpha[i] - old_i
        dj = alpha[j] - old_j
        yi = y[i] * di
        yj = y[j] * dj
        for s in range(n):
            grad[s] += y[s] * (K[idx[s], ki] * yi + K[idx[s], kj] * yj)
        it += 1

        if track:
            new_obj = 0.0
            for s in range(n):
                new_obj += alpha[s] * (grad[s] + p[s])
            new_obj *= 0.5
            rise = new_obj - obj
            if rise > worst_rise:
                worst_rise = rise
            obj = new_obj

    return alpha, grad, it, converged, worst_rise
