"""Two-variable working-set solver for the nu-SVC dual.

The nu problem is solved in its scaled form

    min_a  1/2 a'Qa    s.t.  0 <= a_i <= 1,
                              sum_{y=+1} a_i = sum_{y=-1} a_i = nu*l/2,

with ``Q_ij = y_i y_j K_ij``.  Each step moves a pair of same-class
multipliers (which keeps both equality constraints), chosen by maximal
violation for the first index and second-order gain for the second.

Dividing the solution by the margin estimate ``r`` gives the equivalent
C-form dual (maximize ``sum a - 1/2 a'Qa`` over ``0 <= a <= 1/r``,
``y'a = 0``).  That rescaled vector is what the model keeps.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ..errors import ConvergenceError, DegenerateModelError, InfeasibleError, InvalidInputError

TAU = 1e-12
DEFAULT_TOL = 1e-3
DEFAULT_MAX_ITER = 10_000_000


@dataclass(frozen=True)
class DualSolution:
    alpha: np.ndarray  # C-form multipliers, length n, in [0, c_eff]
    c_eff: float  # effective box bound 1/r
    rho: float  # unscaled offset from the KKT conditions
    r: float  # margin scale used to map nu-form -> C-form
    iterations: int
    violation: float


@njit(cache=True)
def _smo_loop(Q, y, alpha, G, tol, max_iter):
    n = y.shape[0]
    it = 0
    viol = np.inf
    while it < max_iter:
        gmaxp = -np.inf
        gmaxn = -np.inf
        ip = -1
        inn = -1
        for t in range(n):
            if y[t] > 0:
                if alpha[t] < 1.0 and -G[t] >= gmaxp:
                    gmaxp = -G[t]
                    ip = t
            else:
                if alpha[t] > 0.0 and G[t] >= gmaxn:
                    gmaxn = G[t]
                    inn = t

        gmaxp2 = -np.inf
        gmaxn2 = -np.inf
        jbest = -1
        obj_min = np.inf
        for j in range(n):
            if y[j] > 0:
                if alpha[j] > 0.0:
                    grad_diff = gmaxp + G[j]
                    if G[j] >= gmaxp2:
                        gmaxp2 = G[j]
                    if grad_diff > 0.0:
                        quad = Q[ip, ip] + Q[j, j] - 2.0 * Q[ip, j]
                        if quad <= 0.0:
                            quad = TAU
                        od = -grad_diff * grad_diff / quad
                        if od <= obj_min:
                            jbest = j
                            obj_min = od
            else:
                if alpha[j] < 1.0:
                    grad_diff = gmaxn - G[j]
                    if -G[j] >= gmaxn2:
                        gmaxn2 = -G[j]
                    if grad_diff > 0.0:
                        quad = Q[inn, inn] + Q[j, j] - 2.0 * Q[inn, j]
                        if quad <= 0.0:
                            quad = TAU
                        od = -grad_diff * grad_diff / quad
                        if od <= obj_min:
                            jbest = j
                            obj_min = od

        viol = max(gmaxp + gmaxp2, gmaxn + gmaxn2)
        if viol < tol or jbest == -1:
            return it, viol

        j = jbest
        i = ip if y[j] > 0 else inn

        old_i = alpha[i]
        old_j = alpha[j]
        quad = Q[i, i] + Q[j, j] - 2.0 * Q[i, j]
        if quad <= 0.0:
            quad = TAU
        delta = (G[i] - G[j]) / quad
        total = old_i + old_j
        ai = old_i - delta
        aj = old_j + delta
        if total > 1.0:
            if ai > 1.0:
                ai = 1.0
                aj = total - 1.0
        else:
            if aj < 0.0:
                aj = 0.0
                ai = total
        if total > 1.0:
            if aj > 1.0:
                aj = 1.0
                ai = total - 1.0
        else:
            if ai < 0.0:
                ai = 0.0
                aj = total
        alpha[i] = ai
        alpha[j] = aj

        di = ai - old_i
        dj = aj - old_j
        for k in range(n):
            G[k] += Q[i, k] * di + Q[j, k] * dj
        it += 1
    return it, viol


def _side_offset(G, alpha, mask):
    """Average gradient over free multipliers of one class (KKT midpoint otherwise)."""
    at_upper = mask & (alpha >= 1.0)
    at_lower = mask & (alpha <= 0.0)
    free = mask & ~at_upper & ~at_lower
    if free.any():
        return float(G[free].mean())
    lb = float(G[at_upper].max()) if at_upper.any() else -np.inf
    ub = float(G[at_lower].min()) if at_lower.any() else np.inf
    if np.isinf(lb):
        return ub
    if np.isinf(ub):
        return lb
    return (lb + ub) / 2.0


def check_nu(y: np.ndarray, nu: float) -> None:
    n_pos = int((y > 0).sum())
    n_neg = int((y < 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise InvalidInputError("training set needs both labels")
    if not 0.0 < nu <= 1.0:
        raise InfeasibleError(f"nu must lie in (0, 1], got {nu}")
    limit = 2.0 * min(n_pos, n_neg) / (n_pos + n_neg)
    if nu > limit * (1 + 1e-12):
        raise InfeasibleError(
            f"nu={nu:g} infeasible for class balance {n_pos}/{n_neg} (max {limit:g})")


def solve_nu_dual(K: np.ndarray, y: np.ndarray, nu: float, tol: float = DEFAULT_TOL,
                  max_iter: int = DEFAULT_MAX_ITER) -> DualSolution:
    y = np.asarray(y, dtype=np.float64)
    if set(np.unique(y)) - {-1.0, 1.0}:
        raise InvalidInputError("labels must be -1 or +1")
    check_nu(y, nu)
    n = y.size
    Q = np.ascontiguousarray(y[:, None] * y[None, :] * K)

    alpha = np.zeros(n)
    for label in (1.0, -1.0):
        budget = nu * n / 2.0
        for i in np.flatnonzero(y == label):
            alpha[i] = min(1.0, budget)
            budget -= alpha[i]
    G = Q @ alpha

    # The tolerance applies to the C-form problem, whose gradient is G/r - 1,
    # so the nu-form loop must reach tol * r.  r is only known once the loop
    # has run, hence the refinement passes.
    # Below r_floor the margin is lost in round-off of G (nu under the data's
    # minimum: the reduced class hulls overlap).
    q_max = float(np.abs(Q).max())
    r_floor = 1e-9 * max(1.0, n * q_max)
    iterations = 0
    # first pass relative to the kernel's magnitude, so huge Gram entries
    # cannot demand an absolute accuracy below round-off
    inner_tol = tol * max(1.0, q_max)
    while True:
        done, violation = _smo_loop(Q, y, alpha, G, inner_tol, max_iter - iterations)
        iterations += done
        r1 = _side_offset(G, alpha, y > 0)
        r2 = _side_offset(G, alpha, y < 0)
        r = (r1 + r2) / 2.0
        if not (np.isfinite(r) and r > r_floor):
            # r is only known to within about the violation; settle it first
            settle = 0.1 * r_floor
            if violation > settle and inner_tol > settle and iterations < max_iter:
                inner_tol = min(inner_tol, settle)
                continue
            raise DegenerateModelError(f"vanishing margin scale r={r:g} (nu too small?)")
        scaled = max(violation, 0.0) / r
        if scaled < tol:
            break
        if iterations >= max_iter:
            raise ConvergenceError(
                f"nu-SVC solver stopped after {iterations} updates "
                f"with KKT violation {scaled:.3g}", scaled)
        if done == 0 and violation >= inner_tol:  # no improving pair left
            break
        inner_tol = 0.5 * tol * r
    return DualSolution(alpha=alpha / r, c_eff=1.0 / r, rho=(r1 - r2) / 2.0, r=r,
                        iterations=int(iterations), violation=float(scaled))


def dual_objective(alpha: np.ndarray, y: np.ndarray, K: np.ndarray) -> float:
    """``W(a) = sum a - 1/2 sum_ij a_i a_j y_i y_j K_ij``."""
    ya = alpha * y
    return float(alpha.sum() - 0.5 * ya @ K @ ya)
