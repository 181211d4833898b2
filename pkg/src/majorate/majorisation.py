"""Exact and approximate majorisation.

The minimal TVD smoothing in either direction has a closed form: the largest
prefix-sum violation between the two Lorenz curves. Witnesses are built
constructively (cap the head to a common level and pour into the tail for the
post direction; raise the top and trim the tail end for the pre direction)
and are re-checked for feasibility by the tests. A brute-force convex
optimisation oracle certifies optimality at desk scale.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations
from typing import Literal, Sequence

import numpy as np

from .distributions import (
    ProbVec,
    ProductDist,
    prefix_sum_at_rank,
    product_from_classes,
    sort_desc,
    tensor_product,
)
from .errors import DimensionTooLarge, MetricUnsupported

PREFIX_SLACK = 1e-12

Metric = Literal["tvd", "infidelity"]
Direction = Literal["post", "pre"]


@dataclass(frozen=True)
class ApproxMajResult:
    epsilon: float
    witness: ProbVec | ProductDist
    direction: Direction
    metric: Metric


def _padded_sorted(a: ProbVec, b: ProbVec) -> tuple[np.ndarray, np.ndarray]:
    dim = max(a.dim, b.dim)
    av = np.zeros(dim)
    bv = np.zeros(dim)
    av[:a.dim] = sort_desc(a).entries
    bv[:b.dim] = sort_desc(b).entries
    return av, bv


def _padded(a: ProbVec, b: ProbVec) -> tuple[np.ndarray, np.ndarray]:
    dim = max(a.dim, b.dim)
    av = np.zeros(dim)
    bv = np.zeros(dim)
    av[:a.dim] = a.entries
    bv[:b.dim] = b.entries
    return av, bv


def majorises(a: ProbVec, b: ProbVec, *, slack: float = PREFIX_SLACK) -> bool:
    """Prefix dominance of sorted-descending vectors, zero-padded to match."""
    av, bv = _padded_sorted(a, b)
    return bool(np.all(np.cumsum(av) >= np.cumsum(bv) - slack))


def tvd(a: ProbVec, b: ProbVec) -> float:
    av, bv = _padded(a, b)
    return 0.5 * float(np.abs(av - bv).sum())


def fidelity(a: ProbVec, b: ProbVec) -> float:
    av, bv = _padded(a, b)
    return float(np.sqrt(av * bv).sum() ** 2)


def _breakpoints(d: ProductDist) -> list[int]:
    pts = list(d._cum_counts)
    if d.full_count > d.support_count:
        pts.append(d.full_count)
    return pts


def _prefix_at(d: ProductDist, k: int) -> float:
    return 1.0 if k >= d.full_count else prefix_sum_at_rank(d, k)


def majorises_product(A: ProductDist, B: ProductDist,
                      *, slack: float = PREFIX_SLACK) -> bool:
    """Prefix dominance checked at every class boundary of either operand.

    Both cumulative curves are piecewise linear in rank with kinks only at
    class boundaries, so dominance on the merged boundary set is equivalent
    to dominance at every rank.
    """
    for k in sorted(set(_breakpoints(A)) | set(_breakpoints(B))):
        if _prefix_at(A, k) < _prefix_at(B, k) - slack:
            return False
    return True


def _promote(x: ProbVec | ProductDist) -> ProductDist:
    return x if isinstance(x, ProductDist) else tensor_product([(x, 1)])


def max_prefix_violation(a: ProbVec | ProductDist,
                         b: ProbVec | ProductDist) -> float:
    """max_k (B(k) - A(k))_+ over sorted prefix sums: the minimal TVD smoothing."""
    if isinstance(a, ProbVec) and isinstance(b, ProbVec):
        av, bv = _padded_sorted(a, b)
        return max(float(np.max(np.cumsum(bv) - np.cumsum(av))), 0.0)
    A, B = _promote(a), _promote(b)
    worst = 0.0
    for k in sorted(set(_breakpoints(A)) | set(_breakpoints(B))):
        worst = max(worst, _prefix_at(B, k) - _prefix_at(A, k))
    return worst


def min_epsilon_post(a: ProbVec | ProductDist, b: ProbVec | ProductDist,
                     metric: Metric = "tvd") -> ApproxMajResult:
    """Minimal eps such that a majorises some b~ within eps of b."""
    if isinstance(a, ProductDist) or isinstance(b, ProductDist):
        if metric != "tvd":
            raise MetricUnsupported("only TVD is supported for ProductDist inputs")
        A, B = _promote(a), _promote(b)
        eps = max_prefix_violation(A, B)
        witness = _product_cap_and_pour(B, eps, max(A.full_count, B.full_count))
        return ApproxMajResult(eps, witness, "post", "tvd")
    if metric == "tvd":
        eps = max_prefix_violation(a, b)
        av, bv = _padded_sorted(a, b)
        wit = _cap_and_pour(bv, eps)
        return ApproxMajResult(eps, _witness_in_original_frame(wit, b, len(bv)),
                               "post", "tvd")
    if metric == "infidelity":
        eps, wit = _min_infidelity_post(a, b)
        return ApproxMajResult(eps, wit, "post", "infidelity")
    raise MetricUnsupported(f"unknown metric {metric!r}")


def min_epsilon_pre(a: ProbVec, b: ProbVec,
                    metric: Metric = "tvd") -> ApproxMajResult:
    """Minimal eps such that some a~ within eps of a majorises b."""
    if metric == "tvd":
        eps = max_prefix_violation(a, b)
        av, bv = _padded_sorted(a, b)
        wit = av.copy()
        if eps > 0.0:
            # add everything to the top entry, trim the same mass off the end
            wit[0] += eps
            remaining = eps
            for j in range(len(wit) - 1, 0, -1):
                take = min(wit[j], remaining)
                wit[j] -= take
                remaining -= take
                if remaining <= 0.0:
                    break
            wit[0] -= max(remaining, 0.0)
        return ApproxMajResult(eps, _witness_in_original_frame(wit, a, len(av)),
                               "pre", "tvd")
    if metric == "infidelity":
        eps, wit = _min_infidelity_pre(a, b)
        return ApproxMajResult(eps, wit, "pre", "infidelity")
    raise MetricUnsupported(f"unknown metric {metric!r}")


def _cap_and_pour(b_sorted: np.ndarray, eps: float) -> np.ndarray:
    """Dense witness: lower the head to a cap, raise the tail to a fill level."""
    out = b_sorted.astype(float).copy()
    if eps <= 0.0:
        return out

    def removed(c: float) -> float:
        return float(np.maximum(out - c, 0.0).sum())

    lo, hi = 0.0, float(out[0])
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if removed(mid) > eps:
            lo = mid
        else:
            hi = mid
    cap = 0.5 * (lo + hi)
    out = np.minimum(out, cap)
    deficit = 1.0 - float(out.sum())

    def added(lam: float) -> float:
        return float(np.maximum(lam - out, 0.0).sum())

    lo, hi = 0.0, max(cap, deficit)
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if added(mid) < deficit:
            lo = mid
        else:
            hi = mid
    out = np.maximum(out, 0.5 * (lo + hi))
    out[0] += 1.0 - out.sum()  # re-absorb level round-off exactly
    return out


def _log_diff(log_x: float, log_y: float) -> float:
    """ln(exp(log_x) - exp(log_y)) for log_x > log_y."""
    return log_x + math.log1p(-math.exp(min(log_y - log_x, 0.0)))


def _product_cap_and_pour(b: ProductDist, eps: float,
                          padded_count: int | None = None) -> ProductDist:
    """Class-level cap-and-pour; levels handled in log domain throughout.

    The pour may spread into the zero-padded outcome space of the dominating
    side, so the witness is built on `padded_count` outcomes.
    """
    full = max(padded_count or 0, b.full_count)
    if eps <= 0.0:
        return b if full == b.full_count else \
            product_from_classes(list(b.classes), full)
    classes = list(b.classes)

    # cap: walk knots downward until the removed mass would reach eps
    removed = 0.0
    count_above = 0
    j = 0
    while j < len(classes):
        lp_next = classes[j][0]
        if j > 0 and count_above > 0:
            # mass released when the cap moves from knot j-1 down to knot j
            step = math.exp(_log_diff(classes[j - 1][0], lp_next)
                            + math.log(count_above))
            if removed + step >= eps:
                break
            removed += step
        count_above += classes[j][1]
        j += 1
    if j == 0:
        count_above = classes[0][1]
        j = 1
    anchor = classes[j - 1][0]
    # cap = anchor_level - (eps - removed)/count_above, in log domain
    log_drop = math.log(eps - removed) - math.log(count_above)
    log_cap = _log_diff(anchor, log_drop)
    head = [(log_cap, count_above)]
    rest = classes[j:]

    # pour: walk knots upward over the tail (zero-padding outcomes included)
    zeros = full - b.support_count
    added = 0.0
    count_below = zeros
    level_log = -math.inf
    idx = len(rest)
    while idx > 0:
        lp_next = rest[idx - 1][0]
        if count_below > 0:
            gain_log = lp_next if level_log == -math.inf else _log_diff(lp_next, level_log)
            step = math.exp(gain_log + math.log(count_below))
            if added + step >= eps:
                break
            added += step
        count_below += rest[idx - 1][1]
        level_log = rest[idx - 1][0]
        idx -= 1
    if count_below == 0:
        return product_from_classes(head + rest, full)
    log_fill = math.log(eps - added) - math.log(count_below)
    log_lam = log_fill if level_log == -math.inf else \
        float(np.logaddexp(level_log, log_fill))
    kept = rest[:idx]
    tail = [(log_lam, count_below)]
    return product_from_classes(head + kept + tail, full)


def _feasible_prefix_constraints(dim: int) -> np.ndarray:
    rows = np.zeros((dim, dim))
    for k in range(dim):
        rows[k, :k + 1] = 1.0
    return rows


def _sortedness_constraints(dim: int) -> np.ndarray:
    rows = np.zeros((dim - 1, dim))
    for k in range(dim - 1):
        rows[k, k] = -1.0
        rows[k, k + 1] = 1.0
    return rows


def _maximise_overlap(ref_sorted: np.ndarray, prefix_bound: np.ndarray,
                      lower: bool) -> np.ndarray:
    """max sum_i sqrt(ref_i y_i) over sorted y with prefix(y) <= bound
    (post direction) or prefix(y) >= bound (pre direction, lower=True).

    Concave objective over a polytope; solved from several feasible starts
    because the sqrt gradient blows up at the simplex boundary.
    """
    from scipy.optimize import minimize

    dim = len(ref_sorted)
    P = _feasible_prefix_constraints(dim)
    bound_diffs = np.diff(prefix_bound, prepend=0.0)
    if lower:
        A_ub = np.vstack([-P, _sortedness_constraints(dim)])
        b_ub = np.concatenate([-prefix_bound, np.zeros(dim - 1)])
        point = np.zeros(dim)
        point[0] = 1.0
        starts = [bound_diffs, point]  # the bound curve itself is feasible
    else:
        A_ub = np.vstack([P, _sortedness_constraints(dim)])
        b_ub = np.concatenate([prefix_bound, np.zeros(dim - 1)])
        starts = [np.full(dim, 1.0 / dim), bound_diffs]
    root_ref = np.sqrt(ref_sorted)

    def neg_overlap(y):
        return -float(np.sqrt(np.maximum(y, 0.0)) @ root_ref)

    def grad(y):
        return -0.5 * root_ref / np.sqrt(np.maximum(y, 1e-12))

    cons = [
        {"type": "eq", "fun": lambda y: y.sum() - 1.0,
         "jac": lambda y: np.ones(dim)},
        {"type": "ineq", "fun": lambda y: b_ub - A_ub @ y,
         "jac": lambda y: -A_ub},
    ]
    best, best_val = None, math.inf
    for y0 in starts:
        res = minimize(neg_overlap, y0, jac=grad, method="SLSQP",
                       bounds=[(0.0, 1.0)] * dim, constraints=cons,
                       options={"maxiter": 1000, "ftol": 1e-14})
        feas = float(np.max(A_ub @ res.x - b_ub))
        if feas <= 1e-9 and res.fun < best_val:
            best, best_val = res.x, res.fun
    if best is None:
        best = starts[0]
    return np.maximum(best, 0.0)


def _witness_in_original_frame(y_sorted: np.ndarray, template: ProbVec,
                               dim: int) -> ProbVec:
    wit = np.zeros(dim)
    perm = sort_desc(template).permutation
    for rank, idx in enumerate(perm):
        wit[idx] = y_sorted[rank]
    for rank in range(len(perm), dim):
        wit[rank] = y_sorted[rank]
    return ProbVec(tuple(map(float, wit)))


def _min_infidelity_post(a: ProbVec, b: ProbVec) -> tuple[float, ProbVec]:
    """Numerical smoothing under infidelity; the witness shares b's ordering
    (rearrangement), so one sorted-frame concave problem suffices."""
    if max(a.dim, b.dim) > 64:
        raise DimensionTooLarge("infidelity smoothing refused above dim 64")
    av, bv = _padded_sorted(a, b)
    y = _maximise_overlap(bv, np.cumsum(av), lower=False)
    f = float(np.sqrt(np.maximum(y, 0.0) * bv).sum() ** 2)
    return max(1.0 - min(f, 1.0), 0.0), _witness_in_original_frame(y, b, len(bv))


def _min_infidelity_pre(a: ProbVec, b: ProbVec) -> tuple[float, ProbVec]:
    if max(a.dim, b.dim) > 64:
        raise DimensionTooLarge("infidelity smoothing refused above dim 64")
    av, bv = _padded_sorted(a, b)
    y = _maximise_overlap(av, np.cumsum(bv), lower=True)
    f = float(np.sqrt(np.maximum(y, 0.0) * av).sum() ** 2)
    return max(1.0 - min(f, 1.0), 0.0), _witness_in_original_frame(y, a, len(av))


def brute_force_min_epsilon(a: ProbVec, b: ProbVec, metric: Metric = "tvd",
                            direction: Direction = "post") -> float:
    """Oracle: per-ordering convex minimisation over the feasible polytope.

    For each assignment of sorted ranks to coordinates (dim <= 4, at most 24)
    the feasible set is a polytope and the objective convex; TVD instances
    solve as LPs, infidelity ones by concave maximisation.
    """
    dim = max(a.dim, b.dim)
    if dim > 4:
        raise DimensionTooLarge("brute-force oracle limited to dim <= 4")
    av, bv = _padded_sorted(a, b)
    best = math.inf
    for perm in permutations(range(dim)):
        if metric == "tvd":
            val = _lp_min_tvd(av, bv, perm, direction)
        else:
            val = _opt_min_infid(av, bv, perm, direction)
        best = min(best, val)
    return best


def _lp_min_tvd(av: np.ndarray, bv: np.ndarray, perm: Sequence[int],
                direction: Direction) -> float:
    """LP in (y, t): y the sorted witness, t_i >= |ref_i - y_{perm(i)}|."""
    from scipy.optimize import linprog

    dim = len(av)
    ref = bv if direction == "post" else av
    n_var = 2 * dim
    c = np.zeros(n_var)
    c[dim:] = 0.5
    A_ub: list[np.ndarray] = []
    b_ub: list[float] = []
    P = _feasible_prefix_constraints(dim)
    for k in range(dim):
        row = np.zeros(n_var)
        if direction == "post":
            row[:dim] = P[k]
            A_ub.append(row)
            b_ub.append(float(np.cumsum(av)[k]))
        else:
            row[:dim] = -P[k]
            A_ub.append(row)
            b_ub.append(-float(np.cumsum(bv)[k]))
    for k in range(dim - 1):
        row = np.zeros(n_var)
        row[k] = -1.0
        row[k + 1] = 1.0
        A_ub.append(row)
        b_ub.append(0.0)
    for i in range(dim):
        rank = perm[i]
        for sign in (-1.0, 1.0):
            row = np.zeros(n_var)
            row[rank] = sign
            row[dim + i] = -1.0
            A_ub.append(row)
            b_ub.append(sign * ref[i])
    A_eq = np.zeros((1, n_var))
    A_eq[0, :dim] = 1.0
    res = linprog(c, A_ub=np.array(A_ub), b_ub=np.array(b_ub),
                  A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0, 1)] * dim + [(0, 2)] * dim, method="highs")
    return float(res.fun) if res.success else math.inf


def _opt_min_infid(av: np.ndarray, bv: np.ndarray, perm: Sequence[int],
                   direction: Direction) -> float:
    dim = len(av)
    ref = bv if direction == "post" else av
    aligned = np.empty(dim)
    for i in range(dim):
        aligned[perm[i]] = ref[i]
    if direction == "post":
        y = _maximise_overlap(aligned, np.cumsum(av), lower=False)
    else:
        y = _maximise_overlap(aligned, np.cumsum(bv), lower=True)
    f = float(np.sqrt(np.maximum(y, 0.0) * aligned).sum() ** 2)
    return max(1.0 - min(f, 1.0), 0.0)
