"""Finite-n optimal conversion rates by feasibility search, and the
second-order moderate-deviation rate expansions with resonance diagnostics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Sequence

from .distributions import (
    DEFAULT_CLASS_CAP,
    GibbsSpec,
    ProbVec,
    dense_probs,
    embed,
    sharp,
    tensor_product,
    uniform,
)
from .entropic import (
    INDETERMINATE,
    GibbsPair,
    irreversibility,
    mean_resources,
    variance_resources,
)
from .errors import (
    ConverseInfidelityUnsupported,
    DegenerateTarget,
    InfeasibleAtZero,
    MetricUnsupported,
    ValidationFailure,
)
from .majorisation import brute_force_min_epsilon, max_prefix_violation
from .moderate import ModerateSequence

RateDirection = Literal["entanglement", "thermodynamic"]
Regime = Literal["direct", "converse"]
Metric = Literal["tvd", "infidelity"]


@dataclass(frozen=True)
class RateExpansion:
    R_inf: float
    nu: float  # math.inf when only the target variance vanishes
    coefficient: float  # multiplier of t_n, signed
    regime: Regime
    direction: RateDirection

    def evaluate(self, seq: ModerateSequence, n: int) -> float:
        return self.R_inf + self.coefficient * seq.t(n)


@dataclass(frozen=True)
class ExactRatePoint:
    n: int
    epsilon: float
    m_star: int
    rate: Fraction
    metric: Metric

    @property
    def rate_float(self) -> float:
        return float(self.rate)


def error_level(seq: ModerateSequence, n: int, regime: Regime) -> float:
    """e^(-n t_n^2) in the direct regime, 1 - e^(-n t_n^2) in the converse."""
    e = math.exp(-seq.nt2(n))
    return e if regime == "direct" else 1.0 - e


def _ctx_of(direction: RateDirection,
            ctx: GibbsSpec | GibbsPair | None) -> GibbsSpec | GibbsPair | None:
    if direction == "entanglement":
        return None
    if ctx is None:
        raise ValidationFailure("thermodynamic direction needs a GibbsSpec")
    return ctx


def expand_rate(p: ProbVec, q: ProbVec, ctx: GibbsSpec | GibbsPair | None,
                direction: RateDirection, regime: Regime,
                seq: ModerateSequence, n: int,
                metric: Metric = "tvd") -> tuple[RateExpansion, float]:
    """Second-order expansion R_inf + coefficient * t_n, evaluated at n.

    The direct coefficient is -sqrt(2 V_p / H_q^2) |1 - 1/sqrt(nu)|; the
    converse one +sqrt(2 V_p / H_q^2)(1 + 1/sqrt(nu)), TVD only. A vanishing
    input variance rewrites the coefficient as -+sqrt(2 V_q H_p / H_q^3).
    """
    if regime == "converse" and metric != "tvd":
        raise ConverseInfidelityUnsupported(
            "the converse expansion holds for TVD only")
    c = _ctx_of(direction, ctx)
    hp, hq = mean_resources(p, q, c)
    if hq <= 0.0:
        raise DegenerateTarget("target state carries no resource")
    vp, vq = variance_resources(p, q, c)
    r_inf = hp / hq
    nu = irreversibility(p, q, c) if hp > 0.0 else 0.0
    sign = -1.0 if regime == "direct" else 1.0
    if nu is INDETERMINATE:
        nu_out, coeff = 1.0, 0.0
    elif vp == 0.0:
        # vanishing-input-variance rewriting; covers the sharp input, nu = 0
        nu_out = 0.0
        coeff = sign * math.sqrt(2.0 * vq * hp / hq ** 3)
    elif nu == math.inf:
        nu_out, coeff = math.inf, sign * math.sqrt(2.0 * vp / hq ** 2)
    else:
        nu_out = float(nu)
        factor = abs(1.0 - 1.0 / math.sqrt(nu_out)) if regime == "direct" \
            else 1.0 + 1.0 / math.sqrt(nu_out)
        coeff = sign * math.sqrt(2.0 * vp / hq ** 2) * factor
    exp = RateExpansion(r_inf, nu_out, coeff, regime, direction)
    return exp, exp.evaluate(seq, n)


def resonance_gap(p: ProbVec, q: ProbVec,
                  ctx: GibbsSpec | GibbsPair | None = None,
                  direction: RateDirection = "entanglement"
                  ) -> tuple[float, float]:
    """(nu, |1 - 1/sqrt(nu)|); a zero gap kills the direct correction term."""
    nu = irreversibility(p, q, _ctx_of(direction, ctx))
    if nu is INDETERMINATE:
        return 1.0, 0.0
    if nu == math.inf:
        return math.inf, 1.0
    if nu == 0.0:
        return 0.0, math.inf
    return float(nu), abs(1.0 - 1.0 / math.sqrt(float(nu)))


def _min_epsilon_for_copies(p: ProbVec, q: ProbVec, free_p: ProbVec,
                            free_q: ProbVec, n: int, m: int,
                            direction: RateDirection, metric: Metric,
                            class_cap: int) -> float:
    """Minimal smoothing error for converting n input copies into m targets.

    free_p / free_q are the free states of the input / target systems; each
    side is padded with the other system's free state so dimensions align.
    """
    P = tensor_product([(p, n), (free_q, m)], class_cap=class_cap)
    Q = tensor_product([(q, m), (free_p, n)], class_cap=class_cap)
    if metric == "tvd":
        if direction == "entanglement":
            # P <~ Q smoothed: modify P below Q (pre form via post equivalence)
            return max_prefix_violation(Q, P)
        return max_prefix_violation(P, Q)
    if max(P.full_count, Q.full_count) > 4:
        raise MetricUnsupported(
            "exact infidelity search supports total dimension <= 4 only")
    dim = max(P.full_count, Q.full_count)
    a, b = (Q, P) if direction == "entanglement" else (P, Q)
    av = ProbVec(tuple(dense_probs(a)) + (0.0,) * (dim - a.full_count))
    bv = ProbVec(tuple(dense_probs(b)) + (0.0,) * (dim - b.full_count))
    return brute_force_min_epsilon(av, bv, metric="infidelity", direction="post")


def exact_optimal_rate(p: ProbVec, q: ProbVec, f: ProbVec | None, n: int,
                       epsilon: float, direction: RateDirection = "entanglement",
                       metric: Metric = "tvd",
                       ctx: GibbsSpec | GibbsPair | None = None,
                       *, class_cap: int = DEFAULT_CLASS_CAP,
                       m_cap: int = 100_000) -> ExactRatePoint:
    """Largest m (target copies) whose total states admit an epsilon-smoothing.

    Feasibility is monotone in m (appending harder targets only raises the
    minimal smoothing error), so binary search applies.
    """
    if not 0.0 <= epsilon < 1.0:
        raise ValidationFailure(f"epsilon must lie in [0, 1), got {epsilon}")
    if n < 1:
        raise ValidationFailure(f"n must be >= 1, got {n}")
    if direction == "thermodynamic":
        c = _ctx_of(direction, ctx)
        gp, gq = (c, c) if isinstance(c, GibbsSpec) else c
        p = embed(p, gp)
        q = embed(q, gq)
        free_p = uniform(gp.embedded_dim)
        free_q = uniform(gq.embedded_dim)
    else:
        free_p = free_q = sharp() if f is None else f

    def feasible(m: int) -> bool:
        eps_min = _min_epsilon_for_copies(p, q, free_p, free_q, n, m,
                                          direction, metric, class_cap)
        return eps_min <= epsilon + 1e-12

    if not feasible(0):
        raise InfeasibleAtZero("zero target copies must always be feasible")
    lo = 0
    if metric == "infidelity":
        # the numerical path certifies total dimension <= 4 only; refuse when
        # the optimum may lie beyond the verifiable range
        hi = 0
        while (q.dim ** (hi + 1) * free_p.dim ** n <= 4
               and p.dim ** n * free_q.dim ** (hi + 1) <= 4):
            hi += 1
        if feasible(hi):
            raise MetricUnsupported(
                "optimal m may exceed the dimension-4 certified range")
    else:
        hi = max(4, n)
        while feasible(hi):
            hi *= 2
            if hi > m_cap:
                raise ValidationFailure(f"feasible m exceeded the cap {m_cap}")
    # invariant: feasible(lo), not feasible(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return ExactRatePoint(n, epsilon, lo, Fraction(lo, n), metric)


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    epsilon: float
    exact_rate: float
    expanded_rate: float
    residual: float
    m_star: int


def convergence_report(p: ProbVec, q: ProbVec, f: ProbVec | None,
                       direction: RateDirection, seq: ModerateSequence,
                       n_grid: Sequence[int], regime: Regime = "direct",
                       metric: Metric = "tvd",
                       ctx: GibbsSpec | GibbsPair | None = None,
                       *, class_cap: int = DEFAULT_CLASS_CAP
                       ) -> list[ConvergenceRow]:
    """Exact rates against the expansion over an n grid; deterministic order."""
    rows = []
    for n in sorted(n_grid):
        eps_n = error_level(seq, n, regime)
        point = exact_optimal_rate(p, q, f, n, eps_n, direction, metric,
                                   ctx, class_cap=class_cap)
        _, expanded = expand_rate(p, q, ctx, direction, regime, seq, n, metric)
        rows.append(ConvergenceRow(n, eps_n, point.rate_float, expanded,
                                   point.rate_float - expanded, point.m_star))
    return rows
