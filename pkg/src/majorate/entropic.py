"""Entropies, entropy variances, and the asymptotic rate / irreversibility
parameters built from them. All logarithms are natural.

Sums use math.fsum (exact compensated summation); the variance terms cancel
heavily near resonance, where naive accumulation would lose digits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .distributions import GibbsSpec, ProbVec
from .errors import DegenerateTarget, DimensionMismatch, SupportViolation


class _Indeterminate:
    """Designated 0/0 result for the irreversibility parameter."""

    def __repr__(self) -> str:
        return "Indeterminate"


INDETERMINATE = _Indeterminate()


@dataclass(frozen=True)
class EntropicSummary:
    H: float
    V: float
    D_rel: float | None = None
    V_rel: float | None = None


def shannon_entropy(a: ProbVec) -> float:
    """-sum a_i ln a_i, with 0 ln 0 := 0."""
    return -math.fsum(x * math.log(x) for x in a.entries if x > 0.0)


_VARIANCE_SNAP = 1e-30  # squared round-off scale of double log evaluations


def entropy_variance(a: ProbVec) -> float:
    """Variance of -ln a_i under a; zero iff all non-zero entries are equal."""
    h = shannon_entropy(a)
    v = math.fsum(x * (math.log(x) + h) ** 2 for x in a.entries if x > 0.0)
    return v if v > _VARIANCE_SNAP else 0.0


def _check_support(a: ProbVec, b: ProbVec) -> None:
    if a.dim != b.dim:
        raise DimensionMismatch(f"dim {a.dim} vs {b.dim}")
    for x, y in zip(a.entries, b.entries):
        if x > 0.0 and y == 0.0:
            raise SupportViolation("support(a) not contained in support(b)")


def relative_entropy(a: ProbVec, b: ProbVec) -> float:
    """sum a_i ln(a_i/b_i); requires support(a) within support(b)."""
    _check_support(a, b)
    d = math.fsum(x * (math.log(x) - math.log(y))
                  for x, y in zip(a.entries, b.entries) if x > 0.0)
    return max(d, 0.0)


def relative_entropy_variance(a: ProbVec, b: ProbVec) -> float:
    _check_support(a, b)
    d = relative_entropy(a, b)
    v = math.fsum(x * (math.log(x) - math.log(y) - d) ** 2
                  for x, y in zip(a.entries, b.entries) if x > 0.0)
    return v if v > _VARIANCE_SNAP else 0.0


def summarise(a: ProbVec, gamma: ProbVec | None = None) -> EntropicSummary:
    if gamma is None:
        return EntropicSummary(shannon_entropy(a), entropy_variance(a))
    return EntropicSummary(shannon_entropy(a), entropy_variance(a),
                           relative_entropy(a, gamma),
                           relative_entropy_variance(a, gamma))


GibbsPair = tuple[GibbsSpec, GibbsSpec]


def _gamma_pair(ctx: GibbsSpec | GibbsPair) -> tuple[ProbVec, ProbVec]:
    if isinstance(ctx, GibbsSpec):
        return ctx.gamma, ctx.gamma
    gp, gq = ctx
    return gp.gamma, gq.gamma


def mean_resources(p: ProbVec, q: ProbVec,
                   ctx: GibbsSpec | GibbsPair | None) -> tuple[float, float]:
    """The pair (H(p), H(q)) or (D(p||gamma), D(q||gamma))."""
    if ctx is None:
        return shannon_entropy(p), shannon_entropy(q)
    gp, gq = _gamma_pair(ctx)
    return relative_entropy(p, gp), relative_entropy(q, gq)


def variance_resources(p: ProbVec, q: ProbVec,
                       ctx: GibbsSpec | GibbsPair | None) -> tuple[float, float]:
    if ctx is None:
        return entropy_variance(p), entropy_variance(q)
    gp, gq = _gamma_pair(ctx)
    return relative_entropy_variance(p, gp), relative_entropy_variance(q, gq)


def asymptotic_rate(p: ProbVec, q: ProbVec,
                    ctx: GibbsSpec | GibbsPair | None = None) -> float:
    """H(p)/H(q) for the entanglement direction, D(p||g)/D(q||g) for thermo."""
    hp, hq = mean_resources(p, q, ctx)
    if hq <= 0.0:
        raise DegenerateTarget("target state carries no resource")
    return hp / hq

def _same_sorted(p: ProbVec, q: ProbVec, tol: float = 1e-12) -> bool:
    if p.dim != q.dim:
        return False
    return all(abs(x - y) <= tol
               for x, y in zip(sorted(p.entries), sorted(q.entries)))


def irreversibility(p: ProbVec, q: ProbVec,
                    ctx: GibbsSpec | GibbsPair | None = None
                    ) -> float | _Indeterminate:
    """Ratio of variance-to-mean resource ratios; 1 means resonance.

    Returns math.inf when only the target variance vanishes and the
    INDETERMINATE sentinel when both variances vanish (unless p and q are
    the same state, which is resonant by definition).
    """
    hp, hq = mean_resources(p, q, ctx)
    if hp <= 0.0 or hq <= 0.0:
        raise DegenerateTarget("irreversibility undefined for free states")
    vp, vq = variance_resources(p, q, ctx)
    if _same_sorted(p, q):
        return 1.0
    if vq == 0.0:
        return math.inf if vp > 0.0 else INDETERMINATE
    return (vp / hp) / (vq / hq)
