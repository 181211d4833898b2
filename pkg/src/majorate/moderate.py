"""Moderate-deviation toolkit: magnitude and rank tail sums of tensor powers
with finite-size exponent estimates, crossing values, the cutting point, the
cut-and-pile construction, and pairwise dominance scans of total states.

Thresholds and ranks are carried in log domain; raw counts overflow doubles
long before the interesting regime is reached.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

from .distributions import (
    DEFAULT_CLASS_CAP,
    ProbVec,
    ProductDist,
    _mass,
    int_from_log,
    prefix_sum_at_rank,
    prefix_sum_at_log_rank,
    product_from_classes,
    tail_sum_at_log_rank,
    tensor_product,
    total_states,
)
from .entropic import entropy_variance, shannon_entropy
from .errors import RankOutOfRange, UndefinedCase, ValidationFailure

DEFAULT_SLACK = 0.05


@dataclass(frozen=True)
class ModerateSequence:
    """t_n = c * n^(-alpha) with 0 < alpha < 1/2, so t_n -> 0, sqrt(n) t_n -> inf."""

    c: float = 1.0
    alpha: float = 1.0 / 3.0

    def __post_init__(self):
        if self.c <= 0.0:
            raise ValidationFailure(f"scale c must be positive, got {self.c}")
        if not 0.0 < self.alpha < 0.5:
            raise ValidationFailure(
                f"alpha must lie in the open interval (0, 1/2), got {self.alpha}")

    def t(self, n: int) -> float:
        return self.c * float(n) ** (-self.alpha)

    def nt2(self, n: int) -> float:
        """n * t_n^2, the moderate-deviation normaliser."""
        return n * self.t(n) ** 2


@dataclass(frozen=True)
class TailReport:
    n: int
    x: float | None
    sum: float
    exponent_estimate: float | None
    predicted_exponent: float | None


Side = Literal["above", "below"]
RankSide = Literal["head", "tail"]
Mode = Literal["cis", "trans"]


def power_rank_threshold_log(a: ProbVec, x: float, n: int,
                             seq: ModerateSequence) -> float:
    """ln of the rank threshold exp(n H(a) + x n t_n) for the n-fold power."""
    if n < 1:
        raise ValidationFailure(f"n must be >= 1, got {n}")
    return n * shannon_entropy(a) + x * n * seq.t(n)


def total_rank_threshold_log(q: ProbVec, f: ProbVec, n: int, m: int,
                             x: float, seq: ModerateSequence) -> float:
    """ln of the threshold exp(H(Q) + x n t_n) for the total target state."""
    if n < 1:
        raise ValidationFailure(f"n must be >= 1, got {n}")
    hq = m * shannon_entropy(q) + n * shannon_entropy(f)
    return hq + x * n * seq.t(n)


def _report(n: int, x: float | None, total: float, variance: float,
            seq: ModerateSequence | None) -> TailReport:
    if seq is None or x is None:
        return TailReport(n, x, total, None, None)
    est = math.log(total) / seq.nt2(n) if total > 0.0 else -math.inf
    if variance > 0.0:
        predicted = -x * x / (2.0 * variance)
    else:
        predicted = 0.0 if x == 0.0 else -math.inf
    return TailReport(n, x, total, est, predicted)


def magnitude_tail_sum(a: ProbVec, n: int, log_threshold: float,
                       side: Side, *, seq: ModerateSequence | None = None,
                       x: float | None = None,
                       class_cap: int = DEFAULT_CLASS_CAP) -> TailReport:
    """Exact mass of outcomes of a^(x)n with probability above/below a threshold."""
    dist = tensor_product([(a, n)], class_cap=class_cap)
    if side == "above":
        total = math.fsum(_mass(m, lp) for lp, m in dist.classes
                          if lp >= log_threshold - 1e-12)
    else:
        total = math.fsum(_mass(m, lp) for lp, m in dist.classes
                          if lp <= log_threshold + 1e-12)
    return _report(n, x, min(total, 1.0), entropy_variance(a), seq)


def rank_tail_sum(a: ProbVec, n: int, log_rank: float, side: RankSide,
                  *, seq: ModerateSequence | None = None,
                  x: float | None = None,
                  class_cap: int = DEFAULT_CLASS_CAP) -> TailReport:
    """Mass of the first k (head) or last-from-k (tail) sorted outcomes of
    a^(x)n, k = exp(log_rank); partial classes interpolate linearly."""
    dist = tensor_product([(a, n)], class_cap=class_cap)
    if log_rank > math.log(dist.full_count) + 1e-9:
        raise RankOutOfRange(f"log rank {log_rank} beyond ln({dist.full_count})")
    if side == "head":
        total = prefix_sum_at_log_rank(dist, log_rank)
    else:
        total = tail_sum_at_log_rank(dist, log_rank)
    return _report(n, x, total, entropy_variance(a), seq)


@dataclass(frozen=True)
class CrossingValues:
    cis: float
    trans: float


def crossing_values(mu: float, nu: float) -> CrossingValues:
    """Offsets where the tail exponents of input and target states meet:
    mu/(1-sqrt(nu)) on the same side, mu/(1+sqrt(nu)) on opposite sides."""
    if nu < 0.0:
        raise ValidationFailure(f"nu must be non-negative, got {nu}")
    root = math.sqrt(nu)
    cis = mu / (1.0 - root) if root != 1.0 else math.inf
    trans = mu / (1.0 + root)
    return CrossingValues(cis, trans)


def cutting_point(mu: float, nu: float) -> float:
    """Cut location for the cut-and-pile construction, by regime."""
    if mu == 0.0:
        raise UndefinedCase("cutting point undefined at mu = 0")
    z = crossing_values(mu, nu)
    if mu > 0.0:
        return z.trans
    if nu < 1.0:
        return 2.0 * mu - z.cis
    if nu > 1.0:
        return z.cis
    raise UndefinedCase("cutting point undefined for mu < 0, nu = 1")


def cut_and_pile(P: ProductDist, log_cut_rank: float) -> ProductDist:
    """Zero all mass at sorted ranks >= the cut and pile it onto the top
    outcome. Moves the distribution up the majorisation order."""
    cut = int_from_log(log_cut_rank)
    if cut < 1:
        raise RankOutOfRange(f"cut rank {cut} below 1")
    if cut > P.full_count:
        return P
    kept = max(cut - 1, 1)  # the top outcome itself is never zeroed
    kept_mass = prefix_sum_at_rank(P, min(kept, P.full_count))
    piled = 1.0 - kept_mass
    if piled <= 0.0:
        return P
    top_lp, top_m = P.classes[0]
    new_top = math.exp(top_lp) + piled
    classes: list[tuple[float, int]] = [(math.log(new_top), 1)]
    if top_m > 1 and kept > 1:
        classes.append((top_lp, min(top_m, kept) - 1))
    remaining = kept - min(top_m, kept)
    j = 1
    while remaining > 0 and j < P.num_classes:
        lp, m = P.classes[j]
        take = min(m, remaining)
        classes.append((lp, take))
        remaining -= take
        j += 1
    return product_from_classes(classes, P.full_count)


def offset_rate(p: ProbVec, q: ProbVec, f: ProbVec, mu: float,
                seq: ModerateSequence, n: int) -> float:
    """Conversion rate (H(f)-H(p)+mu t_n)/(H(f)-H(q)) used by the scans."""
    hf, hp, hq = map(shannon_entropy, (f, p, q))
    if hf == hq:
        raise ValidationFailure("target carries the same entropy as the free state")
    return (hf - hp + mu * seq.t(n)) / (hf - hq)


def offset_irreversibility(p: ProbVec, q: ProbVec, f: ProbVec) -> float:
    """V(p)/V(q) * (H(f)-H(q))/(H(f)-H(p)), the nu of the tail-bound scans."""
    hf, hp, hq = map(shannon_entropy, (f, p, q))
    return (entropy_variance(p) / entropy_variance(q)) * (hf - hq) / (hf - hp)


def dominance_check(p: ProbVec, q: ProbVec, f: ProbVec, n: int, m: int,
                    seq: ModerateSequence, x_grid: Sequence[float],
                    mode: Mode, *, slack: float = 1e-12,
                    class_cap: int = DEFAULT_CLASS_CAP) -> list[bool]:
    """Pointwise dominance of total-state cumulative masses on an x grid.

    cis: head(P) >= head(Q) at the threshold rank; trans: tail(P) >= head(Q).
    """
    P, Q = total_states(p, q, f, n, m, class_cap=class_cap)
    log_full_p = math.log(P.full_count)
    log_full_q = math.log(Q.full_count)
    out: list[bool] = []
    for x in x_grid:
        log_k = total_rank_threshold_log(q, f, n, m, x, seq)
        head_q = prefix_sum_at_log_rank(Q, min(log_k, log_full_q))
        if mode == "cis":
            lhs = prefix_sum_at_log_rank(P, min(log_k, log_full_p))
        else:
            lhs = 0.0 if log_k > log_full_p else tail_sum_at_log_rank(P, log_k)
        out.append(lhs >= head_q - slack)
    return out

