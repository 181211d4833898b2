"""Probability vectors, Gibbs embedding, and type-class tensor powers.

Probabilities live in doubles; outcome counts and class multiplicities are
exact Python integers (they reach 2^1000 and beyond), and everything that
could overflow a double is carried in log domain.
"""
from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import (
    ClassExplosion,
    DimensionMismatch,
    IrrationalWeights,
    NegativeEntry,
    NotNormalised,
    RankOutOfRange,
)

NEG_TOL = 1e-12
SUM_TOL = 1e-9
CLASS_MERGE_TOL = 1e-12
DEFAULT_CLASS_CAP = 10_000_000

_LOG2 = math.log(2.0)


@dataclass(frozen=True)
class ProbVec:
    """Finite probability distribution. Immutable; entries renormalised."""

    entries: tuple[float, ...]

    @property
    def dim(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i: int) -> float:
        return self.entries[i]


@dataclass(frozen=True)
class SortedProbVec:
    """A ProbVec rearranged into non-increasing order.

    `permutation[i]` is the original index of the i-th largest entry.
    """

    entries: tuple[float, ...]
    permutation: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.entries)


def make_prob_vec(entries: Sequence[float], *, neg_tol: float = NEG_TOL,
                  sum_tol: float = SUM_TOL) -> ProbVec:
    """Validate, clamp round-off negatives to zero, and renormalise exactly."""
    if len(entries) < 1:
        raise NotNormalised("empty distribution")
    vals = [float(x) for x in entries]
    for x in vals:
        if x < -neg_tol:
            raise NegativeEntry(f"entry {x} below -{neg_tol}")
    total = math.fsum(vals)
    if abs(total - 1.0) > sum_tol:
        raise NotNormalised(f"entries sum to {total}, not 1 within {sum_tol}")
    clamped = [x if x > 0.0 else 0.0 for x in vals]
    total = math.fsum(clamped)
    return ProbVec(tuple(x / total for x in clamped))


def from_amplitudes(amplitudes: Sequence[float], *, sum_tol: float = SUM_TOL) -> ProbVec:
    """Squared moduli of amplitudes; signs are discarded."""
    probs = [float(a) * float(a) for a in amplitudes]
    return make_prob_vec(probs, sum_tol=sum_tol)


def sort_desc(p: ProbVec) -> SortedProbVec:
    order = sorted(range(p.dim), key=lambda i: -p.entries[i])
    return SortedProbVec(tuple(p.entries[i] for i in order), tuple(order))


def uniform(dim: int) -> ProbVec:
    return ProbVec((1.0 / dim,) * dim)


def sharp(dim: int = 1) -> ProbVec:
    """Point mass; the free state of entanglement/coherence theories."""
    return ProbVec((1.0,) + (0.0,) * (dim - 1))


@dataclass(frozen=True)
class GibbsSpec:
    """Thermal free state with optional exact rational weights.

    The rational form (each weight d_i/D with integer d_i > 0) is what the
    embedding map needs; the float form suffices for every entropic quantity
    because those are invariant under embedding.
    """

    energies: tuple[float, ...]
    beta: float
    weights: tuple[Fraction, ...] | None = None

    @property
    def dim(self) -> int:
        return len(self.energies)

    @property
    def gamma(self) -> ProbVec:
        """The Gibbs distribution itself, as floats."""
        if self.weights is not None:
            return ProbVec(tuple(float(w) for w in self.weights))
        logs = [-self.beta * e for e in self.energies]
        top = max(logs)
        unnorm = [math.exp(l - top) for l in logs]
        z = math.fsum(unnorm)
        return ProbVec(tuple(u / z for u in unnorm))

    @property
    def split_counts(self) -> tuple[int, ...]:
        """Integer d_i with weight_i = d_i / D; requires rational weights."""
        if self.weights is None:
            raise IrrationalWeights(
                "embedding needs rational weights; supply them explicitly")
        denom = 1
        for w in self.weights:
            denom = denom * w.denominator // math.gcd(denom, w.denominator)
        return tuple(int(w * denom) for w in self.weights)

    @property
    def embedded_dim(self) -> int:
        return sum(self.split_counts)


def gibbs_from_weights(weights: Sequence[tuple[int, int] | Fraction]) -> GibbsSpec:
    """Build a GibbsSpec from exact rational weights summing to 1."""
    fracs = []
    for w in weights:
        f = w if isinstance(w, Fraction) else Fraction(int(w[0]), int(w[1]))
        if f <= 0:
            raise NegativeEntry(f"weight {f} not positive")
        fracs.append(f)
    if sum(fracs) != 1:
        raise NotNormalised(f"rational weights sum to {sum(fracs)}, not 1")
    # energies consistent with beta = 1 so that gamma_i ∝ exp(-beta E_i)
    energies = tuple(-math.log(float(f)) for f in fracs)
    return GibbsSpec(energies, 1.0, tuple(fracs))


def gibbs_from_energies(energies: Sequence[float], beta: float) -> GibbsSpec:
    """Float-only GibbsSpec; usable everywhere except the embedding map."""
    if beta < 0:
        raise NegativeEntry(f"beta {beta} negative")
    return GibbsSpec(tuple(float(e) for e in energies), float(beta), None)


def embed(p: ProbVec, g: GibbsSpec) -> ProbVec:
    """Split outcome i into d_i equal parts; sends the Gibbs state to uniform."""
    if p.dim != g.dim:
        raise DimensionMismatch(f"dim {p.dim} vs Gibbs dim {g.dim}")
    counts = g.split_counts
    out: list[float] = []
    for prob, d in zip(p.entries, counts):
        out.extend([prob / d] * d)
    return ProbVec(tuple(out))


@dataclass(frozen=True)
class ProductDist:
    """Implicit sorted representation of a tensor product of distributions.

    `classes` holds (log_prob, multiplicity) pairs, strictly decreasing in
    log_prob, covering only positive-probability outcomes. `full_count`
    includes zero-probability outcomes of the underlying factors so that
    zero-padding semantics survive the compression.
    """

    base_factors: tuple[tuple[ProbVec, int], ...]
    classes: tuple[tuple[float, int], ...]
    full_count: int
    _cum_counts: tuple[int, ...] = field(repr=False, default=())
    _cum_mass: tuple[float, ...] = field(repr=False, default=())
    _suffix_mass: tuple[float, ...] = field(repr=False, default=())
    _log_cum_counts: tuple[float, ...] = field(repr=False, default=())

    @property
    def support_count(self) -> int:
        return self._cum_counts[-1] if self._cum_counts else 0

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    def class_mass(self, j: int) -> float:
        lp, m = self.classes[j]
        return _mass(m, lp)


def _mass(count: int, log_prob: float) -> float:
    """count * exp(log_prob) without overflowing the count conversion."""
    if count == 0:
        return 0.0
    if count.bit_length() <= 52:
        v = count * math.exp(log_prob)
        if v > 0.0 or log_prob + math.log(count) < -745.0:
            return v
    return math.exp(math.log(count) + log_prob)


def _kahan_cumsum(values: list[float]) -> list[float]:
    """Running compensated sums; error stays O(eps) regardless of length."""
    out: list[float] = []
    total = 0.0
    comp = 0.0
    for v in values:
        y = v - comp
        t = total + y
        comp = (t - total) - y
        total = t
        out.append(total)
    return out


def _finish_product(factors: tuple[tuple[ProbVec, int], ...],
                    classes: list[tuple[float, int]],
                    full_count: int) -> ProductDist:
    classes.sort(key=lambda c: -c[0])
    merged: list[tuple[float, int]] = []
    for lp, m in classes:
        if merged and merged[-1][0] - lp <= CLASS_MERGE_TOL:
            merged[-1] = (merged[-1][0], merged[-1][1] + m)
        else:
            merged.append((lp, m))
    cum_counts: list[int] = []
    running = 0
    masses: list[float] = []
    for lp, m in merged:
        running += m
        cum_counts.append(running)
        masses.append(_mass(m, lp))
    cum_mass = _kahan_cumsum(masses)
    suffix_mass = _kahan_cumsum(masses[::-1])[::-1]
    log_cum = tuple(math.log(c) for c in cum_counts)
    return ProductDist(factors, tuple(merged), full_count,
                       tuple(cum_counts), tuple(cum_mass),
                       tuple(suffix_mass), log_cum)


def _power_classes(p: ProbVec, n: int, cap: int) -> list[tuple[float, int]]:
    """Type classes of p^(x)n over the positive support, multiplicities exact.

    The chained binomials C(remaining, k) multiply to the multinomial
    coefficient; each is updated incrementally to keep big-int work linear.
    """
    support = [x for x in p.entries if x > 0.0]
    logs = [math.log(x) for x in support]
    d = len(support)
    if n == 0:
        return [(0.0, 1)]
    num_classes = math.comb(n + d - 1, d - 1)
    if num_classes > cap:
        raise ClassExplosion(
            f"{num_classes} type classes for one factor exceeds cap {cap}")
    out: list[tuple[float, int]] = []

    def rec(idx: int, remaining: int, log_acc: float, mult_acc: int):
        if idx == d - 1:
            out.append((log_acc + remaining * logs[idx], mult_acc))
            return
        coeff = mult_acc  # mult_acc * C(remaining, k), updated in place
        for k in range(remaining + 1):
            rec(idx + 1, remaining - k, log_acc + k * logs[idx], coeff)
            if k < remaining:
                coeff = coeff * (remaining - k) // (k + 1)

    rec(0, n, 0.0, 1)
    return out


def tensor_product(factors: Iterable[tuple[ProbVec, int]],
                   *, class_cap: int = DEFAULT_CLASS_CAP) -> ProductDist:
    """Aggregate p1^(x)e1 (x) p2^(x)e2 (x) ... into merged type classes."""
    fs = tuple((p, int(e)) for p, e in factors)
    if not fs:
        raise DimensionMismatch("tensor_product needs at least one factor")
    for _, e in fs:
        if e < 0:
            raise RankOutOfRange(f"negative exponent {e}")
    full_count = 1
    combined: list[tuple[float, int]] = [(0.0, 1)]
    for p, e in fs:
        full_count *= p.dim ** e
        part = _power_classes(p, e, class_cap)
        if len(combined) * len(part) > class_cap:
            raise ClassExplosion(
                f"class count {len(combined) * len(part)} exceeds cap {class_cap}")
        combined = [(lp1 + lp2, m1 * m2)
                    for lp1, m1 in combined for lp2, m2 in part]
    return _finish_product(fs, combined, full_count)


def product_from_classes(classes: Sequence[tuple[float, int]],
                         full_count: int) -> ProductDist:
    """Rebuild a ProductDist from explicit classes (cut-and-pile output path)."""
    return _finish_product((), list(classes), full_count)


def dense_probs(d: ProductDist) -> list[float]:
    """Materialise every outcome, sorted descending. Oracle-scale only."""
    if d.support_count > 1_000_000:
        raise ClassExplosion("dense materialisation refused above 10^6 outcomes")
    out: list[float] = []
    for lp, m in d.classes:
        out.extend([math.exp(lp)] * m)
    out.extend([0.0] * (d.full_count - d.support_count))
    return out


def prefix_sum_at_rank(d: ProductDist, k: int) -> float:
    """Mass of the k largest outcomes; exact partial-class consumption."""
    if k < 0 or k > d.full_count:
        raise RankOutOfRange(f"rank {k} outside [0, {d.full_count}]")
    if k == 0:
        return 0.0
    if k >= d.support_count:
        return 1.0
    j = bisect_left(d._cum_counts, k)
    prev_count = d._cum_counts[j - 1] if j > 0 else 0
    prev_mass = d._cum_mass[j - 1] if j > 0 else 0.0
    lp, _ = d.classes[j]
    return min(prev_mass + _mass(k - prev_count, lp), 1.0)


def prefix_sum_at_log_rank(d: ProductDist, log_k: float) -> float:
    """Continuous-rank prefix mass S(k) for k = exp(log_k), in log domain.

    Fractional ranks interpolate linearly inside a class.
    """
    if log_k == -math.inf:
        return 0.0
    if d.support_count == 0:
        return 0.0
    if log_k >= d._log_cum_counts[-1]:
        if log_k > math.log(d.full_count) + 1e-9:
            raise RankOutOfRange(f"log rank {log_k} beyond full outcome count")
        return 1.0
    j = bisect_left(d._log_cum_counts, log_k)
    # guard against log round-off at exact boundaries
    while j < d.num_classes and d._log_cum_counts[j] < log_k:
        j += 1
    prev_count = d._cum_counts[j - 1] if j > 0 else 0
    prev_mass = d._cum_mass[j - 1] if j > 0 else 0.0
    lp, _ = d.classes[j]
    if prev_count == 0:
        partial = math.exp(log_k + lp)
    else:
        delta = math.log(prev_count) - log_k
        if delta >= 0.0:
            partial = 0.0
        else:
            log_partial_count = log_k + math.log1p(-math.exp(delta))
            partial = math.exp(log_partial_count + lp)
    return min(prev_mass + partial, 1.0)


def tail_sum_at_log_rank(d: ProductDist, log_k: float) -> float:
    """Mass of outcomes at ranks >= k = exp(log_k), continuous rank.

    Accumulated from the small end so that tails far below 1e-16 keep full
    relative precision; never computed as 1 minus a head sum.
    """
    if log_k <= 0.0:
        return 1.0
    if d.support_count == 0:
        return 0.0
    # ranks k, k+1, ... contribute; the span inside the boundary class is
    # cum_j - (k - 1)
    log_km1 = log_k + math.log1p(-math.exp(-log_k))
    if log_km1 >= d._log_cum_counts[-1]:
        return 0.0
    j = bisect_left(d._log_cum_counts, log_km1)
    while j < d.num_classes and d._log_cum_counts[j] < log_km1:
        j += 1
    if j == d.num_classes:
        return 0.0
    lp, _ = d.classes[j]
    after = d._suffix_mass[j + 1] if j + 1 < d.num_classes else 0.0
    log_cum_j = d._log_cum_counts[j]
    if log_km1 == -math.inf:
        return 1.0
    delta = log_km1 - log_cum_j
    if delta >= 0.0:
        return after
    log_span = log_cum_j + math.log1p(-math.exp(delta))
    return min(after + math.exp(log_span + lp), 1.0)


def int_from_log(log_x: float) -> int:
    """exp(log_x) as a big int, exact to float precision (~1e-16 relative)."""
    if log_x < 0:
        return 0 if log_x < -0.7 else 1
    e2 = log_x / _LOG2
    shift = int(e2) - 62
    if shift <= 0:
        return round(math.exp(log_x))
    frac = e2 - int(e2)
    return round(2.0 ** (frac + 62)) << shift


def total_states(p: ProbVec, q: ProbVec, f: ProbVec, n: int, m: int,
                 *, class_cap: int = DEFAULT_CLASS_CAP) -> tuple[ProductDist, ProductDist]:
    """Total input p^(x)n (x) f^(x)m and target q^(x)m (x) f^(x)n."""
    P = tensor_product([(p, n), (f, m)], class_cap=class_cap)
    Q = tensor_product([(q, m), (f, n)], class_cap=class_cap)
    return P, Q
