"""Rayleigh-normal distribution: exact CDF evaluation through the crossing
point of the two Gaussian families, asymptotic expansions at both ends, and
the conjectured converse-with-infidelity rate built on them.

Everything exponential is assembled in log domain; the CDF spans hundreds of
orders of magnitude over the grids exercised here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

from scipy.optimize import brentq
from scipy.special import log_ndtr, ndtr

from .distributions import GibbsSpec, ProbVec
from .entropic import (
    INDETERMINATE,
    GibbsPair,
    irreversibility,
    mean_resources,
    variance_resources,
)
from .errors import DegenerateTarget, NoBracket, OutOfExpansionRange, ValidationFailure
from .moderate import ModerateSequence

RESIDUAL_TOL = 1e-10

Method = Literal["integral", "expansion_minus", "expansion_plus"]
Side = Literal["direct", "converse"]


@dataclass(frozen=True)
class RayleighEval:
    nu: float
    mu: float
    Z: float
    alpha_cross: float
    method: Method


def gaussian_cdf(x: float) -> float:
    return float(ndtr(x))


def gaussian_cdf_shifted(x: float, mu: float, nu: float) -> float:
    if nu <= 0.0:
        raise ValidationFailure(f"variance nu must be positive, got {nu}")
    return float(ndtr((x - mu) / math.sqrt(nu)))


def _log_pdf(x: float) -> float:
    return -0.5 * x * x - 0.5 * math.log(2.0 * math.pi)


def _crossing_residual(alpha: float, mu: float, nu: float) -> float:
    """ln(pdf ratio) - ln(cdf ratio); the crossing point is its root."""
    shifted = (alpha - mu) / math.sqrt(nu)
    log_ratio_pdf = _log_pdf(alpha) - (_log_pdf(shifted) - 0.5 * math.log(nu))
    log_ratio_cdf = float(log_ndtr(alpha)) - float(log_ndtr(shifted))
    return log_ratio_pdf - log_ratio_cdf


def crossing_point(mu: float, nu: float) -> float:
    """Root of pdf(a)/pdf_shift(a) = cdf(a)/cdf_shift(a), bracketed from the
    two asymptotic seeds mu/(1-sqrt(nu)) and mu/(1-nu)."""
    if nu <= 0.0 or nu == 1.0:
        raise ValidationFailure("crossing point needs nu > 0, nu != 1")
    s1 = mu / (1.0 - math.sqrt(nu))
    s2 = mu / (1.0 - nu)
    lo, hi = min(s1, s2), max(s1, s2)
    span = max(hi - lo, 1.0)
    g = lambda a: _crossing_residual(a, mu, nu)
    for widen in range(11):
        try:
            glo, ghi = g(lo), g(hi)
        except (OverflowError, ValueError):
            raise NoBracket(f"crossing residual not evaluable on [{lo}, {hi}]")
        if math.isfinite(glo) and math.isfinite(ghi) and glo * ghi <= 0.0:
            root = float(brentq(g, lo, hi, xtol=1e-14, rtol=8.9e-16, maxiter=300))
            resid = abs(g(root))
            if resid > RESIDUAL_TOL:
                raise NoBracket(f"crossing residual {resid} above {RESIDUAL_TOL}")
            return root
        lo -= span
        hi += span
    raise NoBracket(
        f"no sign change around seeds {s1:.3g}, {s2:.3g} after widening 10x")


def _sqrt_one_minus_z_parts(mu: float, nu: float, alpha: float) -> tuple[float, float]:
    """Logs of the two overlap summands: the Bhattacharyya integral above the
    crossing point and the glued-CDF geometric mean below it."""
    shift_mean = -mu / (1.0 + nu)
    shift_var = 2.0 * nu / (1.0 + nu)
    arg1 = (-alpha - shift_mean) / math.sqrt(shift_var)
    log_t1 = (0.5 * math.log(2.0 * math.sqrt(nu) / (1.0 + nu))
              - mu * mu / (4.0 * (1.0 + nu))
              + float(log_ndtr(arg1)))
    log_t2 = 0.5 * (float(log_ndtr(alpha))
                    + float(log_ndtr((alpha - mu) / math.sqrt(nu))))
    return log_t1, log_t2


def log_expansion_minus(mu: float, nu: float) -> float:
    """ln Z for mu -> -inf."""
    return -0.5 * mu * mu / (1.0 - math.sqrt(nu)) ** 2


def log_expansion_plus(mu: float, nu: float) -> float:
    """ln(1 - Z) for mu -> +inf."""
    return -mu * mu / (4.0 * (1.0 + nu))


def rayleigh_cdf(nu: float, mu: float) -> RayleighEval:
    """Evaluate Z_nu(mu) = 1 - (overlap of the glued optimiser), falling back
    to the tail expansions when the closed form degenerates numerically.

    The glued closed form applies for nu > 1; for nu < 1 the construction
    mirrors, captured by the duality Z_nu(mu) = Z_{1/nu}(mu / sqrt(nu)).
    """
    if nu <= 0.0 or nu == 1.0:
        raise ValidationFailure("rayleigh_cdf needs nu > 0, nu != 1")
    if nu < 1.0:
        dual = rayleigh_cdf(1.0 / nu, mu / math.sqrt(nu))
        alpha = mu + math.sqrt(nu) * dual.alpha_cross
        return RayleighEval(nu, mu, dual.Z, alpha, dual.method)
    try:
        alpha = crossing_point(mu, nu)
    except NoBracket:
        return _expansion_eval(nu, mu)
    log_t1, log_t2 = _sqrt_one_minus_z_parts(mu, nu, alpha)
    # assemble Z = 1 - S = (1 - t2) - t1 without cancellation in 1 - t2
    t1 = math.exp(log_t1)
    z = -math.expm1(log_t2) - t1
    if z <= 0.0 and mu < 0:
        # closed form lost all digits; the minus-side expansion is sharper
        return _expansion_eval(nu, mu, alpha)
    return RayleighEval(nu, mu, min(max(z, 0.0), 1.0), alpha, "integral")


def _expansion_eval(nu: float, mu: float, alpha: float | None = None) -> RayleighEval:
    if mu <= 0.0:
        a = alpha if alpha is not None else mu / (1.0 - math.sqrt(nu))
        return RayleighEval(nu, mu, math.exp(log_expansion_minus(mu, nu)),
                            a, "expansion_minus")
    a = alpha if alpha is not None else mu / (1.0 - nu)
    return RayleighEval(nu, mu, -math.expm1(log_expansion_plus(mu, nu)),
                        a, "expansion_plus")


def rayleigh_inverse_approx(nu: float, eps: float, side: Side,
                            refine: bool = False) -> float:
    """Closed-form asymptotic inverse of Z_nu.

    Returns the magnitude |1-sqrt(nu)| sqrt(-2 ln eps) on the direct side
    (the matching argument is mu = -magnitude) and sqrt(-4(1+nu) ln(1-eps))
    on the converse side. With refine=True, returns the signed mu found by
    bisecting the exact CDF around the seed.
    """
    if nu <= 0.0 or nu == 1.0:
        raise ValidationFailure("inverse needs nu > 0, nu != 1")
    if side == "direct":
        if not 0.0 < eps <= 0.01:
            raise OutOfExpansionRange("direct inverse valid for eps in (0, 0.01]")
        seed = abs(1.0 - math.sqrt(nu)) * math.sqrt(-2.0 * math.log(eps))
        mu_seed = -seed
    else:
        if not 0.99 <= eps < 1.0:
            raise OutOfExpansionRange("converse inverse valid for eps in [0.99, 1)")
        seed = math.sqrt(-4.0 * (1.0 + nu) * math.log1p(-eps))
        mu_seed = seed
    if not refine:
        return seed
    lo, hi = mu_seed - max(2.0, 0.5 * abs(mu_seed)), mu_seed + max(2.0, 0.5 * abs(mu_seed))
    f = lambda m: rayleigh_cdf(nu, m).Z - eps
    flo, fhi = f(lo), f(hi)
    widen = 0
    while flo * fhi > 0.0 and widen < 10:
        lo -= 2.0
        hi += 2.0
        flo, fhi = f(lo), f(hi)
        widen += 1
    if flo * fhi > 0.0:
        raise NoBracket("refined inverse failed to bracket the error level")
    return float(brentq(f, lo, hi, xtol=1e-12, maxiter=200))


@dataclass(frozen=True)
class ConjecturedRate:
    """Converse-regime rate under infidelity; a conjecture, not a theorem."""

    R_inf: float
    nu: float
    coefficient: float
    value: float
    conjecture: bool = True


def conjectured_converse_infidelity(p: ProbVec, q: ProbVec,
                                    ctx: GibbsSpec | GibbsPair | None,
                                    direction: str, seq: ModerateSequence,
                                    n: int) -> ConjecturedRate:
    """R_inf + sqrt(2 V_p / H_q^2) sqrt(1 + 1/nu) t_n, clearly flagged."""
    c = None if direction == "entanglement" else ctx
    if direction != "entanglement" and ctx is None:
        raise ValidationFailure("thermodynamic direction needs a GibbsSpec")
    hp, hq = mean_resources(p, q, c)
    if hq <= 0.0:
        raise DegenerateTarget("target state carries no resource")
    vp, vq = variance_resources(p, q, c)
    r_inf = hp / hq
    nu = irreversibility(p, q, c) if hp > 0.0 else 0.0
    # stable rewriting: V_p (1 + 1/nu) = V_p + V_q H_p / H_q
    coeff = math.sqrt(2.0 * (vp + vq * hp / hq)) / hq
    nu_out = 1.0 if nu is INDETERMINATE else float(nu)
    return ConjecturedRate(r_inf, nu_out, coeff,
                           r_inf + coeff * seq.t(n))
