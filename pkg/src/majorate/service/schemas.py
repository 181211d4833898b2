"""Pydantic request/response models for the compute service.

Distributions travel as {"entries": [...]} and Gibbs specifications as
{"energies": [...], "beta": x} or {"weights": [[num, den], ...]}; these are
the wire formats the CLI emits and re-parses.
"""
from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator

from ..distributions import (
    GibbsSpec,
    ProbVec,
    gibbs_from_energies,
    gibbs_from_weights,
    make_prob_vec,
)


class DistributionIn(BaseModel):
    entries: list[float] = Field(min_length=1)

    def to_prob_vec(self) -> ProbVec:
        return make_prob_vec(self.entries)


class GibbsIn(BaseModel):
    energies: Optional[list[float]] = None
    beta: Optional[float] = None
    weights: Optional[list[tuple[int, int]]] = None

    @model_validator(mode="after")
    def _one_form(self):
        if self.weights is None and (self.energies is None or self.beta is None):
            raise ValueError("supply weights or both energies and beta")
        return self

    def to_spec(self) -> GibbsSpec:
        if self.weights is not None:
            return gibbs_from_weights(self.weights)
        return gibbs_from_energies(self.energies, self.beta)


class SequenceIn(BaseModel):
    c: float = 1.0
    alpha: float = Field(default=1.0 / 3.0, gt=0.0, lt=0.5)


class EntropyRequest(BaseModel):
    dist: DistributionIn
    gibbs: Optional[GibbsIn] = None


class EntropyResponse(BaseModel):
    H: float
    V: float
    D_rel: Optional[float] = None
    V_rel: Optional[float] = None


class TotalStateForm(BaseModel):
    """Optional many-copy form: compare a^(x)n (x) f^(x)m with b^(x)m (x) f^(x)n."""

    n: int = Field(ge=0)
    m: int = Field(ge=0)
    f: Optional[DistributionIn] = None


class CheckRequest(BaseModel):
    a: DistributionIn
    b: DistributionIn
    total: Optional[TotalStateForm] = None


class CheckResponse(BaseModel):
    majorises: bool


class EpsilonRequest(BaseModel):
    a: DistributionIn
    b: DistributionIn
    direction: Literal["post", "pre"] = "post"
    metric: Literal["tvd", "infidelity"] = "tvd"
    total: Optional[TotalStateForm] = None


class EpsilonResponse(BaseModel):
    epsilon: float
    witness: Optional[list[float]] = None  # omitted for total-state inputs
    direction: Literal["post", "pre"]
    metric: Literal["tvd", "infidelity"]


class EmbedRequest(BaseModel):
    dist: DistributionIn
    gibbs: GibbsIn


class EmbedResponse(BaseModel):
    embedded: list[float]


class RateExactRequest(BaseModel):
    p: DistributionIn
    q: DistributionIn
    f: Optional[DistributionIn] = None
    n: int = Field(ge=1)
    eps: float = Field(ge=0.0, lt=1.0)
    direction: Literal["ent", "th"] = "ent"
    metric: Literal["tvd", "fid"] = "tvd"
    gibbs: Optional[GibbsIn] = None
    cap_classes: int = 10_000_000


class RateExactResponse(BaseModel):
    n: int
    epsilon: float
    m_star: int
    rate: float
    rate_exact: str  # m/n as an exact fraction
    metric: str


class RateExpandRequest(BaseModel):
    p: DistributionIn
    q: DistributionIn
    direction: Literal["ent", "th"] = "ent"
    regime: Literal["direct", "converse"] = "direct"
    seq: SequenceIn = SequenceIn()
    n: int = Field(ge=1)
    gibbs: Optional[GibbsIn] = None


class RateExpandResponse(BaseModel):
    R_inf: float
    nu: Optional[float]  # None encodes an infinite irreversibility parameter
    coefficient: float
    regime: str
    direction: str
    t_n: float
    R_n: float


class ResonanceScanRequest(BaseModel):
    p: DistributionIn
    direction: Literal["ent", "th"] = "ent"
    gibbs: Optional[GibbsIn] = None
    grid: tuple[float, float, int] = (0.55, 0.95, 9)  # binary q = [w, 1-w]


class ResonanceRow(BaseModel):
    w: float
    nu: Optional[float]
    gap: Optional[float]


class ResonanceScanResponse(BaseModel):
    rows: list[ResonanceRow]


class TailScanRequest(BaseModel):
    dist: DistributionIn
    n: int = Field(ge=1)
    kind: Literal["magnitude", "rank"] = "magnitude"
    x_grid: tuple[float, float, int] = (-1.0, 1.0, 5)
    seq: SequenceIn = SequenceIn()
    cap_classes: int = 10_000_000


class TailRow(BaseModel):
    n: int
    x: float
    sum: float
    exponent_estimate: Optional[float]
    predicted_exponent: Optional[float]


class TailScanResponse(BaseModel):
    rows: list[TailRow]


class RayleighRequest(BaseModel):
    nu: float = Field(gt=0.0)
    mu_grid: tuple[float, float, int] = (-10.0, 10.0, 21)


class RayleighRow(BaseModel):
    mu: float
    Z: float
    alpha_cross: float
    method: str


class RayleighResponse(BaseModel):
    rows: list[RayleighRow]


class ConvergenceRequest(BaseModel):
    p: DistributionIn
    q: DistributionIn
    f: Optional[DistributionIn] = None
    direction: Literal["ent", "th"] = "ent"
    regime: Literal["direct", "converse"] = "direct"
    seq: SequenceIn = SequenceIn()
    n_grid: list[int]
    gibbs: Optional[GibbsIn] = None
    cap_classes: int = 10_000_000


class ConvergenceRowOut(BaseModel):
    n: int
    epsilon: float
    exact_rate: float
    expanded_rate: float
    residual: float
    m_star: int


class ConvergenceResponse(BaseModel):
    rows: list[ConvergenceRowOut]


class ErrorBody(BaseModel):
    error: str
    message: str
