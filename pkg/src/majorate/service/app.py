"""FastAPI service exposing the rate calculators.

Every endpoint is a pure computation: no state, no side effects, so results
are deterministic for identical payloads. Library errors map onto JSON
bodies carrying the exception class name; validation failures return 400
and cap overruns 413, which the CLI translates into exit codes 2 and 3.
"""
from __future__ import annotations

import math

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..distributions import embed, make_prob_vec, sharp
from ..entropic import (
    relative_entropy,
    relative_entropy_variance,
    shannon_entropy,
    entropy_variance,
)
from ..errors import CapExceeded, MajorateError, RankOutOfRange, ValidationFailure
from ..majorisation import (
    majorises,
    majorises_product,
    min_epsilon_post,
    min_epsilon_pre,
)
from ..moderate import (
    ModerateSequence,
    magnitude_tail_sum,
    power_rank_threshold_log,
    rank_tail_sum,
)
from ..rates import convergence_report, exact_optimal_rate, expand_rate, resonance_gap
from ..rayleigh import rayleigh_cdf
from . import schemas as S

DIRECTIONS = {"ent": "entanglement", "th": "thermodynamic"}
METRICS = {"tvd": "tvd", "fid": "infidelity"}


def _grid(spec: tuple[float, float, int]) -> list[float]:
    lo, hi, steps = spec
    if steps < 1:
        raise ValidationFailure("grid needs at least one step")
    if steps == 1:
        return [lo]
    return [lo + (hi - lo) * i / (steps - 1) for i in range(steps)]


def _ctx(direction: str, gibbs: S.GibbsIn | None):
    if direction == "entanglement":
        return None
    if gibbs is None:
        raise ValidationFailure("thermodynamic direction needs a gibbs payload")
    return gibbs.to_spec()


def create_app() -> FastAPI:
    app = FastAPI(title="majorate", version=__version__)

    @app.exception_handler(MajorateError)
    async def majorate_error(_: Request, exc: MajorateError):
        status = 413 if isinstance(exc, CapExceeded) else 400
        body = S.ErrorBody(error=type(exc).__name__, message=str(exc))
        return JSONResponse(status_code=status, content=body.model_dump())

    @app.get("/")
    def root():
        return {"service": "majorate", "version": __version__}

    @app.post("/entropy", response_model=S.EntropyResponse)
    def entropy(req: S.EntropyRequest):
        a = req.dist.to_prob_vec()
        out = S.EntropyResponse(H=shannon_entropy(a), V=entropy_variance(a))
        if req.gibbs is not None:
            gamma = req.gibbs.to_spec().gamma
            out.D_rel = relative_entropy(a, gamma)
            out.V_rel = relative_entropy_variance(a, gamma)
        return out

    def _total_pair(a, b, total: S.TotalStateForm):
        f = total.f.to_prob_vec() if total.f is not None else sharp()
        from ..distributions import total_states
        return total_states(a, b, f, total.n, total.m)

    @app.post("/check", response_model=S.CheckResponse)
    def check(req: S.CheckRequest):
        a, b = req.a.to_prob_vec(), req.b.to_prob_vec()
        if req.total is not None:
            A, B = _total_pair(a, b, req.total)
            return S.CheckResponse(majorises=majorises_product(A, B))
        return S.CheckResponse(majorises=majorises(a, b))

    @app.post("/epsilon", response_model=S.EpsilonResponse)
    def epsilon(req: S.EpsilonRequest):
        a, b = req.a.to_prob_vec(), req.b.to_prob_vec()
        if req.total is not None:
            if req.direction != "post" or req.metric != "tvd":
                raise ValidationFailure(
                    "total-state smoothing supports the post direction and TVD only")
            A, B = _total_pair(a, b, req.total)
            res = min_epsilon_post(A, B, "tvd")
            return S.EpsilonResponse(epsilon=res.epsilon, witness=None,
                                     direction="post", metric="tvd")
        fn = min_epsilon_post if req.direction == "post" else min_epsilon_pre
        res = fn(a, b, req.metric)
        return S.EpsilonResponse(epsilon=res.epsilon,
                                 witness=list(res.witness.entries),
                                 direction=req.direction, metric=req.metric)

    @app.post("/embed", response_model=S.EmbedResponse)
    def embed_endpoint(req: S.EmbedRequest):
        out = embed(req.dist.to_prob_vec(), req.gibbs.to_spec())
        return S.EmbedResponse(embedded=list(out.entries))

    @app.post("/rate/exact", response_model=S.RateExactResponse)
    def rate_exact(req: S.RateExactRequest):
        direction = DIRECTIONS[req.direction]
        ctx = _ctx(direction, req.gibbs)
        f = req.f.to_prob_vec() if req.f is not None else None
        point = exact_optimal_rate(req.p.to_prob_vec(), req.q.to_prob_vec(),
                                   f, req.n, req.eps, direction,
                                   METRICS[req.metric], ctx,
                                   class_cap=req.cap_classes)
        return S.RateExactResponse(n=point.n, epsilon=point.epsilon,
                                   m_star=point.m_star,
                                   rate=point.rate_float,
                                   rate_exact=str(point.rate),
                                   metric=point.metric)

    @app.post("/rate/expand", response_model=S.RateExpandResponse)
    def rate_expand(req: S.RateExpandRequest):
        direction = DIRECTIONS[req.direction]
        ctx = _ctx(direction, req.gibbs)
        seq = ModerateSequence(req.seq.c, req.seq.alpha)
        expansion, value = expand_rate(req.p.to_prob_vec(), req.q.to_prob_vec(),
                                       ctx, direction, req.regime, seq, req.n)
        nu = None if math.isinf(expansion.nu) else expansion.nu
        return S.RateExpandResponse(R_inf=expansion.R_inf, nu=nu,
                                    coefficient=expansion.coefficient,
                                    regime=expansion.regime,
                                    direction=expansion.direction,
                                    t_n=seq.t(req.n), R_n=value)

    @app.post("/resonance-scan", response_model=S.ResonanceScanResponse)
    def resonance_scan(req: S.ResonanceScanRequest):
        direction = DIRECTIONS[req.direction]
        ctx = _ctx(direction, req.gibbs)
        p = req.p.to_prob_vec()
        rows = []
        for w in _grid(req.grid):
            if not 0.0 < w < 1.0:
                raise ValidationFailure(f"mixing weight {w} outside (0, 1)")
            q = make_prob_vec([w, 1.0 - w])
            try:
                nu, gap = resonance_gap(p, q, ctx, direction)
            except MajorateError:
                rows.append(S.ResonanceRow(w=w, nu=None, gap=None))
                continue
            rows.append(S.ResonanceRow(
                w=w,
                nu=None if math.isinf(nu) else nu,
                gap=None if math.isinf(gap) else gap))
        return S.ResonanceScanResponse(rows=rows)

    @app.post("/tail-scan", response_model=S.TailScanResponse)
    def tail_scan(req: S.TailScanRequest):
        a = req.dist.to_prob_vec()
        seq = ModerateSequence(req.seq.c, req.seq.alpha)
        rows = []
        for x in _grid(req.x_grid):
            log_thr = power_rank_threshold_log(a, x, req.n, seq)
            try:
                if req.kind == "magnitude":
                    rep = magnitude_tail_sum(
                        a, req.n, -log_thr, "above" if x <= 0 else "below",
                        seq=seq, x=x, class_cap=req.cap_classes)
                else:
                    rep = rank_tail_sum(
                        a, req.n, log_thr, "head" if x <= 0 else "tail",
                        seq=seq, x=x, class_cap=req.cap_classes)
            except RankOutOfRange:
                rows.append(S.TailRow(n=req.n, x=x, sum=0.0,
                                      exponent_estimate=None,
                                      predicted_exponent=None))
                continue
            est = rep.exponent_estimate
            pred = rep.predicted_exponent
            rows.append(S.TailRow(
                n=req.n, x=x, sum=rep.sum,
                exponent_estimate=None if est is None or math.isinf(est) else est,
                predicted_exponent=None if pred is None or math.isinf(pred) else pred))
        return S.TailScanResponse(rows=rows)

    @app.post("/rayleigh", response_model=S.RayleighResponse)
    def rayleigh(req: S.RayleighRequest):
        rows = []
        for mu in _grid(req.mu_grid):
            ev = rayleigh_cdf(req.nu, mu)
            rows.append(S.RayleighRow(mu=mu, Z=ev.Z, alpha_cross=ev.alpha_cross,
                                      method=ev.method))
        return S.RayleighResponse(rows=rows)

    @app.post("/convergence", response_model=S.ConvergenceResponse)
    def convergence(req: S.ConvergenceRequest):
        direction = DIRECTIONS[req.direction]
        ctx = _ctx(direction, req.gibbs)
        seq = ModerateSequence(req.seq.c, req.seq.alpha)
        f = req.f.to_prob_vec() if req.f is not None else None
        rows = convergence_report(req.p.to_prob_vec(), req.q.to_prob_vec(), f,
                                  direction, seq, req.n_grid, req.regime,
                                  ctx=ctx, class_cap=req.cap_classes)
        return S.ConvergenceResponse(rows=[
            S.ConvergenceRowOut(n=r.n, epsilon=r.epsilon,
                                exact_rate=r.exact_rate,
                                expanded_rate=r.expanded_rate,
                                residual=r.residual, m_star=r.m_star)
            for r in rows])

    return app


app = create_app()
