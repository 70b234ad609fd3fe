"""HTTP service exposing budgets, conversions, composition, the accountant,
the transport oracle, and the synthetic-gradient experiment.

All endpoints return the same envelope (command, config, results, warnings).
Validation failures surface as 422, numeric failures (series non-convergence,
overflow) as 500 with the module error verbatim in `detail`.
"""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..accountant import (
    AccountantConfig,
    AccountantState,
    delta_given_epsilon,
    epsilon_given_delta,
    estimate_pair_distance,
    mixture_variance,
    step_loss,
)
from ..composition import (
    BudgetSequence,
    advanced_delta,
    compose_parallel,
    compose_sequential,
    group_privacy,
    is_vacuous,
)
from ..conversions import (
    LipschitzAssumption,
    dp_round_trip,
    dp_to_wdp,
    rdp_to_wdp,
    wdp_to_dp,
    wdp_to_rdp,
    wdp_to_zcdp,
)
from ..empirical_ot import (
    DiscreteDist,
    kantorovich_dual_1d,
    mechanism_audit,
    named_map,
    pushforward_check,
    wasserstein_1d_samples,
    wasserstein_discrete,
)
from ..mechanisms import (
    MechanismSpec,
    RdpBudget,
    WdpBudget,
    attack_success_probability,
    dp_gaussian,
    dp_laplace,
    rdp_gaussian,
    rdp_laplace,
    wdp_gaussian,
    wdp_laplace,
)
from ..simulation import generate_trace, run_composition
from ..special_functions import ConvergenceError
from . import schemas

ORDERING_NOTE = (
    "accountant ordering depends on the subsampling rate and pair policy; "
    "reported for information, not a guarantee"
)
LIPSCHITZ_NOTE = "Lipschitz constant defaulted to 1.0; supply `lipschitz` if known"


def _safe(x: float):
    """JSON-safe float: infinities become 'unbounded', NaN becomes null."""
    if isinstance(x, float):
        if math.isinf(x):
            return "unbounded"
        if math.isnan(x):
            return None
    return x


def _envelope(command: str, config, results, warnings=()) -> schemas.Envelope:
    return schemas.Envelope(
        command=command, config=config, results=results, warnings=list(warnings)
    )


def _parse_sweep(spec: str) -> list[float]:
    try:
        lo, hi, step = (float(part) for part in spec.split(":"))
    except ValueError as exc:
        raise ValueError(f"sweep must be lo:hi:step, got {spec!r}") from exc
    if step <= 0 or hi < lo:
        raise ValueError(f"sweep must satisfy lo <= hi and step > 0, got {spec!r}")
    orders = []
    k = 0
    while True:
        order = lo + k * step
        if order > hi + 1e-12:
            break
        orders.append(order)
        k += 1
    return orders


def _mechanism_budget(req: schemas.MechanismRequest, order: float, warnings: list[str]):
    spec = MechanismSpec(kind=req.kind, scale=req.scale, sensitivity=req.sensitivity)
    if req.framework == "wdp":
        fn = wdp_laplace if req.kind == "laplace" else wdp_gaussian
        budget = fn(spec, order)
        return {"framework": "wdp", "kind": req.kind, "mu": order, "epsilon": budget.epsilon}
    if req.framework == "rdp":
        if req.sensitivity != 1.0 and "unit sensitivity" not in " ".join(warnings):
            warnings.append(
                "rdp/dp closed-form budgets assume unit sensitivity; `sensitivity` ignored"
            )
        fn = rdp_laplace if req.kind == "laplace" else rdp_gaussian
        budget = fn(req.scale, order)
        return {"framework": "rdp", "kind": req.kind, "alpha": order, "epsilon": budget.epsilon}
    # dp
    if req.sensitivity != 1.0 and "unit sensitivity" not in " ".join(warnings):
        warnings.append(
            "rdp/dp closed-form budgets assume unit sensitivity; `sensitivity` ignored"
        )
    budget = dp_laplace(req.scale) if req.kind == "laplace" else dp_gaussian()
    if math.isinf(budget.epsilon) and "unbounded" not in " ".join(warnings):
        warnings.append("the Gaussian mechanism has no finite pure-DP budget")
    return {
        "framework": "dp",
        "kind": req.kind,
        "epsilon": _safe(budget.epsilon),
        "delta": budget.delta,
        "attack_success_probability": None
        if math.isinf(budget.epsilon)
        else attack_success_probability(budget.epsilon),
    }


def create_app() -> FastAPI:
    app = FastAPI(title="wasserstein-dp", version=__version__)

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(ConvergenceError)
    async def _convergence_error(request: Request, exc: ConvergenceError):
        return JSONResponse(status_code=500, content={"detail": str(exc)})

    @app.exception_handler(ArithmeticError)
    async def _arithmetic_error(request: Request, exc: ArithmeticError):
        return JSONResponse(status_code=500, content={"detail": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/mechanism", response_model=schemas.Envelope)
    def mechanism(req: schemas.MechanismRequest):
        warnings: list[str] = []
        if req.framework == "rdp" and req.alpha is None and req.sweep_order is None:
            raise ValueError("framework rdp requires `alpha`")
        if req.sweep_order is not None:
            rows = [
                _mechanism_budget(req, order, warnings)
                for order in _parse_sweep(req.sweep_order)
            ]
            results = {"rows": rows}
        else:
            order = req.alpha if req.framework == "rdp" else req.mu
            results = _mechanism_budget(req, order, warnings)
            if req.framework == "wdp":
                results["attack_success_probability"] = attack_success_probability(
                    results["epsilon"]
                )
        return _envelope("mechanism", req.model_dump(), results, warnings)

    @app.post("/convert", response_model=schemas.Envelope)
    def convert(req: schemas.ConvertRequest):
        warnings: list[str] = []
        lip = LipschitzAssumption(req.lipschitz)
        uses_lipschitz = req.source == "wdp" or req.round_trip

        if req.round_trip:
            if req.source != "dp":
                raise ValueError("round_trip is a dp -> wdp -> dp diagnostic")
            report = dp_round_trip(req.epsilon, req.sensitivity, req.mu, lip)
            results = {
                "mu": req.mu,
                "epsilon_in": report.epsilon_in,
                "epsilon_wdp": report.epsilon_wdp,
                "epsilon_out": report.epsilon_out,
                "inflation": _safe(report.inflation),
            }
            warnings.append("conversions are bounds, not inverses; inflation expected")
        elif (req.source, req.target) == ("dp", "wdp"):
            budget = dp_to_wdp(req.epsilon, req.sensitivity, req.mu)
            results = {"framework": "wdp", "mu": budget.mu, "epsilon": budget.epsilon}
        elif (req.source, req.target) == ("rdp", "wdp"):
            if req.alpha is None:
                raise ValueError("source rdp requires `alpha`")
            budget = rdp_to_wdp(
                RdpBudget(alpha=req.alpha, epsilon=req.epsilon), req.sensitivity, req.mu
            )
            results = {"framework": "wdp", "mu": budget.mu, "epsilon": budget.epsilon}
        elif (req.source, req.target) == ("wdp", "rdp"):
            if req.alpha is None:
                raise ValueError("target rdp requires `alpha`")
            budget = wdp_to_rdp(WdpBudget(mu=req.mu, epsilon=req.epsilon), lip, req.alpha)
            results = {"framework": "rdp", "alpha": budget.alpha, "epsilon": budget.epsilon}
        elif (req.source, req.target) == ("wdp", "dp"):
            budget = wdp_to_dp(WdpBudget(mu=req.mu, epsilon=req.epsilon), lip)
            results = {"framework": "dp", "epsilon": budget.epsilon, "delta": budget.delta}
        elif (req.source, req.target) == ("wdp", "zcdp"):
            rho = wdp_to_zcdp(WdpBudget(mu=req.mu, epsilon=req.epsilon), lip)
            results = {"framework": "zcdp", "rho": rho}
        else:
            raise ValueError(f"unsupported conversion {req.source} -> {req.target}")

        if uses_lipschitz and "lipschitz" not in req.model_fields_set:
            warnings.append(LIPSCHITZ_NOTE)
        return _envelope("convert", req.model_dump(), results, warnings)

    @app.post("/compose", response_model=schemas.Envelope)
    def compose(req: schemas.ComposeRequest):
        if isinstance(req.mu, list):
            if len(req.mu) != len(req.epsilons):
                raise ValueError("mu list must match epsilons in length")
            budgets = [WdpBudget(mu=m, epsilon=e) for m, e in zip(req.mu, req.epsilons)]
        else:
            budgets = [WdpBudget(mu=req.mu, epsilon=e) for e in req.epsilons]
        seq = BudgetSequence.harmonized(budgets)
        out = compose_sequential(seq) if req.mode == "sequential" else compose_parallel(seq)
        results = {"mode": req.mode, "mu": out.mu, "epsilon": out.epsilon}
        return _envelope("compose", req.model_dump(), results)

    @app.post("/compose/group", response_model=schemas.Envelope)
    def compose_group(req: schemas.GroupPrivacyRequest):
        out = group_privacy(WdpBudget(mu=req.mu, epsilon=req.epsilon), req.k)
        results = {"mu": out.mu, "epsilon": out.epsilon, "k": req.k}
        return _envelope("compose-group", req.model_dump(), results)

    @app.post("/compose/advanced-delta", response_model=schemas.Envelope)
    def compose_advanced_delta(req: schemas.AdvancedDeltaRequest):
        delta = advanced_delta(req.losses, req.epsilon, req.beta)
        warnings = ["guarantee is vacuous at this epsilon (delta >= 1)"] if is_vacuous(delta) else []
        results = {
            "mu": req.mu,
            "delta": delta,
            "vacuous": is_vacuous(delta),
            "total_expected_loss": math.fsum(req.losses),
        }
        return _envelope("compose-advanced-delta", req.model_dump(), results, warnings)

    @app.post("/accountant/step-loss", response_model=schemas.Envelope)
    def accountant_step_loss(req: schemas.StepLossRequest):
        cfg = AccountantConfig(q=req.q, sigma=req.sigma, mu=req.mu, grad_dim=req.grad_dim)
        loss = step_loss(cfg, req.d)
        results = {
            "mu": req.mu,
            "loss": loss,
            "mean": req.q * req.d,
            "variance": mixture_variance(req.q, req.sigma),
        }
        return _envelope("accountant-step-loss", req.model_dump(), results)

    @app.post("/accountant/epsilon", response_model=schemas.Envelope)
    def accountant_epsilon(req: schemas.AccountantEpsilonRequest):
        if any(x < 0 for x in req.losses):
            raise ValueError("losses must be >= 0")
        state = AccountantState(losses=tuple(req.losses))
        cfg = AccountantConfig(q=0.0, sigma=1.0, mu=req.mu, beta=req.beta, delta=req.delta)
        budget = epsilon_given_delta(state, cfg)
        results = {
            "mu": budget.mu,
            "epsilon": budget.epsilon,
            "beta": req.beta,
            "delta": req.delta,
            "total_loss": state.total_loss,
            "steps": state.steps,
        }
        return _envelope("accountant-epsilon", req.model_dump(), results)

    @app.post("/accountant/delta", response_model=schemas.Envelope)
    def accountant_delta(req: schemas.AccountantDeltaRequest):
        if any(x < 0 for x in req.losses):
            raise ValueError("losses must be >= 0")
        state = AccountantState(losses=tuple(req.losses))
        cfg = AccountantConfig(q=0.0, sigma=1.0, mu=req.mu, beta=req.beta)
        delta = delta_given_epsilon(state, cfg, req.epsilon)
        warnings = ["guarantee is vacuous at this epsilon (delta >= 1)"] if is_vacuous(delta) else []
        results = {
            "mu": req.mu,
            "delta": delta,
            "vacuous": is_vacuous(delta),
            "beta": req.beta,
            "total_loss": state.total_loss,
            "steps": state.steps,
        }
        return _envelope("accountant-delta", req.model_dump(), results, warnings)

    @app.post("/accountant/pair-distance", response_model=schemas.Envelope)
    def accountant_pair_distance(req: schemas.PairDistanceRequest):
        est = estimate_pair_distance(
            req.gradients,
            policy=req.policy,
            sample_pairs=req.sample_pairs,
            rng=np.random.default_rng(req.seed),
        )
        results = {
            "d": est.d,
            "pairs_examined": est.pairs_examined,
            "policy": req.policy,
        }
        return _envelope("accountant-pair-distance", req.model_dump(), results)

    @app.post("/ot/distance", response_model=schemas.Envelope)
    def ot_distance(req: schemas.OtDistanceRequest):
        dist = wasserstein_discrete(
            DiscreteDist.from_pairs(req.p), DiscreteDist.from_pairs(req.q), req.mu
        )
        results = {"mu": req.mu, "distance": dist}
        return _envelope("ot-distance", req.model_dump(), results)

    @app.post("/ot/dual", response_model=schemas.Envelope)
    def ot_dual(req: schemas.OtDualRequest):
        value = kantorovich_dual_1d(
            DiscreteDist.from_pairs(req.p), DiscreteDist.from_pairs(req.q)
        )
        results = {"mu": 1.0, "distance": value}
        return _envelope("ot-dual", req.model_dump(), results)

    @app.post("/ot/samples", response_model=schemas.Envelope)
    def ot_samples(req: schemas.OtSamplesRequest):
        dist = wasserstein_1d_samples(req.x, req.y, req.mu)
        results = {"mu": req.mu, "distance": dist, "n": len(req.x)}
        return _envelope("ot-samples", req.model_dump(), results)

    @app.post("/ot/pushforward", response_model=schemas.Envelope)
    def ot_pushforward(req: schemas.OtPushforwardRequest):
        report = pushforward_check(
            DiscreteDist.from_pairs(req.p),
            DiscreteDist.from_pairs(req.q),
            named_map(req.map),
            req.mu,
        )
        warnings = [] if report.non_expansive else [
            f"map {req.map!r} expanded the distance; it is not 1-Lipschitz on this support"
        ]
        results = {
            "mu": req.mu,
            "map": req.map,
            "before": report.before,
            "after": report.after,
            "non_expansive": report.non_expansive,
        }
        return _envelope("ot-pushforward", req.model_dump(), results, warnings)

    @app.post("/ot/audit", response_model=schemas.Envelope)
    def ot_audit(req: schemas.OtAuditRequest):
        audit = mechanism_audit(
            kind=req.kind,
            scale=req.scale,
            sensitivity=req.sensitivity,
            mu=req.mu,
            n_samples=req.samples,
            seed=req.seed,
        )
        warnings = []
        if not audit.budget_covers_empirical:
            warnings.append(
                "closed-form budget is below the measured distance; for location "
                "families the exact distance equals the sensitivity"
            )
        results = {
            "mu": req.mu,
            "kind": req.kind,
            "empirical_distance": audit.empirical_distance,
            "closed_form_budget": audit.closed_form_budget,
            "sensitivity": audit.sensitivity,
            "budget_covers_empirical": audit.budget_covers_empirical,
        }
        return _envelope("ot-audit", req.model_dump(), results, warnings)

    @app.post("/simulate", response_model=schemas.Envelope)
    def simulate(req: schemas.SimulateRequest):
        trace = generate_trace(
            seed=req.seed,
            n_steps=req.steps,
            n_per_step=req.examples,
            shape=req.shape,
            clip_quantile=req.clip_quantile,
        )
        cfg = AccountantConfig(
            q=req.q, sigma=req.sigma, mu=req.mu, beta=req.beta, delta=req.delta
        )
        curve = run_composition(
            trace, cfg, clip=req.clip, policy=req.policy, sample_pairs=req.sample_pairs
        )
        rows = [
            {"step": s, "epsilon_wdp": ew, "epsilon_rdp_baseline": er}
            for s, ew, er in curve.rows()
        ]
        results = {"rows": rows, "metadata": curve.metadata}
        return _envelope("simulate", req.model_dump(), results, [ORDERING_NOTE])

    return app


app = create_app()
