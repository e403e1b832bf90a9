"""FastAPI service wrapping the experiment suites.

The CLI is a thin client of these endpoints; anything it can do goes
through this surface.  Input problems (scenario syntax, bad metric,
degenerate polytope) come back as 400 with a structured ErrorInfo body.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from ..experiments import SUITES, default_scenario, run_suite
from ..expressions import ExpressionError
from ..metrics import MetricError
from ..polytope import PolytopeError
from ..scenario import (
    BUILTIN_SCENARIOS,
    ScenarioError,
    builtin_scenario,
    parse_scenario,
    scenario_objects,
    serialize_scenario,
)
from .models import (
    ErrorInfo,
    HealthInfo,
    ScenarioInfo,
    ScenarioRequest,
    SuiteRequest,
    SuiteResponse,
)

app = FastAPI(title="polylab", description="smoothed-polytope geometry suites", version=__version__)


def _pyify(obj):
    if isinstance(obj, dict):
        return {str(k): _pyify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_pyify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_pyify(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    return obj


def _input_error(exc) -> HTTPException:
    info = ErrorInfo(error=str(exc), kind=type(exc).__name__, line=getattr(exc, "line", None))
    return HTTPException(status_code=400, detail=info.model_dump())


def _resolve_scenario(req: SuiteRequest):
    if req.scenario is not None and req.builtin is not None:
        raise _input_error(ScenarioError("give either scenario text or a builtin name, not both"))
    try:
        if req.scenario is not None:
            sc = parse_scenario(req.scenario)
        elif req.builtin is not None:
            sc = builtin_scenario(req.builtin)
        else:
            sc = None
        return sc
    except (ScenarioError, ExpressionError, MetricError, PolytopeError) as exc:
        raise _input_error(exc) from None


@app.get("/health", response_model=HealthInfo)
def health() -> HealthInfo:
    return HealthInfo(status="ok", version=__version__, suites=list(SUITES))


@app.get("/scenarios")
def scenarios() -> dict:
    return {"builtin": sorted(BUILTIN_SCENARIOS)}


@app.post("/scenario/validate", response_model=ScenarioInfo)
def validate_scenario(req: ScenarioRequest) -> ScenarioInfo:
    try:
        sc = parse_scenario(req.scenario)
        p, m = scenario_objects(sc)
    except (ScenarioError, ExpressionError, MetricError, PolytopeError) as exc:
        raise _input_error(exc) from None
    return ScenarioInfo(
        ok=True,
        n=sc.n,
        faces=p.nfaces,
        metric_family=sc.metric_family,
        lambdas=list(sc.lambdas),
        resolution=sc.resolution,
        sigma=sc.sigma,
        tau=sc.tau,
        trials=sc.trials,
        seed=sc.seed,
        canonical=serialize_scenario(sc),
    )


@app.post("/suites/{name}", response_model=SuiteResponse)
def run(name: str, req: SuiteRequest) -> SuiteResponse:
    if name not in SUITES:
        raise HTTPException(status_code=404, detail={"error": f"unknown suite {name!r}", "kind": "NotFound"})
    sc = _resolve_scenario(req)
    if sc is None:
        sc = default_scenario(name)
    sc = sc.with_overrides(**req.overrides.model_dump())
    try:
        report = run_suite(name, sc)
    except (ScenarioError, ExpressionError, MetricError, PolytopeError) as exc:
        raise _input_error(exc) from None
    return SuiteResponse(
        suite=report.suite,
        passed=report.passed,
        exit_code=0 if report.passed else 1,
        elapsed=report.elapsed,
        assertions=[{"name": a.name, "passed": a.passed, "detail": a.detail} for a in report.assertions],
        files=report.files,
        summary=_pyify(report.summary),
    )
