"""FastAPI application exposing the simulator and solvers."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException, Query

from .. import __version__
from . import handlers
from .schemas import (
    PresetSummary,
    SimulateRequest,
    SimulateResponse,
    SolveRequest,
    SolveResponse,
    ValidateSpoRequest,
    ValidateSpoResponse,
)


def create_app() -> FastAPI:
    app = FastAPI(
        title="cachebandit",
        version=__version__,
        description="Cache placement simulation and knapsack solving as a service.",
    )

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/solve", response_model=SolveResponse)
    def solve(req: SolveRequest):
        try:
            return handlers.solve(req)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate(req: SimulateRequest):
        try:
            return handlers.simulate(req)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.post("/spo/validate", response_model=ValidateSpoResponse)
    def validate_spo(req: ValidateSpoRequest):
        return handlers.validate_spo(req)

    @app.get("/presets", response_model=list[PresetSummary])
    def presets():
        return handlers.list_presets()

    @app.get("/presets/{name}")
    def preset_detail(
        name: str,
        scale: float = Query(1.0, gt=0.0),
        seed: int | None = Query(None),
    ):
        try:
            return handlers.preset_config(name, scale=scale, seed=seed).model_dump(mode="json")
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown preset {name!r}")

    return app
