"""FastAPI wiring around the service handlers.

Domain errors (parse failures, degenerate geometry, exhausted retries)
map to 422 with a typed body; anything else is a plain 500.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import CableDegError
from . import handlers, models


def create_app() -> FastAPI:
    app = FastAPI(
        title="cabledeg",
        version=__version__,
        description=(
            "Degree-weighted volumes of surface complements: cable-word "
            "reduction, per-point indices, voxel region decomposition, and "
            "null-homotopy lower-bound checks."
        ),
    )

    @app.exception_handler(CableDegError)
    async def domain_error(request: Request, exc: CableDegError) -> JSONResponse:
        body = models.ErrorBody(error=type(exc).__name__, message=str(exc))
        return JSONResponse(status_code=422, content=body.model_dump())

    @app.exception_handler(ValueError)
    async def value_error(request: Request, exc: ValueError) -> JSONResponse:
        body = models.ErrorBody(error="ValueError", message=str(exc))
        return JSONResponse(status_code=422, content=body.model_dump())

    @app.get("/health", response_model=models.HealthResponse)
    def health() -> models.HealthResponse:
        return models.HealthResponse(status="ok", version=__version__)

    @app.post("/reduce", response_model=models.ReduceResponse)
    def reduce(req: models.ReduceRequest) -> models.ReduceResponse:
        return handlers.reduce(req)

    @app.post("/regions", response_model=models.RegionsResponse)
    def regions(req: models.RegionsRequest) -> models.RegionsResponse:
        return handlers.regions(req)

    @app.post("/vdeg", response_model=models.VdegResponse)
    def vdeg(req: models.VdegRequest) -> models.VdegResponse:
        return handlers.vdeg(req)

    @app.post("/index", response_model=models.IndexResponse)
    def index(req: models.IndexRequest) -> models.IndexResponse:
        return handlers.index(req)

    @app.post("/sweep", response_model=models.SweepResponse)
    def sweep(req: models.SweepRequest) -> models.SweepResponse:
        return handlers.sweep(req)

    @app.post("/planar", response_model=models.PlanarResponse)
    def planar(req: models.PlanarRequest) -> models.PlanarResponse:
        return handlers.planar(req)

    return app


app = create_app()
