"""HTTP face of the toolkit: one POST route per command, pydantic-typed.

Domain failures come back as 200 responses with passed=false and a typed
error record; malformed payloads map to 400 (schema decoding) or 422
(envelope validation by FastAPI).
"""

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..jsonio import SchemaError
from . import handlers
from .schemas import (
    BeamRequest,
    BeamResponse,
    CertifyRequest,
    CertifyResponse,
    DiscretizeRequest,
    DiscretizeResponse,
    HealthResponse,
    LqRequest,
    LqResponse,
    PopovRequest,
    PopovResponse,
    SimulateRequest,
    SimulateResponse,
)


def create_app():
    app = FastAPI(
        title="passilq",
        version=__version__,
        description=(
            "Passivity certification, structure-preserving discretization, "
            "LQ Riccati solutions, Popov factorization checks, and "
            "energy-exact simulation for boundary-controlled port-Hamiltonian models."
        ),
    )

    @app.exception_handler(SchemaError)
    async def schema_error_handler(request: Request, exc: SchemaError):
        return JSONResponse(
            status_code=400,
            content={"detail": {"kind": "SchemaError", "message": str(exc)}},
        )

    @app.get("/health", response_model=HealthResponse)
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/certify", response_model=CertifyResponse)
    def certify(req: CertifyRequest):
        return handlers.handle_certify(req.model_dump())

    @app.post("/discretize", response_model=DiscretizeResponse)
    def discretize(req: DiscretizeRequest):
        return handlers.handle_discretize(req.model_dump())

    @app.post("/lq", response_model=LqResponse)
    def lq(req: LqRequest):
        return handlers.handle_lq(req.model_dump())

    @app.post("/popov", response_model=PopovResponse)
    def popov(req: PopovRequest):
        return handlers.handle_popov(req.model_dump())

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate(req: SimulateRequest):
        return handlers.handle_simulate(req.model_dump())

    @app.post("/beam", response_model=BeamResponse)
    def beam(req: BeamRequest):
        return handlers.handle_beam(req.model_dump())

    return app


app = create_app()
