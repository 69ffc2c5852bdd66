"""Request/response envelopes for the HTTP service.

Matrix payloads are carried in the library's JSON matrix encoding (nested
lists, complex entries as [re, im] pairs) and validated by the numeric
decoders, not here; pydantic enforces the envelope shape only.
"""

from typing import Any, List, Optional

from pydantic import BaseModel, Field


class OmegaGrid(BaseModel):
    """Logarithmic frequency grid, or an explicit list of frequencies."""

    num: int = Field(default=200, ge=1)
    lo: float = Field(default=1e-2, gt=0)
    hi: float = Field(default=1e3, gt=0)
    omegas: Optional[List[float]] = None


class FeedbackSpec(BaseModel):
    kind: str = Field(default="none", pattern="^(none|neg_output|gain)$")
    gain: float = 1.0
    K: Optional[Any] = None


class CertifyRequest(BaseModel):
    spec: Any
    samples: int = Field(default=7, ge=2)
    tol_scale: Optional[float] = Field(default=None, gt=0)


class DiscretizeRequest(BaseModel):
    spec: Any
    N: int = Field(ge=2)
    restore: bool = True
    tol_scale: Optional[float] = Field(default=None, gt=0)


class LqRequest(BaseModel):
    system: Any
    method: str = Field(default="care", pattern="^(care|newton|hamiltonian|explicit|both)$")
    tol_scale: Optional[float] = Field(default=None, gt=0)


class PopovRequest(BaseModel):
    system: Any
    omega: OmegaGrid = Field(default_factory=OmegaGrid)
    tol_scale: Optional[float] = Field(default=None, gt=0)


class SimulateRequest(BaseModel):
    system: Any
    T: Optional[float] = Field(default=None, gt=0)
    dt: Optional[float] = Field(default=None, gt=0)
    x0: Optional[Any] = None
    seed: Optional[int] = None
    feedback: FeedbackSpec = Field(default_factory=FeedbackSpec)
    mode: Optional[str] = Field(default=None, pattern="^(impedance|scattering)$")
    eps_strict: float = Field(default=0.0, ge=0)
    tol_scale: Optional[float] = Field(default=None, gt=0)


class BeamRequest(BaseModel):
    eps: float = Field(default=0.0, ge=0)
    N: int = Field(default=40, ge=4)
    T: Optional[float] = Field(default=None, gt=0)
    dt: Optional[float] = Field(default=None, gt=0)
    x0_kind: str = Field(default="smooth", pattern="^(smooth|cubic)$")
    tol_scale: Optional[float] = Field(default=None, gt=0)


class ErrorInfo(BaseModel):
    kind: str
    message: str


class BaseResponse(BaseModel):
    command: str
    passed: bool
    tol_scale: float
    error: Optional[ErrorInfo] = None


class CertifyResponse(BaseResponse):
    validation: Any = None
    certificate: Any = None


class DiscretizeResponse(BaseResponse):
    system: Any = None
    continuous_certificate: Any = None
    discrete_certificate: Any = None
    flags_match: Optional[bool] = None
    restored: bool = False


class LqResponse(BaseResponse):
    certificate: Any = None
    solutions: Any = None
    residual_table: Any = None
    agreement: Optional[float] = None


class PopovResponse(BaseResponse):
    certificate: Any = None
    series: Any = None
    skipped: Any = None
    max_factor_residual: Optional[float] = None
    skew_defect_max: Optional[float] = None
    factorization_applicable: bool = False


class SimulateResponse(BaseResponse):
    series: Any = None
    balance: Any = None
    cost: Optional[float] = None
    certificate: Any = None
    mode: Optional[str] = None
    seed: Optional[int] = None
    meta: Any = None


class BeamResponse(BaseResponse):
    report: Any = None
    series: Any = None


class HealthResponse(BaseModel):
    status: str
    version: str
