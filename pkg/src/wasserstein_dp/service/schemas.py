"""Request and response models for the HTTP service.

Every endpoint answers with the same envelope: the command name, the fully
resolved configuration (defaults filled in), the results, and any warnings.
Numeric results always carry the order/framework they were computed at.
"""

from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, Field


class Envelope(BaseModel):
    command: str
    config: dict[str, Any]
    results: Any
    warnings: list[str] = Field(default_factory=list)


class MechanismRequest(BaseModel):
    kind: Literal["laplace", "gaussian"]
    scale: float = Field(gt=0)
    sensitivity: float = Field(default=1.0, ge=0)
    framework: Literal["wdp", "rdp", "dp"] = "wdp"
    mu: float = Field(default=1.0, ge=1)
    alpha: Optional[float] = Field(default=None, ge=1)
    sweep_order: Optional[str] = Field(
        default=None, description="lo:hi:step sweep over the order axis"
    )


class ConvertRequest(BaseModel):
    source: Literal["dp", "rdp", "wdp"]
    target: Literal["wdp", "rdp", "dp", "zcdp"]
    epsilon: float = Field(ge=0)
    sensitivity: float = Field(default=1.0, ge=0)
    mu: float = Field(default=1.0, ge=1)
    alpha: Optional[float] = None
    lipschitz: float = Field(default=1.0, gt=0)
    round_trip: bool = False


class ComposeRequest(BaseModel):
    mode: Literal["sequential", "parallel"]
    epsilons: list[float] = Field(min_length=1)
    mu: float | list[float] = Field(default=1.0)


class GroupPrivacyRequest(BaseModel):
    epsilon: float = Field(ge=0)
    mu: float = Field(default=1.0, ge=1)
    k: int = Field(ge=1)


class AdvancedDeltaRequest(BaseModel):
    losses: list[float]
    epsilon: float = Field(ge=0)
    beta: float = Field(default=1.0, gt=0)
    mu: float = Field(default=1.0, ge=1)


class StepLossRequest(BaseModel):
    q: float = Field(ge=0, le=1)
    sigma: float = Field(gt=0)
    mu: float = Field(default=1.0, ge=1)
    grad_dim: int = Field(default=1, ge=1)
    d: float = Field(default=0.0, ge=0)


class AccountantEpsilonRequest(BaseModel):
    losses: list[float] = Field(default_factory=list)
    beta: float = Field(default=1.0, gt=0)
    delta: float = Field(gt=0, lt=1)
    mu: float = Field(default=1.0, ge=1)


class AccountantDeltaRequest(BaseModel):
    losses: list[float] = Field(default_factory=list)
    beta: float = Field(default=1.0, gt=0)
    epsilon: float = Field(ge=0)
    mu: float = Field(default=1.0, ge=1)


class PairDistanceRequest(BaseModel):
    gradients: list[float] | list[list[float]]
    policy: str = "min"
    sample_pairs: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = None


class OtDistanceRequest(BaseModel):
    p: list[tuple[float, float]]
    q: list[tuple[float, float]]
    mu: float = Field(default=1.0, ge=1)


class OtDualRequest(BaseModel):
    p: list[tuple[float, float]]
    q: list[tuple[float, float]]


class OtSamplesRequest(BaseModel):
    x: list[float]
    y: list[float]
    mu: float = Field(default=1.0, ge=1)


class OtPushforwardRequest(BaseModel):
    p: list[tuple[float, float]]
    q: list[tuple[float, float]]
    map: str = "identity"
    mu: float = Field(default=1.0, ge=1)


class OtAuditRequest(BaseModel):
    kind: Literal["laplace", "gaussian"] = "gaussian"
    scale: float = Field(gt=0)
    sensitivity: float = Field(default=1.0, ge=0)
    mu: float = Field(default=1.0, ge=1)
    samples: int = Field(default=100_000, ge=2)
    seed: int = 0


class SimulateRequest(BaseModel):
    seed: int = 7
    steps: int = Field(default=50, ge=1)
    examples: int = Field(default=1000, ge=2)
    shape: float = Field(default=0.5, gt=0)
    sigma: float = Field(default=0.2, gt=0)
    clip_quantile: Optional[float] = Field(default=None, gt=0, le=1)
    clip: bool = False
    q: float = Field(default=0.01, ge=0, le=1)
    mu: float = Field(default=1.0, ge=1)
    beta: float = Field(default=1.0, gt=0)
    delta: float = Field(default=1e-10, gt=0, lt=1)
    policy: str = "min"
    sample_pairs: Optional[int] = Field(default=None, ge=1)
