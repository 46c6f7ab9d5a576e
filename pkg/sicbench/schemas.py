"""
sicbench file schemas

Pydantic models for every input file format: state files, experiment
configurations and circuit descriptions. Unknown keys are rejected.
"""

from typing import Any, Dict, List, Literal, Optional, Tuple, Type, TypeVar

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from config.config import MLE_MAX_ITER, MLE_TOL
from .exceptions import ConfigError

ModelT = TypeVar("ModelT", bound=BaseModel)

Pair = Tuple[float, float]


class StateFileModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dim: int
    kind: Literal["pure", "mixed"]
    amplitudes: Optional[List[Pair]] = None
    rows: Optional[List[List[Pair]]] = None

    @field_validator("dim")
    @classmethod
    def supported_dimension(cls, value: int) -> int:
        if value not in (2, 4, 8, 16):
            raise ValueError("dim must be one of 2, 4, 8, 16")
        return value

    @model_validator(mode="after")
    def payload_matches_kind(self) -> "StateFileModel":
        if self.kind == "pure" and self.amplitudes is None:
            raise ValueError("a pure state needs 'amplitudes'")
        if self.kind == "mixed" and self.rows is None:
            raise ValueError("a mixed state needs 'rows'")
        return self


class StateSourceModel(BaseModel):
    """Where an experiment's true state comes from"""
    model_config = ConfigDict(extra="forbid")

    source: Literal["file", "random-pure", "random-mixed"]
    path: Optional[str] = None
    dim: Literal[2, 4] = 4

    @model_validator(mode="after")
    def file_needs_path(self) -> "StateSourceModel":
        if self.source == "file" and not self.path:
            raise ValueError("source 'file' needs 'path'")
        return self


class MleOptionsModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    max_iter: int = Field(MLE_MAX_ITER, gt=0)
    tol: float = Field(MLE_TOL, gt=0)


class ExperimentConfigModel(BaseModel):
    """Experiment configuration file"""
    model_config = ConfigDict(extra="forbid")

    state: StateSourceModel
    scheme: Literal["direct", "two-step", "optical"] = "direct"
    shots: int = Field(..., ge=0)
    seed: int = Field(..., ge=0)
    methods: List[Literal["linear", "linear-projected", "mle"]] = Field(
        default_factory=lambda: ["linear-projected"], min_length=1)
    mle: MleOptionsModel = Field(default_factory=MleOptionsModel)
    record_timing: bool = False


class ElementModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["BS", "PPBS", "HWP", "PS", "CZ"]
    modes: List[str] = Field(..., min_length=1)
    r: Optional[float] = Field(None, ge=0, le=1)
    r_v: Optional[float] = Field(None, ge=0, le=1)
    r_h: Optional[float] = Field(None, ge=0, le=1)
    angle: Optional[float] = None
    phase: Optional[float] = None
    polarization: Optional[Literal["v", "h"]] = None
    name: Optional[str] = None


class CircuitFileModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = ""
    encoding: Literal["path-polarization", "path", "polarization"] = "path-polarization"
    modes: List[str] = Field(..., min_length=1)
    inputs: List[str] = Field(..., min_length=1)
    elements: List[ElementModel] = Field(default_factory=list)
    ports: Dict[str, List[str]] = Field(default_factory=dict)
    detectors: Dict[str, str] = Field(default_factory=dict)


def parse_model(model: Type[ModelT], data: Any, what: str) -> ModelT:
    """
    Validate ``data`` against ``model``

    Raises:
        ConfigError: listing "location: message" for every failing field
    """
    try:
        return model.model_validate(data)
    except ValidationError as e:
        errors = []
        for error in e.errors():
            location = ".".join(str(part) for part in error.get("loc", ())) or "<root>"
            errors.append(f"{location}: {error.get('msg')}")
        raise ConfigError(f"invalid {what}", errors)
