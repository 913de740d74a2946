"""
Validated run parameters for the command line.

Values come from config/settings.yaml and are overridden by flags; pydantic
rejects anything a module would refuse before any work starts.
"""

from typing import Any, Dict, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.encoding.models import ThresholdParams


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    bank: Optional[str] = None
    input: Optional[str] = None
    output: Optional[str] = None

    C: float = Field(0.01, gt=0)
    M: float = Field(2.0, gt=0)
    delta: float = Field(0.02, gt=0, description="refractory period in seconds")

    window: int = Field(200, ge=1)
    batch: bool = False
    allow_large_window: bool = False
    max_window: int = Field(2048, ge=1)
    window_hard_cap: int = Field(15000, ge=1)

    store_measured: bool = False
    seed: int = Field(0, ge=0)
    trace: Optional[str] = None

    @model_validator(mode="after")
    def _check_window(self) -> "RunConfig":
        if self.window > self.window_hard_cap:
            raise ValueError(f"window {self.window} exceeds the hard cap of {self.window_hard_cap}")
        if self.window > self.max_window and not self.allow_large_window:
            raise ValueError(f"window {self.window} exceeds {self.max_window}; pass --allow-large-window")
        return self

    @property
    def params(self) -> ThresholdParams:
        return ThresholdParams(C=self.C, M=self.M, delta=self.delta)

    @classmethod
    def from_sources(cls, config: Dict[str, Any], **overrides: Any) -> "RunConfig":
        """Defaults from the `encoder`/`decoder` config sections, then non-None overrides."""
        encoder = config.get("encoder", {})
        decoder = config.get("decoder", {})
        values: Dict[str, Any] = {
            "C": encoder.get("C", 0.01),
            "M": encoder.get("M", 2.0),
            "delta": encoder.get("delta", 0.02),
            "store_measured": encoder.get("store_measured", False),
            "window": decoder.get("window", 200),
            "max_window": decoder.get("max_window", 2048),
            "window_hard_cap": decoder.get("window_hard_cap", 15000),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)
