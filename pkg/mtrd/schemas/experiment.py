from typing import List, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from mtrd.core.config import settings


def _nonnegative(rates: List[float]) -> List[float]:
    if any(r < 0 for r in rates):
        raise ValueError("rates must be nonnegative")
    return rates


class SlackBase(BaseModel):
    gamma1: float = Field(default_factory=lambda: settings.gamma1, gt=0)
    gamma2: float = Field(default_factory=lambda: settings.gamma2, gt=0)
    gamma3: float = Field(default_factory=lambda: settings.gamma3, gt=0)
    gamma4: float = Field(default_factory=lambda: settings.gamma4, gt=0)
    enforce_slack_relation: bool = True


class CodecConfig(SlackBase):
    n: int = Field(..., ge=1)
    rates: List[float]
    trials: int = Field(1, ge=1)
    seed: int = 0
    threads: int = Field(default_factory=lambda: settings.threads, ge=1)

    @field_validator("rates")
    @classmethod
    def rates_nonnegative(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValueError("rates must be a nonempty list")
        return _nonnegative(v)


class ExperimentConfig(SlackBase):
    """Experiment file read by `mtrd simulate --config`."""

    model: str
    aux: Optional[str] = None
    distortion: str = "hamming"
    D: List[float] = Field(default_factory=list)
    rates: List[float] = Field(default_factory=list)
    n_grid: List[int] = Field(..., min_length=1)
    trials: int = Field(1000, ge=1)
    seed: int = 0
    threads: int = Field(default_factory=lambda: settings.threads, ge=1)

    @field_validator("rates")
    @classmethod
    def rates_nonnegative(cls, v: List[float]) -> List[float]:
        return _nonnegative(v)

    @model_validator(mode="after")
    def grid_positive(self) -> "ExperimentConfig":
        if any(n < 1 for n in self.n_grid):
            raise ValueError("n_grid entries must be >= 1")
        return self

    def codec_config(self, n: int, rates: Optional[List[float]] = None) -> CodecConfig:
        return CodecConfig(
            n=n,
            rates=self.rates if rates is None else rates,
            trials=self.trials,
            seed=self.seed,
            threads=self.threads,
            gamma1=self.gamma1,
            gamma2=self.gamma2,
            gamma3=self.gamma3,
            gamma4=self.gamma4,
            enforce_slack_relation=self.enforce_slack_relation,
        )


class ErrorStats(BaseModel):
    n: int
    trials: int
    errors: int
    p_error: float
    ci_low: float
    ci_high: float
    ci_halfwidth: float
    decode_failures: int
    decode_zero: int
    decode_multiple: int
    quantizer_failures: int
    typicality_failures: int
    t1_violations: int
    mean_distortion: List[float]
    max_distortion: List[float]
