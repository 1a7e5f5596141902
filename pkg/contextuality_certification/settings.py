import os

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator

# Load environment variables from .env file
load_dotenv()

ENV_PREFIX = "PNC_"


class Settings(BaseModel):
    seed: int = Field(20240917, ge=0, lt=2**64)
    tol: float = Field(1e-6, gt=0.0)
    threshold_tol: float = Field(2e-4, gt=0.0)
    restarts: int = Field(32, ge=1)
    jm_precision: float = Field(1e-4, ge=1e-6, lt=1.0)
    log_level: str = "WARNING"

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        level = value.upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"unknown log level '{value}'")
        return level


def load_settings(environ=None) -> Settings:
    """Read PNC_* variables (after .env loading) into validated defaults."""
    environ = os.environ if environ is None else environ
    raw = {}
    for name in Settings.model_fields:
        key = ENV_PREFIX + name.upper()
        if key in environ:
            raw[name] = environ[key]
    try:
        return Settings(**raw)
    except ValidationError as exc:
        bad = ", ".join(ENV_PREFIX + str(err["loc"][0]).upper() for err in exc.errors())
        raise RuntimeError(f"Certification settings are not configured correctly ({bad}): {exc}") from exc
