from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from custom_types import LogLevels


class LabSettings(BaseSettings):
    LOG_DIR: str = "logs"
    LOG_LEVEL: LogLevels = "INFO"
    LOG_TO_FILE: bool = True

    COUNT_BUDGET: int = Field(default=26, ge=1)
    PLAIN_COUNT_LIMIT: int = Field(default=20, ge=1, le=26)

    SCHEDULE_C: float = Field(default=0.2, gt=0)
    FP_TOLERANCE: float = Field(default=1e-7, gt=0)

    CUTNORM_EXACT_MAX_DIM: int = Field(default=20, ge=1)
    AB_EXHAUSTIVE_MAX_DIM: int = Field(default=16, ge=1)
    CUTNORM_SAMPLES: int = Field(default=4096, ge=1)
    LAMBDA_WEIGHT_SHIFT: int = Field(default=0, ge=0, le=1)
    Q0_THRESHOLD_SCALE: float = Field(default=1.0, gt=0)

    model_config = SettingsConfigDict(env_file=".env", extra="ignore")


settings = LabSettings()
