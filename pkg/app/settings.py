"""Runtime configuration, read from ``ECUNRAM_*`` environment variables."""

from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from .arith import RootChoice


class Settings(BaseSettings):
    """Knobs shared by the CLI, the scan workers and the HTTP service."""

    model_config = SettingsConfigDict(env_prefix="ECUNRAM_", frozen=True)

    # Formal logarithm: starting truncation order, hard cap, and the extra
    # p-adic digits carried when embedding Q(sqrt(-d)) into Q_p.
    series_order: int = Field(default=20, ge=2)
    series_cap: int = Field(default=2**14, ge=2)
    padic_margin: int = Field(default=5, ge=0)

    # Irreducibility witness search bound and point-count bound for scans.
    ell_max: int = Field(default=500, ge=5)
    count_bound: int = Field(default=10**5, ge=5)

    root_choice: RootChoice = "small"
    workers: int = Field(default=1, ge=1)
    strict: bool = False
    log_level: str = "INFO"

    def with_overrides(self, **overrides: object) -> "Settings":
        """Return a copy with every non-None override applied (CLI flags win over env)."""
        update = {key: value for key, value in overrides.items() if value is not None}
        if not update:
            return self
        return self.model_validate({**self.model_dump(), **update})


@lru_cache
def get_settings() -> Settings:
    """Process-wide settings instance."""
    return Settings()
