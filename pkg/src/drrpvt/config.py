"""Configuration settings for DRRPVT."""

from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables (prefix DRRPVT_)."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="DRRPVT_",
        extra="ignore",
    )

    # Solver tolerances
    FEASIBILITY_TOL: float = 1e-7
    INTEGRALITY_TOL: float = 1e-6
    GAP_TOL: float = 1e-6
    SOLUTION_TOL: float = 1e-6

    # MILP limits and backend selection
    MILP_TIME_LIMIT_S: float = 300.0
    MILP_NODE_LIMIT: int = 200_000
    SIMPLEX_MAX_ITERATIONS: int = 200_000
    MILP_BACKEND: str = "auto"
    NATIVE_MAX_VARS: int = 60
    NATIVE_TIME_LIMIT_S: float = 2.0

    # Lagrangian dual decomposition
    LDD_GAMMA0: float = 1.0
    LDD_GAMMA_DECAY: float = 50.0
    LDD_MAX_ITERATIONS: int = 500
    LDD_RELATIVE_DELTA: float = 0.01
    LDD_ABSOLUTE_DELTA: float = 1e-6
    LDD_PARALLEL_SLAVES: bool = False

    # Clustering
    CLUSTER_GROUP_SIZE: int = 5

    # Simulation
    PLANNING_WINDOW: int = 2
    AUCTION_USERS: int = 5
    AUCTION_COST_LOW: float = 0.5
    AUCTION_COST_HIGH: float = 1.2

    # Output
    LOG_LEVEL: str = "INFO"
    LOG_FILE: Optional[str] = None
    OUTPUT_DIR: str = "runs"

    @property
    def backend_choices(self) -> tuple[str, ...]:
        """Valid values for MILP_BACKEND."""
        return ("auto", "native", "highs")


# Global settings instance
settings = Settings()
