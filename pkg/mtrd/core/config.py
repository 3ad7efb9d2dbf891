from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # Logging
    log: str = "WARNING"
    log_format: str = "console"

    # Probability tables
    renormalize_tolerance: float = 1e-9

    # Information spectrum
    spectrum_atom_budget: int = 2_000_000
    spectrum_resolution: float = 1e-12
    default_epsilon: float = 0.01

    # Region search
    search_restarts: int = 200
    aux_extra_symbols: int = 2
    descent_tolerance: float = 1e-6
    distortion_slack: float = 1e-12

    # Binning simulator
    gamma1: float = 0.12
    gamma2: float = 0.015
    gamma3: float = 0.015
    gamma4: float = 0.015
    tuple_cap: int = 1_000_000
    max_blocklength: int = 24
    max_codebook_size: int = 2**20

    # Runs
    threads: int = 1
    out_dir: str = "./runs"

    model_config = SettingsConfigDict(env_prefix="MTRD_", env_file=".env", extra="ignore")


settings = Settings()
