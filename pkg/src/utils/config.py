from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    # numerical tolerances
    tolerance: float = 1e-8
    cluster_tol: float = 1e-6
    krein_zero_tol: float = 1e-6
    rank_tol: float = 1e-9
    match_tol: float = 1e-6
    count_tol: float = 1e-6
    integrality_flag_tol: float = 1e-3

    # identity harness
    harness_tolerance: float = 1e-9
    harness_margin: float = 1e-4
    harness_factor_margin: float = 1e-2
    harness_log_radius: float = 0.25
    default_seed: int = 0

    # spin model checks
    type3_max_n: int = 64
    nomura_max_n: int = 256

    # feasibility scan grids
    scan_unit_circle_max: int = 60
    scan_real_q_max: float = 3.0
    scan_real_q_step: float = 1e-3
    scan_real_a_max: float = 3.0
    scan_real_a_step: float = 1e-3
    scan_threshold: float = 1e-4

    log_level: str = "INFO"
    allowed_origins: str = "http://localhost:3000,http://127.0.0.1:8001"

    class Config:
        env_file = ".env"
        env_prefix = "SPINDRG_"
        case_sensitive = False


try:
    settings = Settings()
except Exception:
    settings = Settings(_env_file=None)
