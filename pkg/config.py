"""
Simulator Configuration
-----------------------
All settings loaded from environment variables or .env file.
A declarative config file (see cli/settings.py) can override the
physics knobs per run; everything else lives here.
"""
import os
from dataclasses import dataclass, field
from dotenv import load_dotenv

load_dotenv()


def _flag(name: str, default: str) -> bool:
    return os.getenv(name, default).lower() == "true"


@dataclass
class Config:
    """Repeater simulator configuration."""

    # =========================
    # Simulation core
    # =========================
    MAX_QUBITS: int = field(default_factory=lambda: int(os.getenv("MAX_QUBITS", "14")))
    ALGEBRA_TOL: float = field(default_factory=lambda: float(os.getenv("ALGEBRA_TOL", "1e-12")))
    PIPELINE_TOL: float = field(default_factory=lambda: float(os.getenv("PIPELINE_TOL", "1e-10")))

    # =========================
    # Sources (SPDC)
    # =========================
    DOWN_CONVERSION_P: float = field(default_factory=lambda: float(os.getenv("DOWN_CONVERSION_P", "0.0344")))
    MAX_PAIRS: int = field(default_factory=lambda: int(os.getenv("MAX_PAIRS", "2")))
    # "thermal" = p^k series, "poisson" = truncated Poisson
    EMISSION_MODEL: str = field(default_factory=lambda: os.getenv("EMISSION_MODEL", "thermal"))
    PULSE_RATE_HZ: float = field(default_factory=lambda: float(os.getenv("PULSE_RATE_HZ", "8.0e7")))
    SYSTEM_EFFICIENCY: float = field(default_factory=lambda: float(os.getenv("SYSTEM_EFFICIENCY", "0.38")))

    # =========================
    # Noise
    # =========================
    GHZ_LOSSLESS: bool = field(default_factory=lambda: _flag("GHZ_LOSSLESS", "false"))
    PCM_VISIBILITY: float = field(default_factory=lambda: float(os.getenv("PCM_VISIBILITY", "1.0")))
    PBS_VISIBILITY: float = field(default_factory=lambda: float(os.getenv("PBS_VISIBILITY", "1.0")))
    WHITE_NOISE: float = field(default_factory=lambda: float(os.getenv("WHITE_NOISE", "0.0")))
    INCLUDE_MULTI_PAIR: bool = field(default_factory=lambda: _flag("INCLUDE_MULTI_PAIR", "true"))

    # =========================
    # Engine
    # =========================
    ENUMERATION_BUDGET: int = field(default_factory=lambda: int(float(os.getenv("ENUMERATION_BUDGET", "1e8"))))
    SAMPLE_TRIALS: int = field(default_factory=lambda: int(os.getenv("SAMPLE_TRIALS", "1000000")))
    SAMPLE_BLOCK_SIZE: int = field(default_factory=lambda: int(os.getenv("SAMPLE_BLOCK_SIZE", "65536")))
    WORKERS: int = field(default_factory=lambda: int(os.getenv("WORKERS", "4")))
    SEED: int = field(default_factory=lambda: int(os.getenv("SEED", "20190101")))

    # =========================
    # Tomography
    # =========================
    TOMO_SHOTS: int = field(default_factory=lambda: int(os.getenv("TOMO_SHOTS", "100000")))
    MLE_MAX_ITERATIONS: int = field(default_factory=lambda: int(os.getenv("MLE_MAX_ITERATIONS", "10000")))
    MLE_TOLERANCE: float = field(default_factory=lambda: float(os.getenv("MLE_TOLERANCE", "1e-10")))
    MLE_DEBUG: bool = field(default_factory=lambda: _flag("MLE_DEBUG", "false"))

    # =========================
    # Storage
    # =========================
    DATA_DIR: str = field(default_factory=lambda: os.getenv("DATA_DIR", "data"))
    RUN_LOG_DB_PATH: str = field(default_factory=lambda: os.getenv("RUN_LOG_DB_PATH", "data/runs.db"))
    RUN_LOG_ENABLED: bool = field(default_factory=lambda: _flag("RUN_LOG_ENABLED", "true"))
    LOG_FILE: str = field(default_factory=lambda: os.getenv("LOG_FILE", "repeater_sim.log"))


# Global config instance
config = Config()
