"""
Repeater Simulator Entry Point
------------------------------
Sets up logging and hands over to the command-line application.

Examples:
    python main.py rates --M 3 --N 2 --eta 0.9
    python main.py --seed 7 --out scan.csv --format csv ratio-scan --method sample
    python main.py tomo ghz4 --target-fidelity 0.896
    python main.py --dump-config > my-config.yaml

Key Principles:
- Exact enumeration first; sampling only when enumeration is over budget
- Seed and resolved settings recorded with every result
- Output files are written atomically
"""

import logging

import coloredlogs

from config import config
from core import configure_core_from_config
from cli import app


LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"

logging.basicConfig(
    level=logging.INFO,
    format=LOG_FORMAT,
    handlers=[
        logging.StreamHandler(),
        logging.FileHandler(config.LOG_FILE),
    ],
)
# coloredlogs swaps the plain stderr handler for a coloured one
coloredlogs.install(level="INFO", fmt=LOG_FORMAT)
logger = logging.getLogger("RepeaterSim")


def main():
    """Entry point."""
    configure_core_from_config(config)
    logger.debug(f"Qubit cap {config.MAX_QUBITS}, seed {config.SEED}")
    app()


if __name__ == "__main__":
    main()
