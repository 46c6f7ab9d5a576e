import logging
import sys
import os
from typing import Optional

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Numeric tolerances shared by every module
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
NORM_TOL = 1e-12
PSD_TOL = 1e-10
COMPLETENESS_TOL = 1e-10
PROBABILITY_CLAMP = 1e-12
IMPOSSIBLE_OUTCOME = 1e-14
EIGENVALUE_FLOOR = 1e-14

# MLE defaults
MLE_TOL = 1e-10
MLE_MAX_ITER = 100_000

DEFAULT_SEED = 20120308
DEFAULT_BATCH_SHOTS = 100_000


def setup_logging(log_level: Optional[str] = None, log_file: Optional[str] = None):
    """
    格式化服务实时日志信息

    Console output goes to standard error; standard out is reserved for the
    machine-readable command output.
    """
    level_name = (log_level or os.getenv("SICBENCH_LOG_LEVEL", "WARNING")).upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        raise ValueError(f"Unknown log level: {level_name}")

    # 创建一个logger
    logger = logging.getLogger()
    logger.setLevel(level)

    # 设置日志格式
    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s', datefmt='%Y-%m-%d %H:%M:%S')

    # Avoid stacking handlers when called twice in one process
    for handler in list(logger.handlers):
        logger.removeHandler(handler)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    log_file = log_file or os.getenv("SICBENCH_LOG_FILE")
    if log_file:
        file_handler = logging.FileHandler(log_file)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)


def get_default_seed() -> int:
    """
    Default RNG seed, overridable through SICBENCH_SEED

    Returns:
        Non-negative integer seed
    """
    raw = os.getenv("SICBENCH_SEED")
    if raw is None or raw.strip() == "":
        return DEFAULT_SEED
    try:
        seed = int(raw.strip())
    except ValueError:
        raise ValueError(f"SICBENCH_SEED must be a non-negative integer, got {raw!r}")
    if seed < 0:
        raise ValueError(f"SICBENCH_SEED must be a non-negative integer, got {raw!r}")
    return seed


def get_batch_shots() -> int:
    """Shot-batch size used for RNG stream splitting"""
    raw = os.getenv("SICBENCH_BATCH_SHOTS")
    if raw is None or raw.strip() == "":
        return DEFAULT_BATCH_SHOTS
    try:
        value = int(raw.strip())
    except ValueError:
        raise ValueError(f"SICBENCH_BATCH_SHOTS must be a positive integer, got {raw!r}")
    if value <= 0:
        raise ValueError(f"SICBENCH_BATCH_SHOTS must be a positive integer, got {raw!r}")
    return value
