"""Configuration management for the FairWASP solver.

Loads configuration from:
- config/settings.yaml - default settings (can be committed to git)
- the file named by FAIRWASP_SETTINGS, if set - local overrides
"""
import os
import yaml
import logging
from pathlib import Path
from typing import Dict, Any

# Base paths
BASE_DIR = Path(__file__).parent.parent
CONFIG_DIR = BASE_DIR / "config"
LOGS_DIR = BASE_DIR / "logs"

# Config file paths
SETTINGS_FILE = CONFIG_DIR / "settings.yaml"
OVERRIDE_ENV = "FAIRWASP_SETTINGS"
LOG_LEVEL_ENV = "FAIRWASP_LOG"

logger = logging.getLogger(__name__)


def load_yaml_file(filepath: Path) -> Dict[str, Any]:
    """Load a YAML configuration file.

    Args:
        filepath: Path to the YAML file

    Returns:
        Dictionary containing the configuration, empty if the file is
        missing or unreadable
    """
    if filepath.exists():
        try:
            with open(filepath, 'r', encoding='utf-8') as f:
                return yaml.safe_load(f) or {}
        except Exception as e:
            logger.error(f"Error loading {filepath}: {e}")
            return {}
    return {}


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively merge override into a copy of base."""
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


_settings: Dict[str, Any] = {}


def load_config() -> None:
    """Load settings.yaml plus the optional override file."""
    global _settings
    _settings = load_yaml_file(SETTINGS_FILE)
    override = os.getenv(OVERRIDE_ENV)
    if override:
        _settings = _merge(_settings, load_yaml_file(Path(override)))
        logger.debug(f"Applied settings override from {override}")


def get_settings() -> Dict[str, Any]:
    """Get all settings."""
    if not _settings:
        load_config()
    return _settings


def get_setting(key: str, default: Any = None) -> Any:
    """Get a specific setting value using dot notation.

    Args:
        key: Setting key (supports dot notation e.g., 'solver.gap_tol')
        default: Default value if key not found

    Returns:
        Setting value or default
    """
    value = get_settings()
    for k in key.split('.'):
        if isinstance(value, dict) and k in value:
            value = value[k]
        else:
            return default
    return default if value is None else value


def reload_config() -> None:
    """Reload configuration from files."""
    global _settings
    _settings = {}
    load_config()


# Initialize configuration on import
load_config()


# ============================================================================
# DEFAULTS (derived from YAML config)
# ============================================================================

# Dataset
STANDARDIZE = get_setting('dataset.standardize', True)
INCLUDE_D_IN_FEATURES = get_setting('dataset.include_d_in_features', False)
CSV_DELIMITER = get_setting('dataset.delimiter', ",")

# Cost
COST_METRIC = get_setting('cost.metric', "euclidean")
COST_THREADS = get_setting('cost.threads', 0)
COST_CACHE_DIR = get_setting('cost.cache_dir', None)

# Solver
DEFAULT_EPSILON = get_setting('solver.epsilon', 0.05)
DEFAULT_GAP_TOL = get_setting('solver.gap_tol', 1e-3)
DEFAULT_MAX_ITERS = get_setting('solver.max_iters', 500)
DEFAULT_LAMBDA_MAX = get_setting('solver.lambda_max', 1e4)
DEFAULT_NEWTON_TOL = get_setting('solver.newton_tol', 1e-8)
DEFAULT_NEWTON_MAX = get_setting('solver.newton_max', 50)
DEFAULT_CUT_DROP = get_setting('solver.cut_drop_threshold', 30)
DEFAULT_MAX_RESTARTS = get_setting('solver.max_restarts', 3)
FEASIBILITY_TOL = get_setting('solver.feasibility_tol', 1e-9)
COMPLETION = get_setting('solver.completion', True)
COMPLETION_TIME_LIMIT = get_setting('solver.completion_time_limit', 60.0)
COMPLETION_MAX_VARS = get_setting('solver.completion_max_vars', 500000)

# Pairwise
PW_NM_MAX_EVALS = get_setting('pairwise.nm_max_evals', 200)
PW_NM_TOL = get_setting('pairwise.nm_tol', 1e-4)
PW_RESTARTS = get_setting('pairwise.restarts', 2)

# Bench
BENCH_N_START = get_setting('bench.n_start', 100)
BENCH_N_END = get_setting('bench.n_end', 6400)
BENCH_TRIALS = get_setting('bench.trials', 5)
BENCH_SEED = get_setting('bench.seed', 0)
BENCH_EPSILON = get_setting('bench.epsilon', 0.05)

# Logging settings
LOG_LEVEL = get_setting('logging.level', "INFO")
LOG_MAX_SIZE = get_setting('logging.max_file_size', 10485760)
LOG_BACKUP_COUNT = get_setting('logging.backup_count', 5)
LOG_TO_FILE = get_setting('logging.log_to_file', False)


def default_threads() -> int:
    """Number of worker threads for row-parallel work."""
    configured = int(COST_THREADS or 0)
    return configured if configured > 0 else (os.cpu_count() or 1)
