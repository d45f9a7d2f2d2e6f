"""
Application settings for the LIWC bias audit toolkit.
Environment-driven defaults; a run's YAML config overrides them (see config/run_config.py).
"""
import logging
import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# ============================================================================
# PROJECT CONFIGURATION
# ============================================================================

BASE_DIR = Path(__file__).resolve().parent.parent
DATA_DIR = BASE_DIR / "data"

# Bundled open resources
DEFAULT_DICTIONARY_PATH = DATA_DIR / "open_liwc.dic"
DEFAULT_COMPOSITES_PATH = DATA_DIR / "composites.yaml"
DEFAULT_NAME_LEXICON_PATH = DATA_DIR / "names.csv"
DEMO_CONFIG_PATH = DATA_DIR / "demo" / "config.yaml"

# ============================================================================
# LLM REWRITE CONFIGURATION
# ============================================================================

# 3 attempts total, exponential backoff with 0-50% jitter
MAX_RETRIES = int(os.getenv("MAX_RETRIES", "3"))
RETRY_DELAY_BASE = float(os.getenv("RETRY_DELAY_BASE", "2"))
API_TIMEOUT = int(os.getenv("API_TIMEOUT", "120"))

# Outstanding requests per provider
MAX_IN_FLIGHT = int(os.getenv("MAX_IN_FLIGHT", "4"))

CACHE_DIR = os.getenv("CACHE_DIR", "./data/cache")

# Matched case-insensitively against rewrite output
DEFAULT_REFUSAL_PHRASES = [
    "i can't help with",
    "i cannot help with",
    "i'm sorry, but i can",
    "i am unable to",
    "as an ai language model",
]

# ============================================================================
# ANALYSIS CONFIGURATION
# ============================================================================

DEFAULT_ALPHA = float(os.getenv("DEFAULT_ALPHA", "0.05"))
DEFAULT_GENDER_THRESHOLD = float(os.getenv("DEFAULT_GENDER_THRESHOLD", "0.9"))
EXTRACT_WORKERS = int(os.getenv("EXTRACT_WORKERS", "1"))
OUTPUT_DIR = os.getenv("OUTPUT_DIR", "./output")

# ============================================================================
# LOGGING CONFIGURATION
# ============================================================================

LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()
LOG_FILE_PATH = os.getenv("LOG_FILE_PATH", "./logs/liwc_audit.log")
MAX_LOG_SIZE_MB = int(os.getenv("MAX_LOG_SIZE_MB", "50"))
LOG_BACKUP_COUNT = int(os.getenv("LOG_BACKUP_COUNT", "5"))

DEBUG_MODE = os.getenv("DEBUG_MODE", "false").lower() == "true"

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
LOG_DATE_FORMAT = '%Y-%m-%d %H:%M:%S'

# ============================================================================
# VALIDATION AND DEFAULTS
# ============================================================================

def validate_settings():
    """Validate critical settings and provide warnings."""
    warnings = []
    errors = []

    if not 0 < DEFAULT_ALPHA < 1:
        errors.append("DEFAULT_ALPHA must be in (0, 1)")

    if not 0.5 < DEFAULT_GENDER_THRESHOLD <= 1:
        errors.append("DEFAULT_GENDER_THRESHOLD must be in (0.5, 1]")

    if MAX_RETRIES < 1:
        errors.append("MAX_RETRIES must be at least 1")

    if MAX_IN_FLIGHT < 1:
        errors.append("MAX_IN_FLIGHT must be at least 1")

    if EXTRACT_WORKERS < 1:
        errors.append("EXTRACT_WORKERS must be at least 1")

    if API_TIMEOUT < 10:
        warnings.append("API_TIMEOUT is very low (< 10 seconds) - long abstracts may time out")

    if MAX_IN_FLIGHT > 32:
        warnings.append("MAX_IN_FLIGHT is very high (> 32) - providers may rate limit")

    if DEFAULT_ALPHA > 0.1:
        warnings.append("DEFAULT_ALPHA is above 0.1")

    return warnings, errors


def get_settings_summary():
    """Get a summary of current settings for logging."""
    return {
        "alpha": DEFAULT_ALPHA,
        "gender_threshold": DEFAULT_GENDER_THRESHOLD,
        "max_in_flight": MAX_IN_FLIGHT,
        "extract_workers": EXTRACT_WORKERS,
        "retries": {
            "max_attempts": MAX_RETRIES,
            "delay_base": RETRY_DELAY_BASE,
            "timeout": API_TIMEOUT
        },
        "cache_dir": CACHE_DIR,
        "output_dir": OUTPUT_DIR,
        "log_level": LOG_LEVEL,
        "debug_mode": DEBUG_MODE
    }

# Logged once at import
_warnings, _errors = validate_settings()
for _message in _warnings:
    logging.getLogger(__name__).warning(f"⚠️ Settings: {_message}")
for _message in _errors:
    logging.getLogger(__name__).error(f"❌ Settings: {_message}")

__all__ = [
    'BASE_DIR', 'DATA_DIR', 'DEFAULT_DICTIONARY_PATH', 'DEFAULT_COMPOSITES_PATH',
    'DEFAULT_NAME_LEXICON_PATH', 'DEMO_CONFIG_PATH', 'MAX_RETRIES', 'RETRY_DELAY_BASE',
    'API_TIMEOUT', 'MAX_IN_FLIGHT', 'CACHE_DIR', 'DEFAULT_REFUSAL_PHRASES',
    'DEFAULT_ALPHA', 'DEFAULT_GENDER_THRESHOLD', 'EXTRACT_WORKERS', 'OUTPUT_DIR',
    'LOG_LEVEL', 'LOG_FILE_PATH', 'MAX_LOG_SIZE_MB', 'LOG_BACKUP_COUNT', 'DEBUG_MODE',
    'LOG_FORMAT', 'LOG_DATE_FORMAT',
    'validate_settings', 'get_settings_summary'
]
