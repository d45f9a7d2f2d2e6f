"""
Credentials management for LLM providers.
Keys are always read from environment variables named in the run config; a run
config never holds a secret itself.
"""
import os
import re
import logging
from pathlib import Path
from dotenv import load_dotenv

from src.utils.errors import ConfigError, CredentialError

logger = logging.getLogger(__name__)

# Load environment variables from .env file
env_file = Path(".env")
if env_file.exists():
    load_dotenv(env_file)
    logger.debug(f"📁 Loaded environment from {env_file}")

# Provider kinds that call a remote API and therefore need a key
LIVE_PROVIDER_KINDS = {"anthropic", "mistral", "gemini", "openai"}

# Conventional variable names, used when a provider omits api_key_env
DEFAULT_KEY_ENV = {
    "anthropic": "ANTHROPIC_API_KEY",
    "mistral": "MISTRAL_API_KEY",
    "gemini": "GEMINI_API_KEY",
    "openai": "OPENAI_API_KEY",
}

_ENV_NAME_RE = re.compile(r'^[A-Z_][A-Z0-9_]*$')

# ============================================================================
# CREDENTIAL VALIDATION
# ============================================================================

def is_valid_env_name(name):
    """Environment-variable names are upper-case identifiers; anything else looks like a literal key."""
    return bool(name) and bool(_ENV_NAME_RE.match(name))


def validate_key_reference(provider_name, kind, api_key_env):
    """
    Check a provider's credential reference without reading the secret.

    Returns:
        str or None: The environment-variable name to use (None for mock providers)

    Raises:
        ConfigError: If the reference is not a valid environment-variable name
    """
    if kind not in LIVE_PROVIDER_KINDS:
        return None
    env_name = api_key_env or DEFAULT_KEY_ENV[kind]
    if not is_valid_env_name(env_name):
        raise ConfigError(
            f"Provider '{provider_name}': api_key_env must name an environment variable, "
            f"got {mask_key(env_name)}"
        )
    return env_name


def resolve_api_key(provider_name, kind, api_key_env):
    """
    Resolve a provider's API key from the environment.

    Raises:
        CredentialError: If the named variable is not set for a live provider
    """
    env_name = validate_key_reference(provider_name, kind, api_key_env)
    if env_name is None:
        return None
    value = os.getenv(env_name, "")
    if not value:
        logger.error(f"❌ Missing credential {env_name} for provider '{provider_name}'")
        raise CredentialError(env_name, provider_name)
    logger.debug(f"🔐 Provider '{provider_name}' using {env_name}={mask_key(value)}")
    return value


def mask_key(key):
    """Mask sensitive parts of an API key."""
    if not key or len(key) < 10:
        return "***"
    return f"{key[:5]}***{key[-4:]}"


def get_credential_info(providers):
    """
    Get information about configured provider credentials (safe for logging).

    Args:
        providers: iterable of objects with name, kind and api_key_env attributes

    Returns:
        dict: provider name -> masked status
    """
    info = {}
    for provider in providers:
        if provider.kind not in LIVE_PROVIDER_KINDS:
            info[provider.name] = "not required"
            continue
        env_name = provider.api_key_env or DEFAULT_KEY_ENV[provider.kind]
        value = os.getenv(env_name, "") if is_valid_env_name(env_name) else ""
        info[provider.name] = f"{env_name}={mask_key(value)}" if value else f"{env_name}=NOT_SET"
    return info


def log_credential_status(providers):
    """Log the current credential configuration status."""
    logger.info("🔐 CREDENTIAL STATUS SUMMARY")
    logger.info("=" * 50)
    for name, status in get_credential_info(providers).items():
        marker = "❌" if status.endswith("NOT_SET") else "✅"
        logger.info(f"{marker} {name}: {status}")
    logger.info("=" * 50)


__all__ = [
    'LIVE_PROVIDER_KINDS', 'DEFAULT_KEY_ENV', 'is_valid_env_name', 'validate_key_reference',
    'resolve_api_key', 'mask_key', 'get_credential_info', 'log_credential_status'
]
