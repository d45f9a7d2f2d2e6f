"""
Run configuration: one YAML file describing a pipeline run.

Precedence is CLI flag > YAML value > config.settings default. Relative paths
resolve against the directory holding the YAML file.
"""
import logging
import re
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import yaml

from config import settings
from config.credentials import LIVE_PROVIDER_KINDS, validate_key_reference
from src.utils.errors import ConfigError

logger = logging.getLogger(__name__)

PROVIDER_KINDS = LIVE_PROVIDER_KINDS | {"mock"}
MOCK_STYLES = {"reverse", "truncate"}
MOCK_BEHAVIORS = {"ok", "fail", "refuse"}

_KNOWN_KEYS = {
    "corpus", "dictionary", "composites", "name_lexicon", "providers", "alpha",
    "gender_threshold", "max_in_flight", "workers", "cache_dir", "output_dir",
    "equal_var", "bonferroni", "refusal_phrases",
}
_PATH_KEYS = ("corpus", "dictionary", "composites", "name_lexicon", "cache_dir", "output_dir")
_NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.-]*$")


@dataclass(frozen=True)
class ProviderConfig:
    """One rewrite provider. api_key_env names an environment variable, never a key."""

    name: str
    kind: str
    model: str
    base_url: str = None
    api_key_env: str = None
    timeout: float = settings.API_TIMEOUT
    params: dict = field(default_factory=dict)

    def fingerprint_payload(self):
        return {
            "name": self.name,
            "kind": self.kind,
            "model": self.model,
            "base_url": self.base_url,
            "params": self.params,
        }


@dataclass(frozen=True)
class RunConfig:
    corpus: Path
    dictionary: Path
    composites: Path
    name_lexicon: Path
    providers: tuple = ()
    alpha: float = settings.DEFAULT_ALPHA
    gender_threshold: float = settings.DEFAULT_GENDER_THRESHOLD
    max_in_flight: int = settings.MAX_IN_FLIGHT
    workers: int = settings.EXTRACT_WORKERS
    cache_dir: Path = Path(settings.CACHE_DIR)
    output_dir: Path = Path(settings.OUTPUT_DIR)
    equal_var: bool = False
    bonferroni: bool = False
    refusal_phrases: tuple = tuple(settings.DEFAULT_REFUSAL_PHRASES)
    config_path: Path = None

    @property
    def provider_names(self):
        return [p.name for p in self.providers]

    def select_providers(self, models):
        """
        Restrict the run to the named providers, keeping config order.

        Raises:
            ConfigError: If a name does not match any configured provider
        """
        if not models:
            return self
        unknown = [m for m in models if m not in self.provider_names]
        if unknown:
            raise ConfigError(f"Unknown provider(s) in --models: {', '.join(unknown)}")
        wanted = set(models)
        return replace(self, providers=tuple(p for p in self.providers if p.name in wanted))

    def with_overrides(self, **overrides):
        """Apply CLI values; None means the flag was not given."""
        given = {k: v for k, v in overrides.items() if v is not None}
        if "output_dir" in given:
            given["output_dir"] = Path(given["output_dir"]).resolve()
        updated = replace(self, **given)
        errors = _validate_values(updated)
        if errors:
            raise ConfigError("Invalid configuration:\n  - " + "\n  - ".join(errors))
        return updated

    def to_dict(self):
        data = asdict(self)
        for key in _PATH_KEYS + ("config_path",):
            if data[key] is not None:
                data[key] = str(data[key])
        data["providers"] = [asdict(p) for p in self.providers]
        data["refusal_phrases"] = list(self.refusal_phrases)
        return data


def _resolve(base_dir, value):
    path = Path(value).expanduser()
    if not path.is_absolute():
        path = base_dir / path
    return path.resolve()


def _parse_provider(raw, index, errors):
    where = f"providers[{index}]"
    if not isinstance(raw, dict):
        errors.append(f"{where}: expected a mapping")
        return None
    name = raw.get("name")
    kind = raw.get("kind")
    if not name or not isinstance(name, str):
        errors.append(f"{where}: 'name' is required")
        return None
    if not _NAME_RE.match(name) or name.lower() == "human":
        errors.append(f"{where} ({name}): name must match [A-Za-z0-9_.-]+ and must not be 'human'")
        return None
    if kind not in PROVIDER_KINDS:
        errors.append(f"{where} ({name}): 'kind' must be one of {sorted(PROVIDER_KINDS)}")
        return None
    model = raw.get("model") or ("mock" if kind == "mock" else None)
    if not model:
        errors.append(f"{where} ({name}): 'model' is required")
        return None
    params = raw.get("params") or {}
    if not isinstance(params, dict):
        errors.append(f"{where} ({name}): 'params' must be a mapping")
        return None
    if kind == "mock":
        if params.get("style", "reverse") not in MOCK_STYLES:
            errors.append(f"{where} ({name}): mock style must be one of {sorted(MOCK_STYLES)}")
        if params.get("behavior", "ok") not in MOCK_BEHAVIORS:
            errors.append(f"{where} ({name}): mock behavior must be one of {sorted(MOCK_BEHAVIORS)}")
    try:
        validate_key_reference(name, kind, raw.get("api_key_env"))
    except ConfigError as e:
        errors.append(str(e))
        return None
    try:
        timeout = float(raw.get("timeout", settings.API_TIMEOUT))
    except (TypeError, ValueError):
        errors.append(f"{where} ({name}): 'timeout' must be a number")
        return None
    return ProviderConfig(
        name=name,
        kind=kind,
        model=str(model),
        base_url=raw.get("base_url"),
        api_key_env=raw.get("api_key_env"),
        timeout=timeout,
        params=dict(params),
    )


def _validate_values(config):
    errors = []
    if not (isinstance(config.alpha, (int, float)) and 0 < config.alpha < 1):
        errors.append(f"alpha must be in (0, 1), got {config.alpha}")
    if not (isinstance(config.gender_threshold, (int, float)) and 0.5 < config.gender_threshold <= 1):
        errors.append(f"gender_threshold must be in (0.5, 1], got {config.gender_threshold}")
    if not isinstance(config.max_in_flight, int) or config.max_in_flight < 1:
        errors.append(f"max_in_flight must be a positive integer, got {config.max_in_flight}")
    if not isinstance(config.workers, int) or config.workers < 1:
        errors.append(f"workers must be a positive integer, got {config.workers}")
    names = config.provider_names
    duplicates = sorted({n for n in names if names.count(n) > 1})
    if duplicates:
        errors.append(f"provider names must be unique: {', '.join(duplicates)}")
    return errors


def load_run_config(path=None):
    """
    Load and validate a run config file.

    Args:
        path: YAML file; defaults to the bundled offline demo config

    Returns:
        RunConfig

    Raises:
        ConfigError: All validation problems, reported together
    """
    config_path = Path(path or settings.DEMO_CONFIG_PATH).resolve()
    try:
        with open(config_path, "r", encoding="utf-8") as f:
            raw = yaml.safe_load(f) or {}
    except OSError as e:
        raise ConfigError(f"Cannot read config {config_path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"Invalid YAML in {config_path}: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"Config {config_path} must be a mapping at the top level")

    base_dir = config_path.parent
    errors = []
    unknown = sorted(set(raw) - _KNOWN_KEYS)
    if unknown:
        errors.append(f"unknown keys: {', '.join(unknown)}")

    if "corpus" not in raw:
        errors.append("'corpus' is required")
    paths = {
        "corpus": _resolve(base_dir, raw["corpus"]) if "corpus" in raw else None,
        "dictionary": _resolve(base_dir, raw["dictionary"]) if "dictionary" in raw
        else settings.DEFAULT_DICTIONARY_PATH,
        "composites": _resolve(base_dir, raw["composites"]) if "composites" in raw
        else settings.DEFAULT_COMPOSITES_PATH,
        "name_lexicon": _resolve(base_dir, raw["name_lexicon"]) if "name_lexicon" in raw
        else settings.DEFAULT_NAME_LEXICON_PATH,
        "cache_dir": _resolve(base_dir, raw.get("cache_dir", settings.CACHE_DIR)),
        "output_dir": _resolve(base_dir, raw.get("output_dir", settings.OUTPUT_DIR)),
    }
    for key in ("corpus", "dictionary", "composites", "name_lexicon"):
        if paths[key] is not None and not Path(paths[key]).exists():
            errors.append(f"{key}: file not found: {paths[key]}")

    raw_providers = raw.get("providers") or []
    if not isinstance(raw_providers, list):
        errors.append("'providers' must be a list")
        raw_providers = []
    providers = []
    for index, item in enumerate(raw_providers):
        provider = _parse_provider(item, index, errors)
        if provider is not None:
            providers.append(provider)

    refusal = raw.get("refusal_phrases", settings.DEFAULT_REFUSAL_PHRASES)
    if not isinstance(refusal, list) or not all(isinstance(p, str) for p in refusal):
        errors.append("'refusal_phrases' must be a list of strings")
        refusal = settings.DEFAULT_REFUSAL_PHRASES

    config = None
    if paths["corpus"] is not None:
        config = RunConfig(
            corpus=paths["corpus"],
            dictionary=Path(paths["dictionary"]),
            composites=Path(paths["composites"]),
            name_lexicon=Path(paths["name_lexicon"]),
            providers=tuple(providers),
            alpha=raw.get("alpha", settings.DEFAULT_ALPHA),
            gender_threshold=raw.get("gender_threshold", settings.DEFAULT_GENDER_THRESHOLD),
            max_in_flight=raw.get("max_in_flight", settings.MAX_IN_FLIGHT),
            workers=raw.get("workers", settings.EXTRACT_WORKERS),
            cache_dir=paths["cache_dir"],
            output_dir=paths["output_dir"],
            equal_var=bool(raw.get("equal_var", False)),
            bonferroni=bool(raw.get("bonferroni", False)),
            refusal_phrases=tuple(p.lower() for p in refusal),
            config_path=config_path,
        )
        errors.extend(_validate_values(config))

    if errors:
        raise ConfigError(f"Invalid configuration {config_path.name}:\n  - " + "\n  - ".join(errors))

    logger.debug(f"⚙️ Loaded run config {config_path} with {len(providers)} provider(s)")
    return config


__all__ = ['ProviderConfig', 'RunConfig', 'load_run_config', 'PROVIDER_KINDS']
