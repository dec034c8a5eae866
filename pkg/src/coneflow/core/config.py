import os
from contextlib import contextmanager

import addict
import yaml

from .errors import ConfigValidationError
from .io import get_ext, load_file
from .types import *

DIR = os.path.dirname(os.path.abspath(__file__))
DEFAULT_CONFIG_FILE = os.path.join(DIR, "..", "default_configs.yaml")
CONFIG_EXTENSIONS = [".json", ".yaml", ".yml", ".toml"]


class Configs(addict.Dict):
    """A Dictionary class that allows for dot notation access to nested dictionaries."""

    def getattrs(self, key: str, default: Any = None) -> Any:
        """Get a value from a nested dictionary using a dot-separated key string.

        Missing keys fall back to the packaged defaults with a warning.
        """
        keys = key.split(".")
        prefix = "."
        v = self
        try:
            for k in keys:
                v = getattr(v, k)
                prefix += k + "."
            return v
        except KeyError as e:
            msg = f"{e} not found in prefix '{prefix}'"

            if default is None and self is not DEFAULT_CONFIGS:
                try:
                    default = DEFAULT_CONFIGS.getattrs(key)
                except Exception:
                    pass

            if default is not None:
                logger.warning(f"{msg}, using default: {default}")
                return default
            logger.error(msg)
            raise e

    def to_yaml(self) -> str:
        """Convert the Configs object to a YAML string."""
        return yaml.dump(self.to_dict())

    def __missing__(self, key: str) -> None:
        raise KeyError(key)


def load_config(file: str, *args: Any, **kwargs: Any) -> Configs:
    """Load a config file and return the data as a dictionary."""
    ext = get_ext(file)
    if ext not in CONFIG_EXTENSIONS:
        raise ConfigValidationError(
            f"Unsupported config file type {ext}", module="config"
        )
    if not os.path.isfile(file):
        raise ConfigValidationError(f"Config file {file} not found", module="config")
    content = load_file(file, *args, **kwargs)
    return Configs(content or {})


def check_known_keys(
    overrides: Dict[str, Any], reference: Dict[str, Any], prefix: str = ""
) -> None:
    """Reject keys in `overrides` that do not exist in `reference`.

    Raises:
        ConfigValidationError: On the first unknown key, with its dotted path.
    """
    for key, value in overrides.items():
        path = f"{prefix}{key}"
        if key not in reference:
            raise ConfigValidationError(f"Unknown config key '{path}'", module="config")
        if isinstance(value, dict) and isinstance(reference[key], dict):
            if reference[key]:  # free-form mappings such as metadata stay open
                check_known_keys(value, reference[key], prefix=path + ".")


def merge_settings(overrides: Dict[str, Any]) -> Configs:
    """Return a copy of the global configs updated with validated overrides."""
    check_known_keys(overrides, DEFAULT_CONFIGS.to_dict())
    merged = configs.deepcopy()
    merged.update(Configs(overrides))
    return merged


DEFAULT_CONFIGS = load_config(DEFAULT_CONFIG_FILE)
"""The static default configs loaded from the default config file."""
# singleton
configs = DEFAULT_CONFIGS.deepcopy()
"""The global configs"""


@contextmanager
def using_settings(overrides: Dict[str, Any]) -> Iterator[Configs]:
    """Apply validated overrides to the global configs for the duration of a block."""
    merged = merge_settings(overrides)
    saved = configs.deepcopy()
    configs.clear()
    configs.update(merged)
    try:
        yield configs
    finally:
        configs.clear()
        configs.update(saved)
