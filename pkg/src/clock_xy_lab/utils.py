import os
import re
import threading
from dataclasses import dataclass
from typing import Any

import yaml
from mergedeep import Strategy, merge
from structlog import get_logger
from yaml.loader import SafeLoader

LOGGER = get_logger(__name__)


class ConstructionError(ValueError):
    """A precondition of a spin-field construction does not hold."""


class ResolutionError(ValueError):
    """Sampling too coarse to resolve a winding number."""


class ConfigError(ValueError):
    """Invalid sweep or command configuration."""


class RaisingThread(threading.Thread):
    def run(self):
        self._exc = None
        try:
            super().run()
        except Exception as e:
            self._exc = e

    def join(self, timeout=None):
        super().join(timeout=timeout)
        if self._exc:
            raise self._exc


@dataclass
class Options:
    outputpath: str
    threads: int
    seed: int
    timing: bool
    save_fields: bool


def replace_with_env_variables(s: str) -> str:
    # {NAME} placeholders are replaced by the environment variable, unknown ones are kept
    pattern = r"\{(\w+)\}"

    def replacer(match):
        var_name = match.group(1)
        return os.getenv(var_name, match.group(0))

    return re.sub(pattern, replacer, s)


def load_yaml(file_path: str) -> dict[str, Any]:
    with open(file_path) as f:
        try:
            config = yaml.load(f, Loader=SafeLoader)
        except yaml.YAMLError as e:
            raise ConfigError(f"Configuration {file_path} is not valid YAML") from e
    if not isinstance(config, dict):
        raise ConfigError(f"Configuration {file_path} is not a mapping")
    return config


def merge_config(*layers: dict[str, Any]) -> dict[str, Any]:
    """Later layers win; nested mappings are merged key by key, lists are replaced."""
    merged: dict[str, Any] = {}
    for layer in layers:
        merge(merged, layer, strategy=Strategy.REPLACE)
    return merged


def split_batches(items: list, batches: int) -> list[list]:
    """Round-robin split keeping the item order inside each batch."""
    batches = max(1, min(batches, len(items)))
    return [items[b::batches] for b in range(batches)]
