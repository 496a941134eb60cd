"""Configuration management for renyi-adapt.

Run defaults live in a JSON file (``.renyi-adapt/config.json`` unless ``--config`` or
``RENYI_ADAPT_CONFIG`` points elsewhere). A missing or unreadable file means built-in defaults.
"""

import json
import os
from loguru import logger
from pathlib import Path
from pydantic import ValidationError

from renyi_adapt.models.config import RunDefaults


CONFIG_DIR_NAME = ".renyi-adapt"
CONFIG_FILE_NAME = "config.json"
CONFIG_ENV_VAR = "RENYI_ADAPT_CONFIG"


def default_config_path() -> Path:
    """Config file location when nothing overrides it."""
    env_path = os.getenv(CONFIG_ENV_VAR)
    if env_path:
        return Path(env_path)
    return Path.cwd() / CONFIG_DIR_NAME / CONFIG_FILE_NAME


class ConfigManager:
    """Loads and saves the run defaults.

    Attributes:
        config (RunDefaults): The effective defaults.
        config_file (Path): Path of the backing JSON file.
    """

    def __init__(self, config_file: Path | str | None = None) -> None:
        """Initialize the configuration manager.

        Args:
            config_file: Explicit config path; falls back to the environment variable, then to
                ``.renyi-adapt/config.json`` under the working directory.
        """
        self.config_file = Path(config_file) if config_file else default_config_path()
        self.config = RunDefaults()
        self.loaded_from_file = False
        self._load_config()

    def _load_config(self) -> None:
        """Load the defaults from disk, keeping built-ins when the file is absent or malformed."""
        if not self.config_file.exists():
            logger.debug(f"Configuration file not found at {self.config_file}, using built-in defaults")
            return
        try:
            with open(self.config_file, encoding="utf-8") as f:
                config_data = json.load(f)
            self.config = RunDefaults.model_validate(config_data)
            self.loaded_from_file = True
            logger.debug(f"Configuration loaded from {self.config_file}")
        except json.JSONDecodeError as e:
            logger.error(f"Failed to parse configuration file {self.config_file}: {e}")
        except ValidationError as e:
            logger.error(f"Invalid configuration in {self.config_file}: {e.error_count()} error(s)")
            for error in e.errors():
                logger.error(f"  {'.'.join(str(p) for p in error['loc'])}: {error['msg']}")

    def save_config(self) -> bool:
        """Write the current defaults to the config file."""
        try:
            self.config_file.parent.mkdir(parents=True, exist_ok=True)
            with open(self.config_file, "w", encoding="utf-8") as f:
                json.dump(self.config.model_dump(mode="json"), f, indent=2)
            logger.debug(f"Configuration saved to {self.config_file}")
            return True
        except OSError as e:
            logger.error(f"Failed to save configuration: {e}")
            return False

    def reset(self) -> None:
        """Return to built-in defaults (not persisted until save_config)."""
        self.config = RunDefaults()
