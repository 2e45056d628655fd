"""
Configuration management for experiment runs.

Loads the experiment YAML file, validates it against a schema and fills in
defaults. Sections are plain key-value maps; the `learners` section maps a
learner name to its kind and hyperparameters.
"""

from pathlib import Path
from typing import Any, Dict, Optional

import yaml


class ConfigValidationError(Exception):
    """Raised when configuration validation fails."""
    pass


def _type_name(expected: Any) -> str:
    if isinstance(expected, tuple):
        return " or ".join(t.__name__ for t in expected)
    return expected.__name__


class ConfigManager:
    """
    Manages experiment configuration with validation and default values.

    Provides dot notation access to configuration values.
    """

    SCHEMA = {
        "logging": {
            "required": False,
            "fields": {
                "path": {"type": str, "default": "gdm_ensemble.log"},
                "level": {"type": str, "default": "INFO"},
            }
        },
        "experiment": {
            "required": True,
            "fields": {
                "datasets": {"type": list, "required": True},
                "manifest_dir": {"type": str, "default": "config/datasets"},
                "seeds": {"type": list, "default": list(range(10))},
                "split_fraction": {"type": (int, float), "default": 0.8},
                "split_rounding": {"type": str, "default": "half_up"},
                "stratified": {"type": bool, "default": True},
                "weight_protocol": {"type": str, "default": "validation:0.25"},
                "rating_mode": {"type": str, "default": "scores"},
                "accuracy_mode": {"type": str, "default": "overall"},
                "max_workers": {"type": int, "default": 4},
                "output_dir": {"type": str, "default": "results"},
                "formats": {"type": list, "default": ["csv", "markdown", "json"]},
                "save_committees": {"type": bool, "default": False},
            }
        },
    }

    # Free-form section: learner name -> {kind, hyperparameters, seed}
    LEARNER_FIELDS = {
        "kind": {"type": str, "required": True},
        "hyperparameters": {"type": dict, "default": {}},
        "seed": {"type": int, "default": 0},
    }

    def __init__(self, config_path: Optional[str] = None, config: Optional[Dict[str, Any]] = None):
        """
        Initialize ConfigManager from a YAML file or an in-memory dictionary.

        Args:
            config_path: Path to the YAML configuration file
            config: Already-parsed configuration (used when no path is given)

        Raises:
            ConfigValidationError: If configuration is invalid or missing
        """
        self.config_path = config_path
        if config_path is not None:
            raw = self._load_yaml()
        elif config is not None:
            raw = config
        else:
            raise ConfigValidationError("Either config_path or config must be provided")
        self.config = self._apply_defaults_and_validate(raw)

    def _load_yaml(self) -> Dict[str, Any]:
        if not Path(self.config_path).exists():
            raise ConfigValidationError(f"Config file not found: {self.config_path}")

        try:
            with open(self.config_path, 'r', encoding="utf-8") as f:
                config = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigValidationError(f"Invalid YAML format in {self.config_path}: {e}")

        if not isinstance(config, dict):
            raise ConfigValidationError("Configuration must be a YAML dictionary")
        return config

    @staticmethod
    def _validate_fields(
        section_name: str, section_config: Dict[str, Any], fields: Dict[str, Any]
    ) -> Dict[str, Any]:
        validated_section: Dict[str, Any] = {}

        unknown = set(section_config) - set(fields)
        if unknown:
            raise ConfigValidationError(
                f"Unknown field(s) in {section_name}: {', '.join(sorted(unknown))}"
            )

        for field_name, field_schema in fields.items():
            field_key = f"{section_name}.{field_name}"

            if field_name in section_config:
                field_value = section_config[field_name]
                expected_type = field_schema["type"]
                # bool is an int subclass; never accept it for numeric fields
                if isinstance(field_value, bool) and expected_type is not bool:
                    ok = False
                else:
                    ok = isinstance(field_value, expected_type)
                if not ok:
                    raise ConfigValidationError(
                        f"Invalid type for {field_key}: expected {_type_name(expected_type)}, "
                        f"got {type(field_value).__name__}"
                    )
                validated_section[field_name] = field_value
            elif field_schema.get("required", False):
                raise ConfigValidationError(f"Missing required field: {field_key}")
            elif "default" in field_schema:
                default = field_schema["default"]
                validated_section[field_name] = default.copy() if isinstance(default, (list, dict)) else default

        return validated_section

    def _apply_defaults_and_validate(self, config: Dict[str, Any]) -> Dict[str, Any]:
        """Apply default values and validate configuration against schema."""
        validated_config: Dict[str, Any] = {}

        for section_name, section_schema in self.SCHEMA.items():
            if section_schema.get("required", False) and section_name not in config:
                raise ConfigValidationError(f"Missing required section: {section_name}")

            section_config = config.get(section_name) or {}
            if not isinstance(section_config, dict):
                raise ConfigValidationError(f"Section {section_name} must be a mapping")
            validated_config[section_name] = self._validate_fields(
                section_name, section_config, section_schema["fields"]
            )

        learners = config.get("learners")
        if not learners or not isinstance(learners, dict):
            raise ConfigValidationError("Missing required section: learners")

        validated_learners: Dict[str, Any] = {}
        for name, entry in learners.items():
            if not isinstance(entry, dict):
                raise ConfigValidationError(f"Learner '{name}' must be a mapping")
            validated_learners[str(name)] = self._validate_fields(
                f"learners.{name}", entry, self.LEARNER_FIELDS
            )
        validated_config["learners"] = validated_learners

        return validated_config

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get configuration value using dot notation, e.g. 'experiment.seeds'.

        Raises:
            ConfigValidationError: If key not found and no default provided
        """
        current: Any = self.config
        for part in key.split('.'):
            if isinstance(current, dict) and part in current:
                current = current[part]
            else:
                if default is not None:
                    return default
                raise ConfigValidationError(f"Configuration key not found: {key}")
        return current

    def get_section(self, section_name: str) -> Dict[str, Any]:
        """
        Get a copy of an entire configuration section.

        Raises:
            ConfigValidationError: If section not found
        """
        if section_name not in self.config:
            raise ConfigValidationError(f"Configuration section not found: {section_name}")
        return dict(self.config[section_name])
