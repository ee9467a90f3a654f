"""
Configuration management for experiment runs

The packaged ``config.ini`` holds the defaults for [general], [logging] and
every experiment section; a user file is read on top of it and overrides
individual keys. Experiment sections are coerced and validated against the
experiment's JSON schema before use.
"""
import configparser
import os
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

from jsonschema import Draft7Validator
from loguru import logger

from config.schema import GENERAL_SCHEMA, LOGGING_SCHEMA
from core.exceptions import ConfigurationError

DEFAULT_CONFIG_PATH = Path(__file__).with_name('config.ini')
RESERVED_SECTIONS = ('general', 'logging')


class Config:
    """INI configuration with schema-validated sections"""

    def __init__(self, config_path: Optional[str] = None, load_defaults: bool = True):
        self.config = configparser.ConfigParser(inline_comment_prefixes=('#', ';'))
        self.config_path = config_path

        if load_defaults:
            self.config.read(DEFAULT_CONFIG_PATH)
        if config_path:
            self.load_config(config_path)

    def load_config(self, config_path: str):
        """Read a user configuration file on top of the current values"""
        if not os.path.exists(config_path):
            raise ConfigurationError(f"Configuration file not found: {config_path}")
        try:
            self.config.read(config_path)
        except configparser.Error as e:
            raise ConfigurationError(f"Failed to parse {config_path}: {e}")
        self.config_path = config_path
        logger.info(f"Configuration loaded from: {config_path}")

    def read_string(self, text: str):
        """Overlay INI text (used by tests and embedded configs)"""
        try:
            self.config.read_string(text)
        except configparser.Error as e:
            raise ConfigurationError(f"Failed to parse configuration text: {e}")

    def set(self, section: str, key: str, value: Any):
        """Set a configuration value"""
        if not self.config.has_section(section):
            self.config.add_section(section)
        if isinstance(value, (list, tuple)):
            value = ', '.join(str(v) for v in value)
        self.config.set(section, key, str(value))

    def get_section(self, section: str) -> Dict[str, str]:
        """Get entire configuration section as dictionary"""
        try:
            return dict(self.config[section])
        except KeyError:
            return {}

    def experiment_sections(self) -> List[str]:
        return [s for s in self.config.sections() if s not in RESERVED_SECTIONS]

    def check_sections(self, known: Iterable[str]):
        """Unknown section names are hard errors"""
        unknown = sorted(set(self.experiment_sections()) - set(known))
        if unknown:
            raise ConfigurationError(f"Unknown configuration sections: {', '.join(unknown)}")

    def validated_section(self, section: str, schema: Dict[str, Any]) -> Dict[str, Any]:
        """Coerce a section's strings by schema type and validate the result"""
        values = coerce_section(section, self.get_section(section), schema)
        errors = sorted(Draft7Validator(schema).iter_errors(values), key=lambda e: list(e.path))
        if errors:
            details = '; '.join(_describe(e) for e in errors)
            raise ConfigurationError(f"Invalid configuration in [{section}]: {details}")
        return values

    def get_general_config(self) -> Dict[str, Any]:
        """Get validated [general] configuration"""
        return self.validated_section('general', GENERAL_SCHEMA)

    def get_logging_config(self) -> Dict[str, Any]:
        """Get logging configuration"""
        return self.validated_section('logging', LOGGING_SCHEMA)

    def get_experiment_config(self, name: str, schema: Dict[str, Any]) -> Dict[str, Any]:
        """
        Validated parameters for one experiment

        Run keys not set in the experiment's own section are inherited from
        [general].
        """
        params = self.validated_section(name, schema)
        general = self.get_general_config()
        for key in schema.get('properties', {}):
            if key not in params and key in general:
                params[key] = general[key]
        params.setdefault('assertions', True)
        params.setdefault('dump', False)
        return params

    def save_config(self, config_path: str):
        """Save configuration to file"""
        os.makedirs(os.path.dirname(config_path) or '.', exist_ok=True)
        with open(config_path, 'w') as f:
            self.config.write(f)
        logger.info(f"Configuration saved to: {config_path}")
        return True

    def __repr__(self):
        return f"<Config(path='{self.config_path}', sections={list(self.config.sections())})>"


def _describe(error) -> str:
    where = '.'.join(str(p) for p in error.path)
    return f"{where}: {error.message}" if where else error.message


_BOOLEAN_STATES = configparser.ConfigParser.BOOLEAN_STATES


def _coerce_value(section: str, key: str, raw: str, schema: Dict[str, Any]) -> Any:
    kind = schema.get('type')
    text = raw.strip()
    try:
        if kind == 'integer':
            return int(text)
        if kind == 'number':
            return float(text)
        if kind == 'boolean':
            if text.lower() not in _BOOLEAN_STATES:
                raise ValueError(f"not a boolean: {text!r}")
            return _BOOLEAN_STATES[text.lower()]
        if kind == 'array':
            items = schema.get('items', {})
            return [_coerce_value(section, key, item, items) for item in text.split(',') if item.strip()]
    except ValueError as e:
        raise ConfigurationError(f"[{section}] {key} = {raw!r}: {e}")
    return text


def coerce_section(section: str, values: Dict[str, str], schema: Dict[str, Any]) -> Dict[str, Any]:
    """Convert INI strings to the JSON types the schema declares; unknown keys pass through"""
    properties = schema.get('properties', {})
    return {key: _coerce_value(section, key, raw, properties[key]) if key in properties else raw
            for key, raw in values.items()}
