"""
Configuration management for dcaport.

Handles loading and validation of configuration from YAML files
and environment variables.
"""

import copy
import math
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml

from dcaport.utils.exceptions import ConfigurationError
from dcaport.utils.logger import get_logger

logger = get_logger()


class Config:
    """
    Configuration manager for dcaport.

    Loads configuration from YAML files and environment variables,
    with validation and default values.
    """

    DEFAULT_CONFIG: Dict[str, Any] = {
        'solver': {
            'theta': 2.0,
            'epsilon': 1e-6,
            'max_iter': 200,
            'theta_escalation': True,
            'escalation_factor': 5.0,
            'theta_cap': 1e6,
            'binariness_tol': 1e-6,
            'zero_threshold': 1e-9
        },
        'qp': {
            'tol': 1e-8,
            'max_iter': 50000,
            'warm_start': True,
            'rho': 0.1,
            'sigma': 1e-6,
            'alpha': 1.6,
            'scaling_iter': 10,
            'check_interval': 25,
            'adaptive_rho': True,
            'polish': True,
            'infeasibility_tol': 1e-8,
            'phase_one_iter': 500
        },
        'instance': {
            'a': 0.05,
            'b': 1.0,
            'c_b': 0.001,
            'c_s': 0.001,
            'r_rule_fraction': 0.5,
            'card_mode': 'eq'
        },
        'exact': {
            'max_nodes': 1000000,
            'time_limit': 1200.0,  # seconds
            'gap_tol': 1e-9,
            'enumerate_limit': 100000
        },
        'benchmark': {
            'card_min': 5,
            'card_max': 15,
            'n_jobs': 1,
            'run_exact': True
        },
        'output': {
            'format': 'text',
            'precision': 6
        },
        'logging': {
            'level': 'INFO',
            'file': None,
            'console': True
        }
    }

    # (section, key, low, high, inclusive low, inclusive high)
    NUMERIC_RANGES = (
        ('solver', 'theta', 0.0, math.inf, False, False),
        ('solver', 'epsilon', 0.0, math.inf, False, False),
        ('solver', 'max_iter', 1, math.inf, True, False),
        ('solver', 'escalation_factor', 1.0, math.inf, False, False),
        ('qp', 'tol', 0.0, math.inf, False, False),
        ('qp', 'rho', 0.0, math.inf, False, False),
        ('qp', 'alpha', 0.0, 2.0, False, False),
        ('instance', 'r_rule_fraction', 0.0, 1.0, True, True),
        ('exact', 'gap_tol', 0.0, math.inf, True, False),
    )

    def __init__(self, config_path: Optional[Union[str, Path]] = None):
        """
        Initialize configuration.

        Args:
            config_path: Optional path to YAML configuration file
        """
        self.config = self._load_config(config_path)

    def _load_config(
        self, config_path: Optional[Union[str, Path]]
    ) -> Dict[str, Any]:
        """
        Load configuration from file and environment.

        Args:
            config_path: Path to configuration file

        Returns:
            Dict[str, Any]: Merged configuration

        Raises:
            ConfigurationError: If configuration is invalid
        """
        config = copy.deepcopy(self.DEFAULT_CONFIG)

        if config_path:
            path = Path(config_path)
            if not path.exists():
                raise ConfigurationError(
                    f"Configuration file not found: {path}"
                )
            try:
                with open(path, 'r') as f:
                    file_config = yaml.safe_load(f)
            except yaml.YAMLError as e:
                raise ConfigurationError(
                    f"Invalid YAML in configuration file: {str(e)}"
                )
            except OSError as e:
                raise ConfigurationError(
                    f"Error loading configuration: {str(e)}"
                )

            if file_config:
                if not isinstance(file_config, dict):
                    raise ConfigurationError(
                        f"Configuration root must be a mapping: {path}"
                    )
                config = self._merge_configs(config, file_config)
                logger.info(f"Loaded configuration from {path}")

        config = self._apply_env_overrides(config)
        self._validate(config)
        return config

    def _merge_configs(self, base: Dict, override: Dict) -> Dict:
        """
        Recursively merge two configuration dictionaries.

        Args:
            base: Base configuration
            override: Override configuration

        Returns:
            Dict: Merged configuration
        """
        result = base.copy()
        for key, value in override.items():
            if (key in result and isinstance(result[key], dict) and
                    isinstance(value, dict)):
                result[key] = self._merge_configs(result[key], value)
            else:
                result[key] = value
        return result

    def _apply_env_overrides(self, config: Dict) -> Dict:
        """
        Apply environment variable overrides.

        Args:
            config: Configuration dictionary

        Returns:
            Dict: Configuration with environment overrides
        """
        # Example: DCAPORT_LOGGING_LEVEL=DEBUG
        env_prefix = 'DCAPORT_'

        if env_level := os.getenv(f'{env_prefix}LOGGING_LEVEL'):
            config['logging']['level'] = env_level

        if env_format := os.getenv(f'{env_prefix}OUTPUT_FORMAT'):
            config['output']['format'] = env_format

        if env_workers := os.getenv(f'{env_prefix}WORKERS'):
            try:
                config['benchmark']['n_jobs'] = int(env_workers)
            except ValueError:
                logger.warning(
                    f"Invalid DCAPORT_WORKERS value: {env_workers}"
                )

        return config

    def _validate(self, config: Dict) -> None:
        """
        Check solver settings before anything runs with them.

        Raises:
            ConfigurationError: On an out-of-range or non-numeric value
        """
        for section, key, low, high, low_ok, high_ok in self.NUMERIC_RANGES:
            value = (config.get(section) or {}).get(key)
            name = f"{section}.{key}"
            if isinstance(value, bool) or \
                    not isinstance(value, (int, float)):
                raise ConfigurationError(
                    f"{name} must be a number, got {value!r}"
                )
            above = value >= low if low_ok else value > low
            below = value <= high if high_ok else value < high
            if not (above and below):
                raise ConfigurationError(f"{name} out of range: {value}")

        card_mode = (config.get('instance') or {}).get('card_mode')
        if card_mode not in ('eq', 'le'):
            raise ConfigurationError(
                f"instance.card_mode must be eq or le, got {card_mode!r}"
            )
        bench = config.get('benchmark') or {}
        if bench.get('card_min', 1) > bench.get('card_max', 1):
            raise ConfigurationError(
                f"benchmark.card_min {bench['card_min']} exceeds "
                f"card_max {bench['card_max']}"
            )

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get a configuration value by key.

        Args:
            key: Configuration key (dot notation supported)
            default: Default value if key not found

        Returns:
            Any: Configuration value
        """
        value: Any = self.config
        for k in key.split('.'):
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default
        return value

    def set(self, key: str, value: Any) -> None:
        """
        Set a configuration value by dotted key.

        Args:
            key: Configuration key (dot notation supported)
            value: New value
        """
        keys = key.split('.')
        node = self.config
        for k in keys[:-1]:
            node = node.setdefault(k, {})
        node[keys[-1]] = value

    def __getitem__(self, key: str) -> Any:
        """
        Get configuration value using dictionary syntax.

        Args:
            key: Configuration key

        Returns:
            Any: Configuration value
        """
        return self.config[key]
