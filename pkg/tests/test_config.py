#!/usr/bin/env python3
"""
Configuration Test Suite
========================
Defaults, JSON file loading and environment overrides.
"""

import json
import logging
import os
import sys
import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

# Add src directory to path
sys.path.append(os.path.join(os.path.dirname(__file__), '..', 'src'))

from cwcodes.config import WorkbenchConfig, configure_logging, load_config
from cwcodes.errors import ConfigurationError, exit_code_for


def write_json(tmp: str, data) -> str:
    path = Path(tmp) / "workbench.json"
    path.write_text(json.dumps(data))
    return str(path)


class TestWorkbenchConfig(unittest.TestCase):
    """Test configuration management"""

    def test_default_config_creation(self):
        """Test default configuration values"""
        with patch.dict(os.environ, {}, clear=True):
            config = WorkbenchConfig()
        self.assertEqual(config.DEFAULT_SEED, 0)
        self.assertEqual(config.DEFAULT_BUDGET, 1_000_000)
        self.assertEqual(config.WORKERS, 1)
        self.assertEqual(config.TABLE_N_RANGE, [3, 25])
        self.assertEqual(config.LOG_LEVEL, "INFO")

    def test_environment_variable_override(self):
        """Test environment variable overrides"""
        with patch.dict(os.environ, {'CWCODES_SEED': '42', 'CWCODES_BUDGET': '500',
                                     'CWCODES_WORKERS': '3', 'CWCODES_LOG_LEVEL': 'debug'}):
            config = WorkbenchConfig()
        self.assertEqual(config.DEFAULT_SEED, 42)
        self.assertEqual(config.DEFAULT_BUDGET, 500)
        self.assertEqual(config.WORKERS, 3)
        self.assertEqual(config.LOG_LEVEL, "debug")

    def test_json_file(self):
        """Test loading a config file and ignoring unknown sections"""
        with tempfile.TemporaryDirectory() as tmp:
            path = write_json(tmp, {"version": "1.0.0", "search": {"budget": 77, "stall_limit": 5},
                                    "extras": {"x": 1}})
            with patch.dict(os.environ, {'CWCODES_CONFIG': path}):
                with self.assertLogs('cwcodes.config', level='WARNING') as logs:
                    config = WorkbenchConfig()
        self.assertEqual(config.DEFAULT_BUDGET, 77)
        self.assertEqual(config.STALL_LIMIT, 5)
        self.assertTrue(any("extras" in line for line in logs.output))

    def test_missing_explicit_file(self):
        """Test that a named config file must exist"""
        with patch.dict(os.environ, {'CWCODES_CONFIG': '/nonexistent/workbench.json'}):
            with self.assertRaises(ConfigurationError) as ctx:
                WorkbenchConfig()
        self.assertEqual(exit_code_for(ctx.exception), 2)

    def test_invalid_values(self):
        """Test validation of overrides"""
        for env in ({'CWCODES_SEED': 'abc'}, {'CWCODES_WORKERS': '0'},
                    {'CWCODES_SEED': '-3'}, {'CWCODES_LOG_LEVEL': 'LOUD'}):
            with patch.dict(os.environ, env):
                with self.assertRaises(ConfigurationError):
                    WorkbenchConfig()

    def test_invalid_table_range(self):
        """Test that ranges must be [low, high]"""
        with tempfile.TemporaryDirectory() as tmp:
            path = write_json(tmp, {"table": {"n_range": [9, 4]}})
            with self.assertRaises(ConfigurationError):
                WorkbenchConfig(CONFIG_PATH=path)

    def test_load_config_cached(self):
        """Test that the process-wide configuration is shared"""
        self.assertIs(load_config(), load_config())
        self.assertIn("DEFAULT_BUDGET", load_config().to_dict())


class TestLogging(unittest.TestCase):
    """Test logging setup"""

    def test_unknown_level(self):
        """Test that an unknown level is rejected"""
        with self.assertRaises(ConfigurationError):
            configure_logging("chatty")

    def test_known_level(self):
        """Test that a lower-case level name is accepted"""
        configure_logging("warning")
        self.assertTrue(logging.getLogger().handlers)


if __name__ == "__main__":
    unittest.main()
