"""Tests for run configuration, worker count and seed resolution."""

import os
import unittest
from unittest import mock

from wafom_nets.config import JOBS_ENV, RunConfig, resolve_jobs, resolve_seed


class TestRunConfig(unittest.TestCase):
    """Test cases for RunConfig serialisation."""

    def test_default_round_trip(self):
        """Test that defaults survive to_string and from_string."""
        config = RunConfig()
        self.assertEqual(RunConfig.from_string(config.to_string()), config)

    def test_custom_round_trip(self):
        """Test optional, list, float and bool fields."""
        config = RunConfig(command='search', l=8, M=3.0, s_list=(1, 4), seed=7,
                           weights='power:a=1,r=1', json_output=True, epsilon=0.001)
        text = config.to_string()
        self.assertIn("command=search", text.split(';'))
        self.assertIn("s_list=1,4", text.split(';'))
        self.assertIn("matrix=", text.split(';'))
        self.assertEqual(RunConfig.from_string(text), config)

    def test_keys_sorted(self):
        """Test the canonical key order."""
        keys = [item.partition('=')[0] for item in RunConfig().to_string().split(';')]
        self.assertEqual(keys, sorted(keys))

    def test_errors(self):
        """Test separators in values and malformed strings."""
        with self.assertRaises(ValueError):
            RunConfig(weights='explicit:1;2').to_string()
        with self.assertRaises(ValueError):
            RunConfig.from_string("colour=red")
        with self.assertRaises(ValueError):
            RunConfig.from_string("seed")
        with self.assertRaises(ValueError):
            RunConfig.from_string("json_output=yes")
        with self.assertRaises(ValueError):
            RunConfig.from_string("trials=many")

    def test_partial_string(self):
        """Test that missing keys keep their defaults."""
        config = RunConfig.from_string("trials=50;seed=")
        self.assertEqual(config.trials, 50)
        self.assertIsNone(config.seed)
        self.assertEqual(config.d_list, tuple(range(2, 9)))


class TestResolveJobs(unittest.TestCase):
    """Test cases for resolve_jobs."""

    def test_explicit(self):
        """Test that an explicit count wins over the environment."""
        with mock.patch.dict(os.environ, {JOBS_ENV: '5'}):
            self.assertEqual(resolve_jobs(3), 3)

    def test_environment(self):
        """Test the environment fallback and its validation."""
        with mock.patch.dict(os.environ, {JOBS_ENV: '5'}):
            self.assertEqual(resolve_jobs(), 5)
        with mock.patch.dict(os.environ, {JOBS_ENV: 'many'}):
            with self.assertRaises(ValueError):
                resolve_jobs()

    def test_cpu_count(self):
        """Test the core-count fallback."""
        with mock.patch.dict(os.environ, {}, clear=True):
            with mock.patch('os.cpu_count', return_value=6):
                self.assertEqual(resolve_jobs(), 6)
            with mock.patch('os.cpu_count', return_value=None):
                self.assertEqual(resolve_jobs(), 1)

    def test_non_positive(self):
        """Test that zero workers are refused."""
        with self.assertRaises(ValueError):
            resolve_jobs(0)


class TestResolveSeed(unittest.TestCase):
    """Test cases for resolve_seed."""

    def test_given(self):
        """Test a fixed seed."""
        self.assertEqual(resolve_seed(7), (7, False))
        with self.assertRaises(ValueError):
            resolve_seed(-1)

    def test_drawn(self):
        """Test a seed drawn from entropy."""
        seed, drawn = resolve_seed()
        self.assertTrue(drawn)
        self.assertGreaterEqual(seed, 0)
        self.assertLess(seed, 2 ** 63)


if __name__ == '__main__':
    unittest.main()
