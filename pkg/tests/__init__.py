"""Test suite for wafom-nets."""
