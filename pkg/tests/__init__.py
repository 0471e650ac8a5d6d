"""Tests for the metric group toolkit."""
