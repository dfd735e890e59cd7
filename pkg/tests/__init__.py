"""Tests for rauzy-lab."""
