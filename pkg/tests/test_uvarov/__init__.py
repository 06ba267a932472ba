"""Tests for Uvarov perturbations."""
