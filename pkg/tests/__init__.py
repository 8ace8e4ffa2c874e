"""Test package for MVQC Scope."""
