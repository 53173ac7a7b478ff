"""Prioritized maximal scheduling on interference graphs."""
