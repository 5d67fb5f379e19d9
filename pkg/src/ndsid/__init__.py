"""Causal graph recovery for linear networked dynamics under colored noise."""
__version__ = "0.1.0"
