"""Delegation games of liquid democracy: equilibria, dynamics and hardness gadgets."""

__version__ = "0.1.0"
