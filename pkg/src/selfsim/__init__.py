"""Contracting self-similar inverse semigroups acting on shifts of finite type."""

__version__ = "0.1.0"
