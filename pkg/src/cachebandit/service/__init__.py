"""HTTP service wrapping the simulator: solve, simulate, validate, presets."""

from .app import create_app

__all__ = ["create_app"]
