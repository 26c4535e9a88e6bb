"""Trainable analogue block networks with sign-based online learning."""

from ._core import *  # noqa: F401,F403
from ._core import (
    ConfigError,
    InputError,
    IoError,
    NumericError,
    TabsolError,
)

__all__ = [name for name in dir() if not name.startswith("_")]
