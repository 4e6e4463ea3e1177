"""Time-changed Markov process samplers (Zig-Zag, BPS, Langevin, jump processes)."""

from ._core import *  # noqa: F401,F403
from ._core import __version__, ConfigError, SamplerError  # noqa: F401
