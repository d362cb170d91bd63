"""Confocal-cavity spin networks: couplings, relaxation, ensemble dynamics and the memory codec."""

from ._core import *  # noqa: F401,F403
from ._core import __version__, GlassmemError, ConfigError, ParameterError, CapacityError, CodecError  # noqa: F401
