"""Time sharing combined with hierarchical 16-APSK modulation for
DVB-S2-style satellite broadcast systems.

Submodules:

- ``constellation``: uniform and hierarchical constellation geometry
- ``capacity``: decoding thresholds (table ingestion and MI estimation)
- ``rates``: achievable equal-rate allocations for pairs and populations
- ``pairing``: receiver grouping strategies by SNR difference
- ``channel``: geostationary spot-beam and weather attenuation model
- ``sim``: throughput-gain experiments
- ``cli``: command-line front end
"""

from . import capacity, channel, constellation, pairing, rates, sim
from .errors import (
    DegenerateRateError,
    ParameterError,
    SymbolOverlapError,
    TableError,
    UnreachableThresholdError,
)

__version__ = "0.1.0"

__all__ = [
    "capacity",
    "channel",
    "constellation",
    "pairing",
    "rates",
    "sim",
    "DegenerateRateError",
    "ParameterError",
    "SymbolOverlapError",
    "TableError",
    "UnreachableThresholdError",
]
