"""Private release of critical-infrastructure network data."""

from .errors import CinError, InputError, ParameterError, TopologyError
from .network import CinDescription, PrivacyParams, check_adjacency, diameter, hop_distance

__version__ = "0.1.0"
