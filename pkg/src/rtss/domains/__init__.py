from .base import Domain, StateKey
from . import airspace, oracles, racetrack, synthetic

__all__ = ["Domain", "StateKey", "airspace", "racetrack", "synthetic", "oracles"]
