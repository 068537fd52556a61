"""Exception types raised by the library."""
import numpy as np


class UnravelError(Exception):
    """Base class for all library errors."""


class NonHermitianInput(UnravelError):
    pass


class InvalidDimension(UnravelError):
    pass


class DimensionMismatch(UnravelError):
    pass


class UnnormalizedState(UnravelError):
    pass


class NonTracePreserving(UnravelError):
    pass


class NonHermiticityPreserving(UnravelError):
    pass


class NegativeRate(UnravelError):
    """Standard (non-GTRO) noise operators requested for a generator with a
    negative rate; the naive construction would unravel the wrong master
    equation."""


class DimensionCapExceeded(UnravelError):
    pass


class GridMismatch(UnravelError):
    pass


class AllTrajectoriesAborted(UnravelError):
    pass


class ConfigError(UnravelError):
    """Malformed run or generator configuration."""


class PositivityViolation(UnravelError):
    """The transition rate operator acquired an eigenvalue below the clamp
    threshold: the map over this step is not positive and the trajectory
    must stop.
    """

    def __init__(self, min_eigenvalue: float, psi: np.ndarray, time: float | None = None):
        self.min_eigenvalue = float(min_eigenvalue)
        self.psi = np.asarray(psi)
        self.time = time
        where = "" if time is None else f" at t={time:g}"
        super().__init__(
            f"transition rate operator has eigenvalue {min_eigenvalue:.6g} < 0{where}"
        )
