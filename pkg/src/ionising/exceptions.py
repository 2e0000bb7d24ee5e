"""Exception types for physically meaningful failure modes."""


class IonisingError(Exception):
    """Base class for all errors raised by this package."""


class ConvergenceError(IonisingError):
    """An iterative solver failed to reach its tolerance."""


class StabilityError(IonisingError):
    """The linear chain is transversely unstable (zigzag) for the given trap."""


class ResonanceError(IonisingError):
    """A beatnote detuning coincides with a motional mode frequency."""


class ScheduleCollisionError(IonisingError):
    """A detuning falls inside the guard band of an unpaired mode."""
