"""Exception types shared across the toolkit."""


class PulseControlError(Exception):
    """Base class for all toolkit errors."""


class DegenerateControl(PulseControlError):
    """f'(u*) = 0: the (alpha, beta) reduction is invalid."""


class PoleAtInput(PulseControlError):
    """Spectral function evaluated exactly at one of its poles."""

    def __init__(self, pole):
        self.pole = pole
        super().__init__(f"input coincides with pole at {pole}")


class EssentialRay(PulseControlError):
    """Continuum integral evaluated on its branch cut (-inf, -1]."""


class QuadratureFailure(PulseControlError):
    """Requested quadrature tolerance could not be reached."""

    def __init__(self, achieved):
        self.achieved = achieved
        super().__init__(f"quadrature stalled at error {achieved:.3e}")


class BranchCut(PulseControlError):
    """Principal square root evaluated on its branch cut."""


class UnstableEssential(PulseControlError):
    """Control slope >= 1: the essential spectrum is unstable."""


class RootIsolationFailure(PulseControlError):
    """Winding counts stayed inconsistent after maximal subdivision."""


class NearEigenvalue(PulseControlError):
    """Resolvent system nearly singular: shift too close to an eigenvalue."""


class OutOfContinuum(PulseControlError):
    """Continuous-spectrum parameter outside (-inf, -1)."""


class NotControllable(PulseControlError):
    """Gain search requested for a parameter point that no gain stabilizes."""


class FloorInsufficient(PulseControlError):
    """Gain floor does not stabilize; caller should deepen it."""


class NumericalBlowup(PulseControlError):
    """Non-finite values encountered during time integration."""

    def __init__(self, time=None):
        self.time = time
        super().__init__(f"non-finite state at t={time}")
