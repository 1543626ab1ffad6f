"""Exception hierarchy shared by all geopump modules."""


class GeoPumpError(Exception):
    """Base class for library errors."""


class ValidationError(GeoPumpError, ValueError):
    """An input violates a documented precondition."""


class NumericalError(GeoPumpError, ArithmeticError):
    """A numerical routine failed or produced an inconsistent result."""


class GapError(NumericalError):
    """The spectral gap protecting the dark subspace closed.

    Attributes
    ----------
    phi : tuple of float
        Torus point at which the gap fell below the floor.
    omega : float
        Coupling norm found there.
    """

    def __init__(self, phi, omega, floor, where=""):
        self.phi = tuple(float(x) for x in phi)
        self.omega = float(omega)
        self.floor = float(floor)
        loc = f" {where}" if where else ""
        coords = ", ".join(f"{x:.6f}" for x in self.phi)
        super().__init__(
            f"gap closed{loc} at phi=({coords}): Omega={self.omega:.3e} < gap_floor={self.floor:.1e}"
        )
