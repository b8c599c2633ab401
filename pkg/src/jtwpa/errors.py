"""Exception hierarchy shared by the physics modules and the CLI."""


class JtwpaError(Exception):
    """Base class for physics-domain failures (CLI exit code 3)."""


class OnResonanceError(JtwpaError):
    """Frequency sits on a pole of a shunt branch admittance."""

    def __init__(self, omega, pole):
        self.omega = omega
        self.pole = pole
        super().__init__(
            f"omega={omega:.12g} rad/s is on the dressed resonance {pole:.12g} rad/s"
        )


class BandgapError(JtwpaError):
    """A requested frequency has no traveling-wave solution."""

    def __init__(self, omega, interval=None):
        self.omega = omega
        self.interval = interval
        where = "" if interval is None else f" (gap [{interval[0]:.12g}, {interval[1]:.12g}] rad/s)"
        super().__init__(f"omega={omega:.12g} rad/s lies in a bandgap{where}")


class UntunableError(JtwpaError):
    """No sign change of the phase mismatch over the requested bracket."""


class RegimeError(JtwpaError):
    """An analytic formula was requested outside its validity regime."""


class PhysicalityError(JtwpaError):
    """Bath moments violate |M|^2 <= N(N+1) (or similar positivity bounds)."""


class MultiplicityError(JtwpaError):
    """The Liouvillian kernel is not one-dimensional."""

    def __init__(self, dimension):
        self.dimension = dimension
        super().__init__(f"steady state is not unique: kernel dimension {dimension}")


class StabilityError(JtwpaError):
    """Drift matrix is not Hurwitz, so no Gaussian steady state exists."""


class PurityError(JtwpaError):
    """A pure state was required but a mixed one was supplied."""


class GraphError(JtwpaError):
    """Graph or macronode layout is inconsistent with the requested construction."""


class ConfigError(Exception):
    """Configuration failed schema or semantic validation (CLI exit code 2)."""

    def __init__(self, message, pointer=""):
        self.pointer = pointer
        super().__init__(f"{pointer or '/'}: {message}")
