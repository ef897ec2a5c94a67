"""Exception hierarchy shared across the package.

Two branches matter to callers: :class:`InputError` covers everything a
user can fix by changing inputs (files, model parameters, method choice),
:class:`NumericalError` covers pathologies detected during computation.
The CLI maps them to exit codes 1 and 2 respectively.
"""


class GridNoiseError(Exception):
    """Base class for all package errors."""


class InputError(GridNoiseError):
    """Invalid input data or an input/method combination that cannot work."""


class NumericalError(GridNoiseError):
    """A numerical pathology detected while computing."""


class NetworkFormatError(InputError):
    """Malformed or inconsistent edge-list / parameter text."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NonUniformRatio(InputError):
    """Damping-to-inertia ratios differ across nodes.

    The closed-form evaluator requires a uniform ratio; the Gramian oracle
    does not. ``spread`` holds the observed relative spread.
    """

    def __init__(self, spread):
        super().__init__(
            f"damping/inertia ratio varies across nodes (relative spread {spread:.3e}); "
            "use the Gramian oracle for non-uniform ratios"
        )
        self.spread = spread


class FinitenessViolated(InputError):
    """The phase-weight matrix observes the uniform phase-shift mode.

    The time-integrated measure diverges unless the all-ones direction lies
    in the kernel of the phase block.
    """


class DegenerateDenominator(NumericalError):
    """Kernel denominator vanished (both eigenvalues at the zero mode)."""


class NotHurwitz(NumericalError):
    """Regularized system matrix unexpectedly has a non-decaying mode."""


class SingularSystem(NumericalError):
    """System matrix has an eigenvalue with non-negative real part."""


class EigenvalueCollision(NumericalError):
    """mu_l + mu_q ~ 0 makes the spectral Gramian sum meaningless."""


class NotDiagonalizable(NumericalError):
    """Eigenvector matrix too ill-conditioned to invert."""


class CriticalDamping(NumericalError):
    """Gamma ~ 0 for some mode; the explicit transformation is singular."""


class FilterResonance(NumericalError):
    """-1/tau collides with a swing mode; transformation denominators vanish."""


class UnstableIntegration(NumericalError):
    """Simulated state exceeded the overflow guard."""
