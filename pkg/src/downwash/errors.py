"""Exception and warning types shared across the package."""

from __future__ import annotations


class DomainError(ValueError):
    """Input outside the domain where a formula is defined."""


class NearFieldRequest(DomainError):
    """A far-field evaluation was requested inside the near field.

    Attributes
    ----------
    s_norm : float
        The normalized downstream distance that was requested.
    threshold : float
        The far-field threshold in motor distances.
    """

    def __init__(self, s_norm: float, threshold: float):
        self.s_norm = float(s_norm)
        self.threshold = float(threshold)
        super().__init__(
            f"point at s/l = {self.s_norm:.4g} is inside the near field; the jet model "
            f"only holds for s/l >= {self.threshold:g} (pass clamp_near_field=True to "
            f"use the s/l = {self.threshold:g} slice instead)"
        )


class UnavailableError(LookupError):
    """An optional quantity needed for a diagnostic was not supplied."""


class FormatError(ValueError):
    """Malformed input file."""


class EmptyInputError(ValueError):
    """Input contained no usable data."""


class FitError(RuntimeError):
    """A least-squares fit failed.

    ``last_iterate`` holds the final parameter vector when the failure happened
    inside the solver, ``None`` otherwise.
    """

    def __init__(self, message: str, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class PlantError(RuntimeError):
    """The simulated plant could not resolve its thrust."""


class ConfigError(ValueError):
    """Invalid simulation or run configuration.

    ``field`` is the dotted path of the offending entry, when known.
    """

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class QualitativeOnlyWarning(UserWarning):
    """The model is applied to a vehicle it was not fitted for (canted propellers)."""
