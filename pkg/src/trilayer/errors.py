"""Semantic exception hierarchy shared by all trilayer modules."""

from __future__ import annotations


class TrilayerError(Exception):
    """Base class for all errors raised by this package."""


# --- configuration / model errors -------------------------------------------

class NonFinite(TrilayerError):
    """A configuration field is NaN or infinite."""


class AssumptionViolated(TrilayerError):
    """One or more model assumptions failed; carries (name, detail) pairs."""

    def __init__(self, violations):
        # accept a single (name, detail) pair or a list of them
        if violations and isinstance(violations[0], str):
            violations = [tuple(violations)]
        self.violations = [tuple(v) for v in violations]
        names = "; ".join(name for name, _ in self.violations)
        super().__init__(names)


class NegativeConcentration(TrilayerError):
    """A rate function was evaluated at a negative concentration."""


# --- radial integration errors ----------------------------------------------

class IntegrationError(TrilayerError):
    """Base class for radial/time integration failures."""


class CapExceeded(IntegrationError):
    """The hard cap radius was reached before the target value."""


class NonMonotoneTarget(IntegrationError):
    """A value-stop target at or below the starting value."""


class OutOfRange(IntegrationError):
    """Evaluation point outside the solved arc."""


# --- interface / shooting-map errors ------------------------------------------

class BelowEtaStar(TrilayerError):
    """Inner-interface inversion requested below the critical core radius."""


class NonPositiveEta(TrilayerError):
    """Interface flux requested at a negative interface radius."""


class SigmaBelowQuiescent(TrilayerError):
    """Operation requires external supply above the quiescent threshold."""


class BelowCriticalRadius(TrilayerError):
    """Interface inversion requested below the minimal admissible radius."""


class BracketNotFound(TrilayerError):
    """Geometric bracket expansion failed to enclose a sign change."""


# --- evolution errors ----------------------------------------------------------

class NonPositiveInputs(TrilayerError):
    """Evolution called with a non-positive radius, horizon or sample step."""
