from __future__ import annotations


class PhasonStabError(Exception):
    """Base class for errors raised by this package."""


class ConvergenceError(PhasonStabError, ArithmeticError):
    """An eigen- or singular-value computation failed or returned garbage."""


class SaturationError(PhasonStabError, OverflowError):
    """Propagator overflowed; the trajectory left the float64 range."""


class SingularConfigurationError(PhasonStabError, ZeroDivisionError):
    """A constitutive denominator vanished, so the evolution matrix is undefined."""


class InadmissibleParametersError(PhasonStabError, ValueError):
    """Parameter point violates free-energy positivity and no override was given."""

    def __init__(self, violations, value=None):
        self.violations = list(violations)
        self.value = value
        names = ", ".join(v.name for v in self.violations)
        where = f" at {value!r}" if value is not None else ""
        super().__init__(f"energy positivity violated{where}: {names}")


class BracketError(PhasonStabError, ValueError):
    """Threshold bracket does not straddle a change of the stability indicator."""


class ConfigError(PhasonStabError, ValueError):
    """Run configuration is malformed, lacks units, or names unknown keys."""
