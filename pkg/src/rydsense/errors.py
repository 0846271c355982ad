"""Exception hierarchy for the rydsense package.

Every domain failure raises a subclass of :class:`RydsenseError`; the CLI maps
them onto exit codes (config 2, physics domain 3, numerical failure 4).
"""


class RydsenseError(Exception):
    """Base class for all rydsense domain errors."""


# --- Stark-table ingestion -------------------------------------------------

class MalformedRow(RydsenseError):
    """A table line could not be parsed as three numeric fields."""


class NonMonotonicField(RydsenseError):
    """Electric-field column is not strictly increasing."""


class EmptyTable(RydsenseError):
    """Table has fewer than two data rows."""


class InvalidTable(RydsenseError):
    """Table violates a structural invariant (C3 sign, defect sign changes)."""


# --- Pair-state operations -------------------------------------------------

class OutOfRange(RydsenseError):
    """Requested field lies outside the tabulated span; no extrapolation."""


class NoResonance(RydsenseError):
    """Energy defect keeps a constant sign across the table."""


class NonpositiveSeparation(RydsenseError):
    """Pair separation must be > 0."""


class DegenerateDefect(RydsenseError):
    """|defect| below the degeneracy threshold; radius formulas diverge."""


class NonpositiveRabi(RydsenseError):
    """Rabi frequency must be > 0."""


# --- Geometry / field profiles ---------------------------------------------

class FieldOutOfTableRange(RydsenseError):
    """A field profile produced a value outside the table span."""


class CrossRowPair(RydsenseError):
    """Pair interactions across different rows are excluded by construction."""


# --- Dynamics ----------------------------------------------------------------

class BadLabel(RydsenseError):
    """Basis-state label does not match the register size or alphabet."""


class IntegratorFailure(RydsenseError):
    """Step-size underflow while chasing the norm tolerance."""


# --- Sensing -----------------------------------------------------------------

class AmbiguousEstimate(RydsenseError):
    """Two disjoint near-degenerate residual minima; rows cannot disambiguate."""


class NoProbeRows(RydsenseError):
    """Readout contains no probe rows to invert."""


class CurveCacheMismatch(RydsenseError):
    """Cached forward curves were generated for different inputs."""


# --- CLI ---------------------------------------------------------------------

class ConfigError(RydsenseError):
    """Run configuration failed validation."""
