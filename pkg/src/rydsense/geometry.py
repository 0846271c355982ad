"""Tweezer-array geometry and spatial electric-field profiles.

The network is a stack of independent horizontal rows.  Within a row the
atoms sit on multiples of the row spacing, which itself must be an integer
multiple of the fundamental tweezer pitch.  Rows are kept far enough apart
(gap >= 5x the largest intra-row spacing) that cross-row interactions can be
excluded structurally rather than approximated away.

Field profiles map an atom (1-based index within its row, or its position)
to a field strength in mV/cm.  Pair interactions under inhomogeneous fields
are evaluated at the geometric midpoint of the two atoms; see
:func:`pair_field`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import CrossRowPair, FieldOutOfTableRange

DEFAULT_PITCH_UM = 5.0

# Cross-row decoupling condition: gap must exceed this multiple of the
# largest intra-row spacing.
MIN_ROW_GAP_FACTOR = 5.0


@dataclass(frozen=True)
class RowSpec:
    """One row of regularly spaced atoms.

    Attributes:
        n_atoms: number of trapped atoms, >= 1.
        spacing: atom separation in um; an integer multiple of the pitch.
        y_offset: vertical position of the row, um.
    """

    n_atoms: int
    spacing: float
    y_offset: float = 0.0

    def __post_init__(self):
        if self.n_atoms < 1:
            raise ValueError(f"n_atoms must be >= 1, got {self.n_atoms}")
        if self.spacing <= 0:
            raise ValueError(f"spacing must be > 0, got {self.spacing}")

    def x_positions(self) -> np.ndarray:
        """Atom x coordinates (um), atom i at (i-1)*spacing."""
        return self.spacing * np.arange(self.n_atoms, dtype=np.float64)


@dataclass(frozen=True)
class ArrayGeometry:
    """A 2D tweezer network: fundamental pitch plus a stack of rows."""

    pitch_x: float
    rows: tuple[RowSpec, ...]

    def __post_init__(self):
        if self.pitch_x <= 0:
            raise ValueError(f"pitch_x must be > 0, got {self.pitch_x}")
        object.__setattr__(self, "rows", tuple(self.rows))
        if not self.rows:
            raise ValueError("geometry needs at least one row")
        for row in self.rows:
            ratio = row.spacing / self.pitch_x
            if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
                raise ValueError(
                    f"row spacing {row.spacing} um is not an integer multiple "
                    f"of the pitch {self.pitch_x} um"
                )
        offsets = [row.y_offset for row in self.rows]
        if any(b <= a for a, b in zip(offsets, offsets[1:])):
            raise ValueError("row y offsets must be strictly increasing")
        if len(self.rows) > 1:
            max_spacing = max(row.spacing for row in self.rows)
            min_gap = min(b - a for a, b in zip(offsets, offsets[1:]))
            if min_gap < MIN_ROW_GAP_FACTOR * max_spacing:
                raise ValueError(
                    f"inter-row gap {min_gap} um violates the decoupling "
                    f"condition (>= {MIN_ROW_GAP_FACTOR} x largest spacing "
                    f"{max_spacing} um)"
                )


def atom_positions(geometry: ArrayGeometry) -> list[tuple[int, float, float]]:
    """All atom positions as (row index, x, y) in row-major, ascending-x order."""
    out = []
    for r, row in enumerate(geometry.rows):
        for x in row.x_positions():
            out.append((r, float(x), row.y_offset))
    return out


# --- Field profiles ----------------------------------------------------------


@dataclass(frozen=True)
class UniformField:
    """Constant field E0 (mV/cm) across the row."""

    e0: float


@dataclass(frozen=True)
class GradientField:
    """Linear ramp from e_start at the first atom to e_end at the last."""

    e_start: float
    e_end: float


@dataclass(frozen=True)
class SinusoidField:
    """Sinusoidal modulation in atom-index units.

    value(i) = offset + amplitude * sin(2*pi*(i - phase)/period)
    """

    offset: float
    amplitude: float
    period: float
    phase: float = 0.0


@dataclass(frozen=True)
class GaussianField:
    """Gaussian bump in position, mimicking the light shift of a beam.

    value(x) = baseline + (peak - baseline) * exp(-(x - center)^2 / (2 w^2))
    """

    baseline: float
    peak: float
    center_um: float
    width_um: float


@dataclass(frozen=True)
class TabulatedField:
    """Explicit per-atom values; linear in index between atoms."""

    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))


FieldProfile = Union[
    UniformField, GradientField, SinusoidField, GaussianField, TabulatedField
]


def _check_span(value: float, span: Optional[tuple[float, float]]) -> float:
    if span is not None and not (span[0] <= value <= span[1]):
        raise FieldOutOfTableRange(
            f"profile value {value} mV/cm outside table span {span}"
        )
    return value


def _evaluate(profile: FieldProfile, index: float, x: float, row: RowSpec) -> float:
    """Evaluate a profile at a (possibly fractional) atom index / position."""
    if isinstance(profile, UniformField):
        return profile.e0
    if isinstance(profile, GradientField):
        if row.n_atoms == 1:
            return profile.e_start
        frac = (index - 1.0) / (row.n_atoms - 1.0)
        return profile.e_start + (profile.e_end - profile.e_start) * frac
    if isinstance(profile, SinusoidField):
        arg = 2.0 * math.pi * (index - profile.phase) / profile.period
        return profile.offset + profile.amplitude * math.sin(arg)
    if isinstance(profile, GaussianField):
        u = (x - profile.center_um) / profile.width_um
        return profile.baseline + (profile.peak - profile.baseline) * math.exp(
            -0.5 * u * u
        )
    if isinstance(profile, TabulatedField):
        if len(profile.values) != row.n_atoms:
            raise ValueError(
                f"tabulated profile has {len(profile.values)} values for a "
                f"row of {row.n_atoms} atoms"
            )
        grid = np.arange(1, row.n_atoms + 1, dtype=np.float64)
        return float(np.interp(index, grid, np.asarray(profile.values)))
    raise TypeError(f"unknown field profile {type(profile).__name__}")


def field_at(
    profile: FieldProfile,
    row: RowSpec,
    index: int,
    span: Optional[tuple[float, float]] = None,
) -> float:
    """Field at atom `index` (1-based within the row), mV/cm.

    Raises:
        FieldOutOfTableRange: when `span` is given and the value leaves it.
    """
    if not (1 <= index <= row.n_atoms):
        raise ValueError(f"atom index {index} outside 1..{row.n_atoms}")
    x = (index - 1) * row.spacing
    return _check_span(_evaluate(profile, float(index), x, row), span)


def row_fields(
    profile: FieldProfile,
    row: RowSpec,
    span: Optional[tuple[float, float]] = None,
) -> np.ndarray:
    """Field at every atom of the row, mV/cm."""
    return np.array(
        [field_at(profile, row, i, span) for i in range(1, row.n_atoms + 1)]
    )


def midpoint_field(
    profile: FieldProfile,
    row: RowSpec,
    i: int,
    j: int,
    span: Optional[tuple[float, float]] = None,
) -> float:
    """Field at the geometric midpoint of atoms i and j of one row.

    The pair-state defect depends on both atoms' level shifts; for slowly
    varying profiles the midpoint is the symmetric first-order choice.
    """
    if i == j:
        raise ValueError("pair requires two distinct atoms")
    for k in (i, j):
        if not (1 <= k <= row.n_atoms):
            raise ValueError(f"atom index {k} outside 1..{row.n_atoms}")
    mid_index = 0.5 * (i + j)
    mid_x = (mid_index - 1.0) * row.spacing
    return _check_span(_evaluate(profile, mid_index, mid_x, row), span)


def pair_field(
    profile: FieldProfile,
    geometry: ArrayGeometry,
    atom_a: tuple[int, int],
    atom_b: tuple[int, int],
    span: Optional[tuple[float, float]] = None,
) -> float:
    """Midpoint field for a pair addressed as (row index, 1-based atom index).

    Raises:
        CrossRowPair: the atoms belong to different rows.
    """
    row_a, i = atom_a
    row_b, j = atom_b
    if row_a != row_b:
        raise CrossRowPair(
            f"atoms in rows {row_a} and {row_b}: cross-row pairs are excluded"
        )
    return midpoint_field(profile, geometry.rows[row_a], i, j, span)


def fig_profile_sinusoid(e_res: float, n_atoms: int = 19) -> SinusoidField:
    """Sinusoid with resonant peaks at atoms 5 and 15 of a 19-atom row."""
    del n_atoms  # peaks are fixed by period/phase, independent of row length
    return SinusoidField(offset=0.6 * e_res, amplitude=0.4 * e_res, period=10.0, phase=2.5)


def fig_profile_gradient(e_res: float) -> GradientField:
    """Ramp from 2*E_res down to zero; hits E_res at the row center."""
    return GradientField(e_start=2.0 * e_res, e_end=0.0)


def fig_profile_gaussian(e_res: float, row: RowSpec) -> GaussianField:
    """Gaussian light-shift bump peaking at E_res over the row center."""
    center = 0.5 * (row.n_atoms - 1) * row.spacing
    return GaussianField(
        baseline=0.0, peak=e_res, center_um=center, width_um=2.0 * row.spacing
    )
