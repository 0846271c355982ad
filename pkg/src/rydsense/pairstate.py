"""Pair-state coefficients and the field-dependent two-atom interaction.

The resonance physics enters through two tabulated functions of the electric
field E: the energy defect delta(E) between the doubly excited pair state and
the dipole-coupled pair state, and the resonant coupling strength C3(E).  In
the coupled two-level pair basis the interaction operator is

    [[delta, C3/R^3],
     [C3/R^3, 0    ]]

and the effective interaction is its lowest eigenvalue,

    V = (delta - sqrt(delta^2 + 4 C3^2 / R^6)) / 2.

Unit system: hbar = 1, lengths in um, times in us, energies as angular
frequencies in rad/us.  Table files store conventional h-unit MHz (and
MHz*um^3); the single 2*pi conversion happens in :func:`coefficients_at`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from io import IOBase
from pathlib import Path

import numpy as np

from .csvio import parse_comment_metadata, split_csv_text
from .errors import (
    DegenerateDefect,
    EmptyTable,
    InvalidTable,
    MalformedRow,
    NonMonotonicField,
    NonpositiveRabi,
    NonpositiveSeparation,
    NoResonance,
    OutOfRange,
)

TWO_PI = 2.0 * math.pi

STARK_TABLE_HEADER = "E_mVcm,delta_MHz,C3_MHz_um3"

# Degeneracy threshold for the radius formulas (rad/us).  Below this the
# radii exceed any physical array span; an explicit error beats a silent
# huge number.
EPS_DEFECT = 1e-6


@dataclass(frozen=True)
class StarkTable:
    """Field-dependent pair-state coefficients, as stored on disk (h-unit MHz).

    Attributes:
        e_field: electric field grid, mV/cm, strictly increasing.
        delta: energy defect on the grid, MHz (h units).
        c3: resonant coupling coefficient, MHz*um^3 (h units), > 0.
        meta: free-form key=value metadata from the file comments
            (pair-state labels, magnetic field, source).
    """

    e_field: np.ndarray
    delta: np.ndarray
    c3: np.ndarray
    meta: dict

    @property
    def span(self) -> tuple[float, float]:
        """Valid field range (min, max) in mV/cm."""
        return float(self.e_field[0]), float(self.e_field[-1])

    def __len__(self) -> int:
        return len(self.e_field)


@dataclass(frozen=True)
class PairCoefficients:
    """Pair-state coefficients at one field value, in angular units.

    Attributes:
        delta: energy defect, rad/us (signed).
        c3: coupling coefficient, rad/us * um^3, >= 0.
    """

    delta: float
    c3: float


def _read_source_text(source) -> str:
    if isinstance(source, (str, Path)):
        return Path(source).read_text(encoding="utf-8")
    if isinstance(source, (bytes, bytearray)):
        return source.decode("utf-8")
    data = source.read()
    if isinstance(data, bytes):
        return data.decode("utf-8")
    return data


def _count_sign_changes(values: np.ndarray) -> int:
    signs = np.sign(values)
    signs = signs[signs != 0]
    if len(signs) < 2:
        return 0
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def load_stark_table(source) -> StarkTable:
    """Parse and validate a Stark-coefficient CSV.

    `source` may be a path, raw bytes, or an open (byte or text) stream.
    The first non-comment line must be the exact header
    ``E_mVcm,delta_MHz,C3_MHz_um3``; metadata is taken from '#' comment
    lines with ``key=value`` syntax.

    Raises:
        MalformedRow: non-numeric field, wrong column count, or bad header.
        NonMonotonicField: field column not strictly increasing.
        EmptyTable: fewer than two data rows.
        InvalidTable: C3 <= 0 anywhere, or delta changes sign more than once.
    """
    text = _read_source_text(source)
    comments, lines = split_csv_text(text)
    meta = parse_comment_metadata(comments)

    if not lines:
        raise EmptyTable("no data rows found")
    if lines[0] != STARK_TABLE_HEADER:
        raise MalformedRow(
            f"expected header {STARK_TABLE_HEADER!r}, got {lines[0]!r}"
        )

    rows = []
    for i, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 3:
            raise MalformedRow(f"line {i}: expected 3 fields, got {len(parts)}")
        try:
            values = [float(p) for p in parts]
        except ValueError as exc:
            raise MalformedRow(f"line {i}: {exc}") from exc
        if not all(math.isfinite(v) for v in values):
            raise MalformedRow(f"line {i}: non-finite value")
        rows.append(values)

    if len(rows) < 2:
        raise EmptyTable(f"need at least 2 rows, got {len(rows)}")

    data = np.asarray(rows, dtype=np.float64)
    e_field, delta, c3 = data[:, 0], data[:, 1], data[:, 2]

    if not np.all(np.diff(e_field) > 0):
        raise NonMonotonicField("E column must be strictly increasing")
    if not np.all(c3 > 0):
        raise InvalidTable("C3 must be > 0 in every row")
    if _count_sign_changes(delta) > 1:
        raise InvalidTable("delta may change sign at most once")

    e_field.flags.writeable = False
    delta.flags.writeable = False
    c3.flags.writeable = False
    return StarkTable(e_field=e_field, delta=delta, c3=c3, meta=meta)


def coefficients_at(table: StarkTable, e_field: float) -> PairCoefficients:
    """Interpolate (delta, C3) at a field value and convert to angular units.

    Piecewise-linear in E, exact at grid nodes, multiplied by 2*pi exactly
    once.  Never extrapolates.

    Raises:
        OutOfRange: E outside the tabulated span.
    """
    lo, hi = table.span
    if not (lo <= e_field <= hi):
        raise OutOfRange(f"E = {e_field} mV/cm outside table span [{lo}, {hi}]")
    delta = float(np.interp(e_field, table.e_field, table.delta))
    c3 = float(np.interp(e_field, table.e_field, table.c3))
    return PairCoefficients(delta=TWO_PI * delta, c3=TWO_PI * c3)


def resonance_field(table: StarkTable) -> float:
    """Return the root of the piecewise-linear delta(E) interpolant, mV/cm.

    Raises:
        NoResonance: delta keeps a constant sign across the table.
    """
    delta = table.delta
    e = table.e_field
    zeros = np.nonzero(delta == 0.0)[0]
    if len(zeros):
        return float(e[zeros[0]])
    change = np.nonzero(np.sign(delta[1:]) != np.sign(delta[:-1]))[0]
    if not len(change):
        raise NoResonance("delta does not change sign over the table")
    i = int(change[0])
    # Linear root between nodes i and i+1.
    frac = delta[i] / (delta[i] - delta[i + 1])
    return float(e[i] + frac * (e[i + 1] - e[i]))


def effective_interaction(coeffs: PairCoefficients, separation: float) -> float:
    """Lowest eigenvalue of the coupled pair-state operator, rad/us.

    V = (delta - sqrt(delta^2 + 4 C3^2/R^6)) / 2; always <= min(0, delta),
    strictly negative whenever C3 > 0.

    Raises:
        NonpositiveSeparation: separation <= 0.
    """
    if separation <= 0:
        raise NonpositiveSeparation(f"separation must be > 0, got {separation}")
    coupling = coeffs.c3 / separation**3
    return 0.5 * (coeffs.delta - math.hypot(coeffs.delta, 2.0 * coupling))


def crossover_radius(coeffs: PairCoefficients) -> float:
    """Separation where the interaction changes between R^-3 and R^-6, um.

    R_c = (C3 / |delta|)^(1/3) in the hbar = 1 unit system.

    Raises:
        DegenerateDefect: |delta| <= EPS_DEFECT (radius diverges on resonance).
    """
    if coeffs.c3 <= 0:
        raise ValueError("C3 must be > 0 for the crossover radius")
    if abs(coeffs.delta) <= EPS_DEFECT:
        raise DegenerateDefect(
            f"|delta| = {abs(coeffs.delta)} rad/us below threshold {EPS_DEFECT}"
        )
    return (coeffs.c3 / abs(coeffs.delta)) ** (1.0 / 3.0)


def blockade_radius(coeffs: PairCoefficients, omega: float) -> float:
    """Separation where the interaction matches the drive scale, um.

    R_b = (C3^2 / (|delta| * Omega))^(1/6) with Omega in rad/us; the angular
    dependence of the coupling is taken as 1.

    Raises:
        DegenerateDefect: |delta| <= EPS_DEFECT.
        NonpositiveRabi: omega <= 0.
    """
    if omega <= 0:
        raise NonpositiveRabi(f"omega must be > 0, got {omega}")
    if coeffs.c3 <= 0:
        raise ValueError("C3 must be > 0 for the blockade radius")
    if abs(coeffs.delta) <= EPS_DEFECT:
        raise DegenerateDefect(
            f"|delta| = {abs(coeffs.delta)} rad/us below threshold {EPS_DEFECT}"
        )
    return (coeffs.c3**2 / (abs(coeffs.delta) * omega)) ** (1.0 / 6.0)
