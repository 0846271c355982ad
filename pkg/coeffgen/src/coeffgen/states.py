"""Generation request: which pair system, field range, output grid."""

from __future__ import annotations

from dataclasses import dataclass, field

from .atoms import RydbergLevel, parse_level
from .model import TARGET_LEVELS


class UnsupportedStates(ValueError):
    """The calibrated model only covers its target pair system."""


@dataclass(frozen=True)
class StateSpec:
    """Species, the three Rydberg levels, magnetic field and E grid."""

    species: str = "Rb87"
    doubly: RydbergLevel = field(default_factory=lambda: TARGET_LEVELS[0])
    partner_a: RydbergLevel = field(default_factory=lambda: TARGET_LEVELS[1])
    partner_b: RydbergLevel = field(default_factory=lambda: TARGET_LEVELS[2])
    b_field_gauss: float = 0.0
    e_start: float = 0.0
    e_stop: float = 60.0
    e_step: float = 0.1

    def __post_init__(self):
        if self.e_step <= 0:
            raise ValueError(f"E step must be > 0, got {self.e_step}")
        if self.e_stop <= self.e_start:
            raise ValueError("E range must be non-empty")

    def validate_supported(self) -> None:
        """The calibration covers one pair system at B = 0 only."""
        if self.species.lower() not in ("rb87", "rb", "rubidium87"):
            raise UnsupportedStates(f"unsupported species {self.species!r}")
        if (self.doubly, self.partner_a, self.partner_b) != TARGET_LEVELS:
            labels = [self.doubly.label, self.partner_a.label, self.partner_b.label]
            raise UnsupportedStates(
                f"calibrated model covers {[l.label for l in TARGET_LEVELS]}, "
                f"got {labels}"
            )
        if self.b_field_gauss != 0.0:
            raise UnsupportedStates("calibration holds at zero magnetic field only")


def spec_from_labels(
    doubly: str,
    partner_a: str,
    partner_b: str,
    *,
    species: str = "Rb87",
    b_field_gauss: float = 0.0,
    e_start: float = 0.0,
    e_stop: float = 60.0,
    e_step: float = 0.1,
) -> StateSpec:
    return StateSpec(
        species=species,
        doubly=parse_level(doubly),
        partner_a=parse_level(partner_a),
        partner_b=parse_level(partner_b),
        b_field_gauss=b_field_gauss,
        e_start=e_start,
        e_stop=e_stop,
        e_step=e_step,
    )
