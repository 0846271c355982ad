"""Quantum-defect level energies for rubidium Rydberg states.

Energies follow the Rydberg-Ritz expansion with the standard spectroscopic
defect coefficients for Rb (Li et al. / Han et al. measurement series) and
the mass-corrected Rydberg constant for Rb-87.  This is all the atomic
structure the table generator needs: the zero-field pair defect is a
difference of three such level energies.
"""

from __future__ import annotations

from dataclasses import dataclass

#: Rydberg-Ritz coefficients (delta_0, delta_2) per (L, J) series of Rb.
RB_QUANTUM_DEFECTS: dict[tuple[str, float], tuple[float, float]] = {
    ("S", 0.5): (3.1311804, 0.1784),
    ("P", 0.5): (2.6548849, 0.2900),
    ("P", 1.5): (2.6416737, 0.2950),
    ("D", 1.5): (1.34809171, -0.60286),
    ("D", 2.5): (1.34646572, -0.59600),
    ("F", 2.5): (0.0165192, -0.085),
    ("F", 3.5): (0.0165437, -0.086),
}

RYDBERG_INF_HZ = 3.28984196025e15  # R_inf * c
ATOMIC_MASS_IN_ME = 1822.888486209
RB87_MASS_U = 86.909180531

#: Rydberg constant of Rb-87 in Hz (reduced-mass corrected).
RYDBERG_RB87_HZ = RYDBERG_INF_HZ / (1.0 + 1.0 / (RB87_MASS_U * ATOMIC_MASS_IN_ME))

_L_LETTERS = {"S": 0, "P": 1, "D": 2, "F": 3}


@dataclass(frozen=True)
class RydbergLevel:
    """One |n, L_J> level, e.g. RydbergLevel(59, 'D', 1.5)."""

    n: int
    l: str
    j: float

    def __post_init__(self):
        letter = self.l.upper()
        if letter not in _L_LETTERS:
            raise ValueError(f"unsupported orbital letter {self.l!r}")
        object.__setattr__(self, "l", letter)
        if (self.l, self.j) not in RB_QUANTUM_DEFECTS:
            raise ValueError(f"no defect coefficients for {self.l}{self.j}")
        if self.n <= RB_QUANTUM_DEFECTS[(self.l, self.j)][0]:
            raise ValueError(f"n = {self.n} below the defect for {self.l}{self.j}")

    @property
    def label(self) -> str:
        return f"{self.n}{self.l}{_format_j(self.j)}"


def _format_j(j: float) -> str:
    num = int(round(2 * j))
    return f"{num}/2"


def parse_level(label: str) -> RydbergLevel:
    """Parse labels like '59D3/2' or '61p1/2'."""
    text = label.strip().upper().replace(" ", "")
    for letter in _L_LETTERS:
        if letter in text:
            n_str, _, j_str = text.partition(letter)
            try:
                n = int(n_str)
                num, _, den = j_str.partition("/")
                j = float(num) / float(den or "1")
            except ValueError as exc:
                raise ValueError(f"cannot parse level label {label!r}") from exc
            return RydbergLevel(n=n, l=letter, j=j)
    raise ValueError(f"cannot parse level label {label!r}")


def quantum_defect(level: RydbergLevel) -> float:
    """Rydberg-Ritz defect mu(n) for the level's series."""
    d0, d2 = RB_QUANTUM_DEFECTS[(level.l, level.j)]
    return d0 + d2 / (level.n - d0) ** 2


def level_energy_hz(level: RydbergLevel) -> float:
    """Binding energy -Ry/(n - mu)^2 in Hz (negative below threshold)."""
    n_star = level.n - quantum_defect(level)
    return -RYDBERG_RB87_HZ / n_star**2


def pair_defect_mhz(
    doubly: RydbergLevel, partner_a: RydbergLevel, partner_b: RydbergLevel
) -> float:
    """Zero-field energy defect 2*eps(doubly) - eps(a) - eps(b), in MHz."""
    return (
        2.0 * level_energy_hz(doubly)
        - level_energy_hz(partner_a)
        - level_energy_hz(partner_b)
    ) / 1e6
