"""Excitation dynamics of a driven row of interacting atoms.

The register Hamiltonian (hbar = 1, rad/us) is

    H = (Omega/2) sum_i X_i - Delta sum_i n_i + sum_{i<j} V_ij n_i n_j,

with the pair sum over unordered pairs counted once.  V_ij comes from the
tabulated coefficients at the pair's midpoint field; the blockade-relevant
quantity is the shift of the doubly excited pair state measured from its own
asymptote, i.e. the coupled-eigenvalue formula evaluated with |delta| (the
lowest eigenvalue relative to the other asymptote would absorb the bare
defect on the delta < 0 side of the resonance and over-blockade there).

States are 2^N complex amplitude vectors with atom 1 as the lowest bit of
the basis index.  Propagation is matrix-free fixed-step RK4: the diagonal is
recentred (global phase, restored on output), the step is chosen to resolve
the fastest scale with at least `steps_per_period` steps per period, and is
halved until the measured norm drift beats the tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import kernels
from .errors import BadLabel, IntegratorFailure
from .geometry import FieldProfile, RowSpec, midpoint_field
from .pairstate import (
    PairCoefficients,
    StarkTable,
    coefficients_at,
    effective_interaction,
)

TWO_PI = 2.0 * math.pi

#: uniform time samples per Rabi period in the peak search
FMAX_SAMPLES = 2048

#: relative time tolerance of the golden-section refinement
FMAX_TIME_TOL = 1e-4

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

_MAX_HALVINGS = 24


@dataclass(frozen=True)
class DriveSpec:
    """Ground-to-excited drive: Rabi frequency and detuning, rad/us."""

    omega: float
    detuning: float = 0.0

    def __post_init__(self):
        if not (self.omega > 0):
            raise ValueError(f"omega must be > 0, got {self.omega}")

    @property
    def period(self) -> float:
        """One Rabi period, 2*pi/Omega, us."""
        return TWO_PI / self.omega


@dataclass(frozen=True, eq=False)
class HamiltonianSpec:
    """Assembled N-atom operator: interaction diagonal plus transverse drive.

    `diagonal[b]` holds the summed pair interactions of every excited pair in
    basis state b minus detuning times the excitation count.  The drive term
    (Omega/2) sum_i X_i is applied matrix-free during evolution.
    """

    n_atoms: int
    diagonal: np.ndarray
    drive: DriveSpec

    def __post_init__(self):
        if len(self.diagonal) != 1 << self.n_atoms:
            raise ValueError("diagonal length must be 2**n_atoms")

    @property
    def dim(self) -> int:
        return 1 << self.n_atoms


@dataclass
class DynamicsResult:
    """Time grid, tracked basis-state fidelities and peak observables."""

    times: np.ndarray
    labels: list[str]
    fidelities: np.ndarray  # shape (len(times), len(labels))
    f_max: Optional[float] = None
    t_star: Optional[float] = None
    correlator: Optional[np.ndarray] = None


def pair_interaction(coeffs: PairCoefficients, separation: float) -> float:
    """Blockade shift of a doubly excited pair, rad/us (always <= 0).

    Magnitude (sqrt(delta^2 + 4 C3^2/R^6) - |delta|)/2: the detuning of the
    doubly excited level from its own non-interacting asymptote, which is the
    scale that suppresses double excitation on either side of the resonance.
    """
    return effective_interaction(
        PairCoefficients(delta=abs(coeffs.delta), c3=coeffs.c3), separation
    )


def build_hamiltonian(
    row: RowSpec,
    profile: FieldProfile,
    table: StarkTable,
    drive: DriveSpec,
) -> HamiltonianSpec:
    """Assemble the diagonal for one row under a field profile.

    All unordered pairs within the row contribute (no distance cutoff); each
    pair's coefficients are interpolated at its midpoint field.
    """
    n = row.n_atoms
    dim = 1 << n
    diag = np.zeros(dim, dtype=np.float64)
    idx = np.arange(dim, dtype=np.int64)
    span = table.span
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            e_mid = midpoint_field(profile, row, i, j, span)
            coeffs = coefficients_at(table, e_mid)
            v_ij = pair_interaction(coeffs, (j - i) * row.spacing)
            both = ((idx >> (i - 1)) & (idx >> (j - 1)) & 1).astype(np.float64)
            diag += v_ij * both
    if drive.detuning != 0.0:
        count = np.zeros(dim, dtype=np.float64)
        for i in range(n):
            count += ((idx >> i) & 1).astype(np.float64)
        diag -= drive.detuning * count
    return HamiltonianSpec(n_atoms=n, diagonal=diag, drive=drive)


# --- Basis bookkeeping -------------------------------------------------------


def basis_index(label: str) -> int:
    """Map a '0'/'1' occupation label (atom 1 first) to a basis index."""
    if not label or any(c not in "01" for c in label):
        raise BadLabel(f"label must be a nonempty string of 0/1, got {label!r}")
    return sum(1 << k for k, c in enumerate(label) if c == "1")


def basis_label(index: int, n_atoms: int) -> str:
    """Inverse of :func:`basis_index`."""
    return "".join("1" if (index >> k) & 1 else "0" for k in range(n_atoms))


def basis_fidelity(state: np.ndarray, label: str) -> float:
    """|<label|state>|^2 for one basis state."""
    n_bits = int(round(math.log2(len(state))))
    if len(label) != n_bits:
        raise BadLabel(f"label length {len(label)} != register size {n_bits}")
    return float(abs(state[basis_index(label)]) ** 2)


def ground_state(n_atoms: int) -> np.ndarray:
    """|00...0> amplitude vector."""
    psi = np.zeros(1 << n_atoms, dtype=np.complex128)
    psi[0] = 1.0
    return psi


def default_tracked_labels(n_atoms: int) -> list[str]:
    """Ground state, the N singly excited states, and the fully excited state."""
    labels = ["0" * n_atoms]
    for i in range(n_atoms):
        labels.append("".join("1" if k == i else "0" for k in range(n_atoms)))
    labels.append("1" * n_atoms)
    return labels


def all_labels(n_atoms: int) -> list[str]:
    """Every basis label in index order (intended for N <= 10)."""
    return [basis_label(b, n_atoms) for b in range(1 << n_atoms)]


# --- Propagation -------------------------------------------------------------


def _recentre(h: HamiltonianSpec) -> tuple[np.ndarray, float, float]:
    """Shifted diagonal, the shift, and a spectral-radius bound."""
    d_min = float(h.diagonal.min())
    d_max = float(h.diagonal.max())
    shift = 0.5 * (d_min + d_max)
    diag_s = np.ascontiguousarray(h.diagonal - shift)
    rho = 0.5 * (d_max - d_min) + 0.5 * h.drive.omega * h.n_atoms
    return diag_s, shift, max(rho, h.drive.omega)


def _initial_dt(
    diag_s: np.ndarray,
    om_half: float,
    rho: float,
    t_total: float,
    steps_per_period: int,
    norm_tol: float,
    n_threads: int,
) -> float:
    """Step size: fastest-scale rule tightened by a measured norm-decay probe.

    RK4 loses norm as sum_l |a_l|^2 (l*dt)^6/144 per step; the spectral
    weights depend on the state, so instead of the worst-case band-edge bound
    we probe the actual decay rate on a random state for 64 coarse steps and
    solve rate(dt) * (T/dt) <= tol/2 for dt.  The evolution still verifies
    the realized drift and halves on a miss.
    """
    dt0 = TWO_PI / (steps_per_period * rho)
    rng = np.random.default_rng(0xC0FFEE)
    probe = rng.normal(size=len(diag_s)) + 1j * rng.normal(size=len(diag_s))
    probe = np.ascontiguousarray(probe / np.linalg.norm(probe))
    n_probe = 64
    kernels.rk4_steps(probe, diag_s, om_half, dt0, n_probe, n_threads)
    rate = abs(float(np.linalg.norm(probe)) - 1.0) / n_probe
    rate = max(rate, 1e-18)
    # drift_total(dt) = rate * (dt/dt0)^6 * (T/dt) <= norm_tol/2
    dt_probe = (0.5 * norm_tol * dt0**6 / (rate * t_total)) ** 0.2
    return min(dt0, dt_probe)


def _resolve_threads(threads: Optional[int]) -> int:
    if threads is not None:
        return max(1, int(threads))
    import os

    env = os.environ.get("RYDSENSE_THREADS")
    return max(1, int(env)) if env else 1


def evolve(
    h: HamiltonianSpec,
    initial: np.ndarray,
    t_grid: Sequence[float],
    *,
    steps_per_period: int = 200,
    norm_tol: float = 1e-9,
    phase_tol: Optional[float] = None,
    threads: Optional[int] = None,
) -> np.ndarray:
    """Propagate `initial` through the grid times; returns (T, 2^N) amplitudes.

    Unitary within `norm_tol`: the run is repeated with halved steps until the
    measured norm drift at every grid point beats the tolerance.  `phase_tol`
    optionally adds the a-priori RK4 phase-error bound T*rho^5*dt^4/120 <=
    phase_tol to the step choice; populations do not need it, but amplitude
    comparisons against spectral propagation do.

    Raises:
        IntegratorFailure: step size underflow while chasing the tolerance.
    """
    times = np.asarray(t_grid, dtype=np.float64)
    if times.ndim != 1 or len(times) == 0:
        raise ValueError("t_grid must be a nonempty 1-D sequence")
    if times[0] != 0.0:
        raise ValueError("t_grid must start at 0")
    if np.any(np.diff(times) <= 0):
        raise ValueError("t_grid must be strictly ascending")
    psi0 = np.asarray(initial, dtype=np.complex128)
    if len(psi0) != h.dim:
        raise ValueError("initial state dimension mismatch")
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-9:
        raise ValueError("initial state must be normalized within 1e-9")

    if len(times) == 1:
        return psi0[None, :].copy()

    diag_s, shift, rho = _recentre(h)
    n_threads = _resolve_threads(threads)
    t_total = float(times[-1])
    dt_target = _initial_dt(
        diag_s, 0.5 * h.drive.omega, rho, t_total, steps_per_period, norm_tol, n_threads
    )
    if phase_tol is not None:
        dt_target = min(
            dt_target, (120.0 * phase_tol / (t_total * rho**5)) ** 0.25
        )

    for _ in range(_MAX_HALVINGS):
        out = np.empty((len(times), h.dim), dtype=np.complex128)
        out[0] = psi0
        psi = psi0.copy()
        drift = 0.0
        for k in range(1, len(times)):
            span = float(times[k] - times[k - 1])
            n_steps = max(1, math.ceil(span / dt_target))
            kernels.rk4_steps(
                psi, diag_s, 0.5 * h.drive.omega, span / n_steps, n_steps, n_threads
            )
            drift = max(drift, abs(float(np.linalg.norm(psi)) - 1.0))
            out[k] = psi
        if drift <= norm_tol:
            # Undo the diagonal recentring (pure global phase).
            out *= np.exp(-1j * shift * times)[:, None]
            return out
        dt_target *= 0.5

    raise IntegratorFailure(
        f"norm drift {drift:.3e} above {norm_tol} after {_MAX_HALVINGS} halvings"
    )


def energy_expectation(h: HamiltonianSpec, state: np.ndarray) -> float:
    """<state|H|state>, rad/us."""
    psi = np.ascontiguousarray(state, dtype=np.complex128)
    out = np.empty_like(psi)
    kernels.apply_h(psi, np.ascontiguousarray(h.diagonal), 0.5 * h.drive.omega, out)
    return float(np.real(np.vdot(psi, out)))


# --- Peak fidelity over a Rabi period ----------------------------------------


@dataclass
class _ScanResult:
    f_best: float
    t_best: float
    base_state: np.ndarray  # state at the sample preceding the best one
    t_base: float
    dt: float


def _scan_rabi_period(
    h: HamiltonianSpec,
    *,
    samples: int,
    steps_per_period: int,
    norm_tol: float,
    threads: Optional[int],
) -> _ScanResult:
    """Sample the fully-excited fidelity on a uniform grid over (0, tau]."""
    tau = h.drive.period
    diag_s, _, rho = _recentre(h)
    n_threads = _resolve_threads(threads)
    om_half = 0.5 * h.drive.omega
    full = h.dim - 1
    dt_target = _initial_dt(
        diag_s, om_half, rho, tau, steps_per_period, norm_tol, n_threads
    )

    for _ in range(_MAX_HALVINGS):
        m = max(1, math.ceil(tau / samples / dt_target))
        dt = tau / (samples * m)
        psi = ground_state(h.n_atoms)
        prev = psi.copy()
        spare = np.empty_like(psi)
        best_f = -1.0
        best_k = 0
        best_base = psi.copy()
        ok = True
        for k in range(1, samples + 1):
            np.copyto(prev, psi)
            kernels.rk4_steps(psi, diag_s, om_half, dt, m, n_threads)
            f_k = float(abs(psi[full]) ** 2)
            if f_k > best_f:
                best_f = f_k
                best_k = k
                best_base, prev, spare = prev, spare, best_base
            if abs(float(np.linalg.norm(psi)) - 1.0) > norm_tol:
                ok = False
                break
        if ok:
            return _ScanResult(
                f_best=best_f,
                t_best=best_k * tau / samples,
                base_state=best_base,
                t_base=(best_k - 1) * tau / samples,
                dt=dt,
            )
        dt_target *= 0.5

    raise IntegratorFailure("norm drift persisted through step halvings")


def _state_at(
    scan: _ScanResult,
    h: HamiltonianSpec,
    t: float,
    diag_s: np.ndarray,
    n_threads: int,
) -> np.ndarray:
    """State at absolute time t >= scan.t_base, re-evolved from the base state."""
    psi = scan.base_state.copy()
    span = t - scan.t_base
    if span > 0:
        n_steps = max(1, math.ceil(span / scan.dt))
        kernels.rk4_steps(
            psi, diag_s, 0.5 * h.drive.omega, span / n_steps, n_steps, n_threads
        )
    return psi


def _refine_peak(
    scan: _ScanResult,
    h: HamiltonianSpec,
    diag_s: np.ndarray,
    n_threads: int,
    samples: int,
    time_tol: float,
) -> tuple[float, float]:
    """Golden-section maximization around the best scan sample."""
    tau = h.drive.period
    full = h.dim - 1

    def f_at(t: float) -> float:
        return float(abs(_state_at(scan, h, t, diag_s, n_threads)[full]) ** 2)

    a = scan.t_base
    b = min(scan.t_best + tau / samples, tau)
    best_f, best_t = scan.f_best, scan.t_best
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f_at(x1), f_at(x2)
    while (b - a) > time_tol * tau:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f_at(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f_at(x1)
        for t, f in ((x1, f1), (x2, f2)):
            if f > best_f:
                best_f, best_t = f, t
    return best_f, best_t


def f_max(
    h: HamiltonianSpec,
    *,
    samples: int = FMAX_SAMPLES,
    time_tol: float = FMAX_TIME_TOL,
    steps_per_period: int = 200,
    norm_tol: float = 1e-9,
    threads: Optional[int] = None,
) -> tuple[float, float]:
    """Peak fully-excited fidelity over one Rabi period, from |0...0>.

    Dense uniform sampling over (0, 2*pi/Omega] followed by golden-section
    refinement around the best sample; the refinement stops once the bracket
    is narrower than `time_tol` Rabi periods.

    Returns:
        (f_max, t_star): the peak value and its time in us.
    """
    scan = _scan_rabi_period(
        h,
        samples=samples,
        steps_per_period=steps_per_period,
        norm_tol=norm_tol,
        threads=threads,
    )
    diag_s, _, _ = _recentre(h)
    n_threads = _resolve_threads(threads)
    return _refine_peak(scan, h, diag_s, n_threads, samples, time_tol)


def correlator_at_peak(
    h: HamiltonianSpec,
    *,
    samples: int = FMAX_SAMPLES,
    time_tol: float = FMAX_TIME_TOL,
    steps_per_period: int = 200,
    norm_tol: float = 1e-9,
    threads: Optional[int] = None,
) -> np.ndarray:
    """Density-density correlator <n_i n_j> at the fully-excited peak time.

    Returns an (N, N) symmetric matrix; the diagonal holds <n_i> since
    n_i^2 = n_i.
    """
    _, matrix, _, _ = peak_observables(
        h,
        samples=samples,
        time_tol=time_tol,
        steps_per_period=steps_per_period,
        norm_tol=norm_tol,
        threads=threads,
    )
    return matrix


def peak_observables(
    h: HamiltonianSpec,
    *,
    samples: int = FMAX_SAMPLES,
    time_tol: float = FMAX_TIME_TOL,
    steps_per_period: int = 200,
    norm_tol: float = 1e-9,
    threads: Optional[int] = None,
) -> tuple[float, np.ndarray, float, np.ndarray]:
    """(f_max, correlator, t_star, peak state) from a single period scan."""
    scan = _scan_rabi_period(
        h,
        samples=samples,
        steps_per_period=steps_per_period,
        norm_tol=norm_tol,
        threads=threads,
    )
    diag_s, _, _ = _recentre(h)
    n_threads = _resolve_threads(threads)
    fmax_val, t_star = _refine_peak(scan, h, diag_s, n_threads, samples, time_tol)
    psi = _state_at(scan, h, t_star, diag_s, n_threads)
    return fmax_val, correlator(psi, h.n_atoms), t_star, psi


def correlator(state: np.ndarray, n_atoms: int) -> np.ndarray:
    """<n_i n_j> for all i, j from an amplitude vector."""
    probs = np.abs(state) ** 2
    idx = np.arange(len(state), dtype=np.int64)
    bits = np.empty((len(state), n_atoms), dtype=np.float64)
    for i in range(n_atoms):
        bits[:, i] = (idx >> i) & 1
    weighted = bits * probs[:, None]
    return weighted.T @ bits


def run_dynamics(
    h: HamiltonianSpec,
    t_grid: Sequence[float],
    labels: Optional[Sequence[str]] = None,
    *,
    steps_per_period: int = 200,
    norm_tol: float = 1e-9,
    threads: Optional[int] = None,
    with_peak: bool = False,
) -> DynamicsResult:
    """Tracked-fidelity trajectories from |0...0>, optionally with the peak."""
    if labels is None:
        labels = default_tracked_labels(h.n_atoms)
    labels = list(labels)
    indices = [basis_index(lab) for lab in labels]
    for lab in labels:
        if len(lab) != h.n_atoms:
            raise BadLabel(f"label {lab!r} does not match {h.n_atoms} atoms")
    states = evolve(
        h,
        ground_state(h.n_atoms),
        t_grid,
        steps_per_period=steps_per_period,
        norm_tol=norm_tol,
        threads=threads,
    )
    fid = np.abs(states[:, indices]) ** 2
    result = DynamicsResult(
        times=np.asarray(t_grid, dtype=np.float64), labels=labels, fidelities=fid
    )
    if with_peak:
        result.f_max, result.t_star = f_max(
            h,
            steps_per_period=steps_per_period,
            norm_tol=norm_tol,
            threads=threads,
        )
    return result


def calibrate_omega(
    table: StarkTable,
    row: RowSpec,
    e_field: float,
    target_fmax: float,
    *,
    bracket: tuple[float, float] = (0.05, 60.0),
    xtol: float = 1e-6,
    detuning: float = 0.0,
    profile_factory: Optional[Callable[[float], FieldProfile]] = None,
) -> float:
    """Fit the Rabi frequency so the uniform-field peak fidelity hits a target.

    Solves f_max(omega) = target_fmax by bracketed root finding; `bracket`
    is in rad/us and must straddle the target.
    """
    from scipy.optimize import brentq

    from .geometry import UniformField

    profile = (
        profile_factory(e_field) if profile_factory else UniformField(e0=e_field)
    )

    def objective(omega: float) -> float:
        drive = DriveSpec(omega=omega, detuning=detuning)
        h = build_hamiltonian(row, profile, table, drive)
        value, _ = f_max(h)
        return value - target_fmax

    return float(brentq(objective, bracket[0], bracket[1], xtol=xtol))
