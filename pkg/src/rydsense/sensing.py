"""Field estimation from per-row excitation statistics.

The sensing protocol: precompute forward-model curves f_max(E) for every row
of the network, read out each row's fully-excited frequency, then invert the
observations by scanning the residual over the field grid.  Rows whose curves
are flat (separations far below or above the blockade radius at every field)
act as baselines: a single multiplicative gain fitted on them absorbs
detection-efficiency drift before the probe rows are inverted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .csvio import atomic_write_text, parse_comment_metadata, render_csv, split_csv_text
from .dynamics import DriveSpec, build_hamiltonian, f_max
from .errors import AmbiguousEstimate, CurveCacheMismatch, NoProbeRows
from .geometry import RowSpec, UniformField
from .pairstate import StarkTable

#: a row is a baseline when its curve varies less than this over the grid
FLAT_CURVE_TOL = 0.05

#: mean-squared curve distance below which two minima count as degenerate.
#: Construction-identical minima (a single probe against its resonance
#: mirror) land below ~1e-16 given the refinement tolerance; physically
#: near-degenerate ones (multi-probe far-field mirrors, broken only by the
#: C3 drift) stay above ~1e-13.
DEGENERACY_FLOOR = 1e-14

#: effective frequency uncertainty assigned to exact-mode readouts
EXACT_SIGMA = 1e-6

CURVES_HEADER = "R_um,N,E_mVcm,f_max"
READOUT_HEADER = "R_um,N,shots,freq"


@dataclass(frozen=True)
class ForwardCurve:
    """f_max versus uniform field for one row configuration."""

    r_um: float
    n_atoms: int
    e_grid: np.ndarray
    values: np.ndarray
    omega: float

    def at(self, e_field) -> np.ndarray:
        """Monotone-cubic interpolation of the curve, exact at the nodes.

        Linear interpolation is not good enough for the inversion: near the
        resonance shoulders its error (curvature * step^2/8) reaches the
        size of the left/right branch asymmetry the estimator relies on.
        """
        return self._interpolant(e_field)

    @property
    def _interpolant(self):
        cached = getattr(self, "_pchip", None)
        if cached is None:
            from scipy.interpolate import PchipInterpolator

            cached = PchipInterpolator(self.e_grid, self.values, extrapolate=False)
            object.__setattr__(self, "_pchip", cached)
        return cached

    @property
    def key(self) -> tuple[float, int]:
        return (round(self.r_um, 9), self.n_atoms)


@dataclass(frozen=True)
class RowReadout:
    """Observed fully-excited frequency for one row.

    `shots` is None in exact mode, where `freq` equals the model probability.
    """

    r_um: float
    n_atoms: int
    freq: float
    shots: Optional[int] = None

    @property
    def key(self) -> tuple[float, int]:
        return (round(self.r_um, 9), self.n_atoms)


@dataclass(frozen=True)
class SensorReadout:
    """One network measurement: a readout per row."""

    rows: tuple[RowReadout, ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))


@dataclass(frozen=True)
class FieldEstimate:
    """Inverted field value with a unit-chi-square interval."""

    e_hat: float
    lo: float
    hi: float
    residual: float
    row_residuals: tuple[tuple[tuple[float, int], float], ...]


def forward_curves(
    rows: Sequence[RowSpec],
    table: StarkTable,
    omega: float,
    e_grid: Sequence[float],
    *,
    detuning: float = 0.0,
    threads: Optional[int] = None,
) -> list[ForwardCurve]:
    """f_max(E) on the grid for each row under a uniform field."""
    e_grid = np.asarray(e_grid, dtype=np.float64)
    if np.any(np.diff(e_grid) <= 0):
        raise ValueError("E grid must be strictly increasing")
    drive = DriveSpec(omega=omega, detuning=detuning)
    curves = []
    for row in rows:
        values = np.empty(len(e_grid))
        for k, e_val in enumerate(e_grid):
            h = build_hamiltonian(row, UniformField(e0=float(e_val)), table, drive)
            values[k], _ = f_max(h, threads=threads)
        curves.append(
            ForwardCurve(
                r_um=row.spacing,
                n_atoms=row.n_atoms,
                e_grid=e_grid.copy(),
                values=values,
                omega=omega,
            )
        )
    return curves


def simulate_readout(
    e_true: float,
    rows: Sequence[RowSpec],
    table: StarkTable,
    omega: float,
    shots: Optional[int],
    seed: Optional[int] = None,
    *,
    detuning: float = 0.0,
    threads: Optional[int] = None,
) -> SensorReadout:
    """Synthetic network measurement at a uniform true field.

    Per row, the success probability is the freshly computed f_max at
    `e_true`; finite `shots` draws a binomial count with the seeded
    generator, `shots=None` returns the probability itself (exact mode).
    """
    if shots is not None and shots < 1:
        raise ValueError(f"shots must be >= 1 or None, got {shots}")
    rng = np.random.default_rng(seed)
    drive = DriveSpec(omega=omega, detuning=detuning)
    readouts = []
    for row in rows:
        h = build_hamiltonian(row, UniformField(e0=e_true), table, drive)
        prob, _ = f_max(h, threads=threads)
        prob = min(max(prob, 0.0), 1.0)
        if shots is None:
            freq = prob
        else:
            freq = rng.binomial(shots, prob) / shots
        readouts.append(
            RowReadout(r_um=row.spacing, n_atoms=row.n_atoms, freq=freq, shots=shots)
        )
    return SensorReadout(rows=tuple(readouts))


# --- Estimation ----------------------------------------------------------------


def _is_flat(curve: ForwardCurve) -> bool:
    return float(curve.values.max() - curve.values.min()) <= FLAT_CURVE_TOL


def _gain_profile(
    baselines: list[tuple[RowReadout, ForwardCurve]],
    weights: np.ndarray,
    grid_values: np.ndarray,
) -> np.ndarray:
    """Least-squares gain on the baseline rows, profiled per candidate field.

    grid_values is (n_baselines, n_grid): the baseline curves evaluated on
    the candidate grid; the returned g(E) makes obs ~= g * curve(E) in the
    weighted least-squares sense at each E.
    """
    obs = np.array([r.freq for r, _ in baselines])
    num = (weights[:, None] * obs[:, None] * grid_values).sum(axis=0)
    den = (weights[:, None] * grid_values**2).sum(axis=0)
    gain = np.ones_like(den)
    good = den > 0
    gain[good] = num[good] / den[good]
    return gain


def _local_minima(res: np.ndarray) -> list[int]:
    idx = []
    for k in range(len(res)):
        left = res[k - 1] if k > 0 else math.inf
        right = res[k + 1] if k < len(res) - 1 else math.inf
        if res[k] <= left and res[k] <= right:
            idx.append(k)
    return idx


def _basin_minimum(
    grid: np.ndarray,
    curves: list[ForwardCurve],
    obs: np.ndarray,
    weights: np.ndarray,
    res: np.ndarray,
    k: int,
) -> tuple[float, float]:
    """Continuous residual minimum within the basin around grid node k."""
    from scipy.optimize import minimize_scalar

    lo = float(grid[max(k - 1, 0)])
    hi = float(grid[min(k + 1, len(grid) - 1)])
    if hi <= lo:
        return float(grid[k]), float(res[k])

    def residual(e_val: float) -> float:
        model = np.array([float(c.at(e_val)) for c in curves])
        return float((weights * (obs - model) ** 2).sum())

    result = minimize_scalar(residual, bounds=(lo, hi), method="bounded",
                             options={"xatol": 1e-9})
    best_e, best_r = float(result.x), float(result.fun)
    if res[k] < best_r:
        best_e, best_r = float(grid[k]), float(res[k])
    return best_e, best_r


def estimate_field(
    readout: SensorReadout, curves: Sequence[ForwardCurve]
) -> FieldEstimate:
    """Invert a network readout against precomputed forward curves.

    Steps: (1) when both a low and a high baseline row are present (flat
    curves), fit a single multiplicative gain on them against their curve
    values at each candidate field, and rescale the probe observations by
    it; (2) minimize the shot-weighted squared residual over the curve grid,
    refining each residual basin on its exact piecewise-quadratic form;
    (3) report the interval where the chi-square under the binomial noise
    scale stays within one unit of its minimum.

    Raises:
        NoProbeRows: every readout row classified as baseline.
        AmbiguousEstimate: two disjoint residual minima are exactly
            degenerate (within machine scale) -- the row set cannot decide.
    """
    by_key = {c.key: c for c in curves}
    pairs: list[tuple[RowReadout, ForwardCurve]] = []
    for row in readout.rows:
        curve = by_key.get(row.key)
        if curve is None:
            raise CurveCacheMismatch(
                f"no forward curve for row R={row.r_um} um, N={row.n_atoms}"
            )
        pairs.append((row, curve))

    grid = pairs[0][1].e_grid
    for _, curve in pairs[1:]:
        if len(curve.e_grid) != len(grid) or not np.array_equal(curve.e_grid, grid):
            raise CurveCacheMismatch("forward curves must share one E grid")

    baselines = [(r, c) for r, c in pairs if _is_flat(c)]
    probes = [(r, c) for r, c in pairs if not _is_flat(c)]
    if not probes:
        raise NoProbeRows("readout contains no non-flat probe rows")

    def weight(row: RowReadout) -> float:
        return float(row.shots) if row.shots is not None else 1.0

    has_low = any(c.values.mean() < 0.5 for _, c in baselines)
    has_high = any(c.values.mean() >= 0.5 for _, c in baselines)
    if has_low and has_high:
        gain_grid = _gain_profile(
            baselines,
            np.array([weight(r) for r, _ in baselines]),
            np.stack([c.values for _, c in baselines]),
        )
    else:
        gain_grid = np.ones(len(grid))

    obs_raw = np.array([r.freq for r, _ in probes])
    weights = np.array([weight(r) for r, _ in probes])
    model = np.stack([c.values for _, c in probes])  # (rows, grid)
    obs_grid = obs_raw[:, None] / gain_grid[None, :]

    res = (weights[:, None] * (obs_grid - model) ** 2).sum(axis=0)

    # Refine every residual basin on the continuous interpolant and take the
    # best.  Node-level comparison is not enough: the two resonance branches
    # can differ by less than the within-step discretization mismatch of an
    # off-node readout.
    probe_curves = [c for _, c in probes]
    candidates = []
    for k in _local_minima(res):
        obs_local = obs_raw / gain_grid[k]
        candidates.append(
            _basin_minimum(grid, probe_curves, obs_local, weights, res, k)
        )
    candidates.sort(key=lambda t: t[1])
    e_hat = float(min(max(candidates[0][0], grid[0]), grid[-1]))

    # Ambiguity: a disjoint residual basin whose probe curves are degenerate
    # with their values at the estimate (insufficient row diversity).  The
    # comparison uses noise-free model values at the refined minima, so shot
    # noise cannot trip the check while exactly mirrored readouts always do.
    step = float(grid[1] - grid[0])
    model_at_best = np.array([c.at(e_hat) for _, c in probes])
    for e_k, _ in candidates[1:]:
        if abs(e_k - e_hat) <= 2.0 * step:
            continue
        model_at_k = np.array([c.at(e_k) for _, c in probes])
        msd = float(np.mean((model_at_k - model_at_best) ** 2))
        if msd <= DEGENERACY_FLOOR:
            raise AmbiguousEstimate(
                f"rows cannot separate E = {e_hat:.3f} from E = {e_k:.3f} mV/cm "
                f"(mean-squared curve distance {msd:.2e})"
            )

    gain_at = float(np.interp(e_hat, grid, gain_grid))
    obs_at = obs_raw / gain_at
    model_at = np.array([c.at(e_hat) for _, c in probes])
    residual = float((weights * (obs_at - model_at) ** 2).sum())

    # Unit-chi-square interval under the per-row noise scale.
    sigma2 = np.empty(len(probes))
    for i, (row, _) in enumerate(probes):
        if row.shots is None:
            sigma2[i] = EXACT_SIGMA**2
        else:
            p = min(max(float(obs_at[i]), 1e-6), 1.0 - 1e-6)
            sigma2[i] = p * (1.0 - p) / row.shots
    chi2 = ((obs_grid - model) ** 2 / sigma2[:, None]).sum(axis=0)
    chi2_min = float(chi2.min())
    inside = chi2 <= chi2_min + 1.0
    # Connected run of grid points containing the estimate.
    k_center = int(np.argmin(np.abs(grid - e_hat)))
    if not inside[k_center]:
        k_center = int(np.argmin(chi2))
    lo_idx = k_center
    while lo_idx > 0 and inside[lo_idx - 1]:
        lo_idx -= 1
    hi_idx = k_center
    while hi_idx < len(grid) - 1 and inside[hi_idx + 1]:
        hi_idx += 1
    lo = min(float(grid[lo_idx]), e_hat)
    hi = max(float(grid[hi_idx]), e_hat)

    row_residuals = tuple(
        (row.key, float(weights[i] * (obs_at[i] - model_at[i]) ** 2))
        for i, (row, _) in enumerate(probes)
    )
    return FieldEstimate(
        e_hat=e_hat, lo=lo, hi=hi, residual=residual, row_residuals=row_residuals
    )


# --- CSV cache / readout files ---------------------------------------------------


def save_curves(path, curves: Sequence[ForwardCurve], meta: Optional[dict] = None) -> None:
    """Write the forward-curve cache CSV (omega stamped for invalidation)."""
    omegas = {c.omega for c in curves}
    if len(omegas) != 1:
        raise ValueError("all cached curves must share one omega")
    full_meta = {"omega_rad_per_us": omegas.pop()}
    full_meta.update(meta or {})
    rows = []
    for curve in curves:
        for e_val, f_val in zip(curve.e_grid, curve.values):
            rows.append((curve.r_um, curve.n_atoms, float(e_val), float(f_val)))
    atomic_write_text(path, render_csv(CURVES_HEADER, rows, full_meta))


def load_curves(
    path,
    *,
    expect_omega: Optional[float] = None,
    expect_meta: Optional[dict] = None,
) -> list[ForwardCurve]:
    """Read a curve cache, enforcing omega/metadata agreement when given."""
    text = Path(path).read_text(encoding="utf-8")
    comments, lines = split_csv_text(text)
    meta = parse_comment_metadata(comments)
    if not lines or lines[0] != CURVES_HEADER:
        raise CurveCacheMismatch(f"expected header {CURVES_HEADER!r}")
    omega = float(meta.get("omega_rad_per_us", "nan"))
    if expect_omega is not None and not math.isclose(
        omega, expect_omega, rel_tol=1e-12, abs_tol=0.0
    ):
        raise CurveCacheMismatch(
            f"cache omega {omega} rad/us != requested {expect_omega} rad/us"
        )
    for key, value in (expect_meta or {}).items():
        if meta.get(key) != value:
            raise CurveCacheMismatch(f"cache metadata {key}={meta.get(key)!r} != {value!r}")
    groups: dict[tuple[float, int], list[tuple[float, float]]] = {}
    for line in lines[1:]:
        r_str, n_str, e_str, f_str = line.split(",")
        groups.setdefault((float(r_str), int(n_str)), []).append(
            (float(e_str), float(f_str))
        )
    curves = []
    for (r_um, n_atoms), points in groups.items():
        arr = np.asarray(points)
        curves.append(
            ForwardCurve(
                r_um=r_um,
                n_atoms=n_atoms,
                e_grid=arr[:, 0],
                values=arr[:, 1],
                omega=omega,
            )
        )
    return curves


def save_readout(path, readout: SensorReadout, meta: Optional[dict] = None) -> None:
    """Write a readout CSV; exact-mode rows carry shots=inf."""
    rows = []
    for row in readout.rows:
        shots = float("inf") if row.shots is None else row.shots
        rows.append((row.r_um, row.n_atoms, shots, row.freq))
    atomic_write_text(path, render_csv(READOUT_HEADER, rows, meta))


def load_readout(path) -> SensorReadout:
    text = Path(path).read_text(encoding="utf-8")
    _, lines = split_csv_text(text)
    if not lines or lines[0] != READOUT_HEADER:
        raise CurveCacheMismatch(f"expected header {READOUT_HEADER!r}")
    rows = []
    for line in lines[1:]:
        r_str, n_str, shots_str, freq_str = line.split(",")
        shots_val = float(shots_str)
        shots = None if math.isinf(shots_val) else int(shots_val)
        rows.append(
            RowReadout(
                r_um=float(r_str),
                n_atoms=int(n_str),
                freq=float(freq_str),
                shots=shots,
            )
        )
    return SensorReadout(rows=tuple(rows))
