"""Pure-numpy fallback kernel for the state-vector propagation.

Implements the same contract as the compiled backend: in-place classic RK4
steps of d|psi>/dt = -i H |psi| with H = diag(d) + (Omega/2) sum_k X_k, where
X_k flips bit k of the basis index.  Used when the extension module is not
built, and as the ground truth in backend-equivalence tests.
"""

from __future__ import annotations

import numpy as np

BACKEND = "reference"


def apply_h(psi: np.ndarray, diag: np.ndarray, om_half: float, out: np.ndarray) -> None:
    """out <- H psi (H is real symmetric; psi, out complex, distinct)."""
    np.multiply(diag, psi, out=out)
    n_bits = int(round(np.log2(len(psi))))
    for k in range(n_bits):
        stride = 1 << k
        a = psi.reshape(-1, 2, stride)
        o = out.reshape(-1, 2, stride)
        o[:, 0, :] += om_half * a[:, 1, :]
        o[:, 1, :] += om_half * a[:, 0, :]


def rk4_steps(
    psi: np.ndarray,
    diag: np.ndarray,
    om_half: float,
    dt: float,
    n_steps: int,
    threads: int = 1,
) -> None:
    """Advance psi in place by n_steps fixed RK4 steps (threads ignored)."""
    del threads
    dim = len(psi)
    y = np.empty(dim, dtype=np.complex128)
    stage = np.empty(dim, dtype=np.complex128)
    acc = np.empty(dim, dtype=np.complex128)
    half = 0.5j * dt
    for _ in range(n_steps):
        apply_h(psi, diag, om_half, y)          # y1
        acc[:] = y
        np.multiply(y, half, out=stage)
        np.subtract(psi, stage, out=stage)
        apply_h(stage, diag, om_half, y)        # y2
        acc += 2.0 * y
        np.multiply(y, half, out=stage)
        np.subtract(psi, stage, out=stage)
        apply_h(stage, diag, om_half, y)        # y3
        acc += 2.0 * y
        np.multiply(y, 1j * dt, out=stage)
        np.subtract(psi, stage, out=stage)
        apply_h(stage, diag, om_half, y)        # y4
        acc += y
        psi -= (1j * dt / 6.0) * acc
