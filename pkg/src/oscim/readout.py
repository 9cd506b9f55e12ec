"""Phase-to-spin readout and settling diagnostics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SETTLE_THRESHOLD",
    "ReadoutResult",
    "binarize",
    "binarize_many",
    "comparator_readout",
    "bitflip_count",
]

SETTLE_THRESHOLD = 0.1  # rad


@dataclass(frozen=True, eq=False)
class ReadoutResult:
    s: np.ndarray
    residuals: np.ndarray
    settled: bool

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max())


def _relative(phi, ref: int) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    if not 0 <= ref < phi.shape[-1]:
        raise ValueError(f"reference index {ref} out of range for n={phi.shape[-1]}")
    return phi - phi[..., ref:ref + 1]


def binarize(phi, ref: int = 0, threshold: float = SETTLE_THRESHOLD) -> ReadoutResult:
    """Spins from phases relative to oscillator ``ref``.

    ``s[i] = +1`` when ``cos(phi_i - phi_ref) >= 0``. The residual is the
    distance from the relative phase to the nearest multiple of pi.
    """
    d = _relative(phi, ref)
    s = np.where(np.cos(d) >= 0.0, 1.0, -1.0)
    residuals = np.abs(d - np.pi * np.round(d / np.pi))
    s[ref] = 1.0
    residuals[ref] = 0.0
    return ReadoutResult(s, residuals, bool(np.all(residuals <= threshold)))


def binarize_many(phis, ref: int = 0) -> np.ndarray:
    """Spin matrix for a stack of phase vectors (rows are samples)."""
    d = _relative(np.atleast_2d(phis), ref)
    s = np.where(np.cos(d) >= 0.0, 1.0, -1.0)
    s[:, ref] = 1.0
    return s


def comparator_readout(phi, k: int = 9, rng=None, ref: int = 0) -> np.ndarray:
    """Emulate ``k`` zero-crossing comparator snapshots and take a majority vote.

    Each snapshot happens at a uniformly random instant ``tau`` of the carrier
    cycle; oscillator ``i`` reads high when ``cos(2*pi*tau + phi_i) >= 0``.
    Spin ``i`` is +1 when its bit agrees with the reference bit in most
    snapshots.
    """
    if int(k) != k or k < 1 or k % 2 == 0:
        raise ValueError(f"sample count must be a positive odd integer, got {k}")
    phi = np.asarray(phi, dtype=float)
    if not 0 <= ref < phi.size:
        raise ValueError(f"reference index {ref} out of range for n={phi.size}")
    rng = np.random.default_rng(rng)
    tau = rng.random(int(k))
    bits = np.cos(2.0 * np.pi * tau[:, None] + phi[None, :]) >= 0.0
    agree = (bits == bits[:, ref:ref + 1]).sum(axis=0)
    return np.where(2 * agree > k, 1.0, -1.0)


def bitflip_count(traj, ref: int = 0) -> int:
    """Total Hamming distance between binarized consecutive samples."""
    phis = traj.phi if hasattr(traj, "phi") else np.asarray(traj)
    if len(phis) == 0:
        raise ValueError("trajectory has no samples")
    s = binarize_many(phis, ref)
    return int(np.count_nonzero(s[1:] != s[:-1]))
