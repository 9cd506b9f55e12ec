"""Kuramoto phase dynamics with sub-harmonic injection locking (SHIL).

Each oscillator obeys::

    dphi_i = (-K_c * sum_j J_ij sin(phi_i - phi_j) - K_s sin(2 phi_i)) dt + sigma dW_i

which is the gradient flow ``dphi/dt = -1/2 grad E`` of::

    E = -K_c * sum_{i != j} J_ij cos(phi_i - phi_j) - K_s * sum_i cos(2 phi_i)

Time is measured in oscillator cycles. Phases are never wrapped here.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from numba import njit

from .problem import IsingProblem, as_spins, cut_value, hamiltonian
from .readout import binarize_many
from .schedule import DEFAULT_T_END, Schedule

__all__ = [
    "PhaseState",
    "SimParams",
    "Trajectory",
    "drift",
    "lyapunov_energy",
    "binarized_energy",
    "step",
    "simulate",
    "trajectory_to_csv",
    "IntegrationError",
]

_NOISE_CHUNK = 2048


class IntegrationError(FloatingPointError):
    """Phases became non-finite; usually dt is too large for the coupling scale."""


@dataclass(frozen=True, eq=False)
class PhaseState:
    phi: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        phi = np.array(self.phi, dtype=float)
        if phi.ndim != 1:
            raise ValueError("phase vector must be one-dimensional")
        if not np.all(np.isfinite(phi)):
            raise IntegrationError("non-finite phase")
        if not self.t >= 0:
            raise ValueError(f"time must be non-negative, got {self.t}")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "t", float(self.t))


@dataclass(frozen=True)
class SimParams:
    """Integration settings.

    ``init`` is ``"uniform_random"`` (independent phases on ``[0, 2*pi)``) or
    an explicit phase vector.
    """

    dt: float = 1e-3
    t_end: float = DEFAULT_T_END
    sample_every: int = 100
    seed: Optional[int] = 0
    init: Union[str, tuple] = "uniform_random"

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.t_end > 0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if int(self.sample_every) != self.sample_every or self.sample_every < 1:
            raise ValueError(f"sample_every must be a positive integer, got {self.sample_every}")
        if not isinstance(self.init, str):
            object.__setattr__(self, "init", tuple(float(v) for v in self.init))
        elif self.init != "uniform_random":
            raise ValueError(f"unknown init {self.init!r}")

    @property
    def n_steps(self) -> int:
        return max(1, math.ceil(self.t_end / self.dt - 1e-9))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled run record; row ``k`` of every array belongs to sample ``k``."""

    t: np.ndarray
    phi: np.ndarray
    energy: np.ndarray
    metric: np.ndarray
    kc: np.ndarray
    ks: np.ndarray
    sigma: np.ndarray
    final_state: PhaseState
    metric_name: str = "machine_energy"
    seed: Optional[int] = field(default=None)

    def __len__(self):
        return self.t.shape[0]


def _check(phi, p: IsingProblem) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (p.n,):
        raise ValueError(f"phase vector has shape {phi.shape}, problem has n={p.n}")
    return phi


def _drift(phi: np.ndarray, J: np.ndarray, K_c: float, K_s: float) -> np.ndarray:
    c = np.cos(phi)
    s = np.sin(phi)
    # sum_j J_ij sin(phi_i - phi_j) = sin(phi_i) (J cos)_i - cos(phi_i) (J sin)_i
    return -K_c * (s * (J @ c) - c * (J @ s)) - 2.0 * K_s * s * c


def drift(phi, p: IsingProblem, K_c: float, K_s: float) -> np.ndarray:
    """Deterministic phase velocity of every oscillator."""
    if not (math.isfinite(K_c) and math.isfinite(K_s)):
        raise ValueError("K_c and K_s must be finite")
    return _drift(_check(phi, p), p.J, K_c, K_s)


def lyapunov_energy(phi, p: IsingProblem, K_c: float, K_s: float) -> float:
    phi = _check(phi, p)
    c = np.cos(phi)
    s = np.sin(phi)
    # sum_{i != j} J_ij cos(phi_i - phi_j) = c^T J c + s^T J s (zero diagonal)
    pair = c @ p.J @ c + s @ p.J @ s
    return float(-K_c * pair - K_s * np.cos(2.0 * phi).sum())


def binarized_energy(s, p: IsingProblem, K_c: float, K_s: float) -> float:
    """Energy of phases pinned at 0/pi: ``-K_c * s^T J s - n * K_s``."""
    s = as_spins(s, p.n)
    return -K_c * hamiltonian(p, s) - p.n * K_s


def _advance(phi, J, K_c, K_s, sigma, dt, xi):
    with np.errstate(over="ignore", invalid="ignore"):
        out = phi + _drift(phi, J, K_c, K_s) * dt
    if sigma > 0.0:
        out += (sigma * math.sqrt(dt)) * xi
    return out


@njit(cache=True)
def _integrate_chunk(phi, J, kc, ks, sig, dts, noise, record_at, out):
    """Advance ``phi`` in place over one chunk of steps.

    After local step ``record_at[r]`` the phases are copied into ``out[r]``.
    """
    n = phi.shape[0]
    c = np.empty(n)
    s = np.empty(n)
    vel = np.empty(n)
    r = 0
    for k in range(dts.shape[0]):
        for i in range(n):
            c[i] = np.cos(phi[i])
            s[i] = np.sin(phi[i])
        for i in range(n):
            jc = 0.0
            js = 0.0
            for j in range(n):
                jc += J[i, j] * c[j]
                js += J[i, j] * s[j]
            vel[i] = -kc[k] * (s[i] * jc - c[i] * js) - 2.0 * ks[k] * s[i] * c[i]
        amp = sig[k] * np.sqrt(dts[k])
        for i in range(n):
            phi[i] += vel[i] * dts[k] + amp * noise[k, i]
        while r < record_at.shape[0] and record_at[r] == k:
            for i in range(n):
                out[r, i] = phi[i]
            r += 1


def step(state: PhaseState, p: IsingProblem, controls, dt: float, rng) -> PhaseState:
    """One Euler-Maruyama step with ``controls = (K_c, K_s, sigma)``.

    One standard-normal vector is always drawn from ``rng`` so the random
    stream does not depend on whether noise is switched on.
    """
    K_c, K_s, sigma = controls
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if sigma < 0:
        raise ValueError(f"sigma must be non-negative, got {sigma}")
    phi = _check(state.phi, p)
    xi = rng.standard_normal(p.n)
    out = _advance(phi, p.J, K_c, K_s, sigma, dt, xi)
    if not np.all(np.isfinite(out)):
        raise IntegrationError(f"non-finite phase at t={state.t + dt}; reduce dt")
    return PhaseState(out, state.t + dt)


def _initial_phases(p: IsingProblem, params: SimParams, rng) -> np.ndarray:
    if isinstance(params.init, str):
        return rng.uniform(0.0, 2.0 * np.pi, p.n)
    phi = np.array(params.init, dtype=float)
    if phi.shape != (p.n,):
        raise ValueError(f"initial phases have length {phi.size}, problem has n={p.n}")
    return phi


def _sample_metric(p: IsingProblem, phis: np.ndarray):
    spins = binarize_many(phis)
    if p.source is not None:
        return "cut", np.array([cut_value(p.source, s) for s in spins])
    return "machine_energy", -np.einsum("ki,ij,kj->k", spins, p.J, spins)


def simulate(p: IsingProblem, schedule: Schedule, params: SimParams = SimParams()) -> Trajectory:
    """Integrate from ``t = 0`` to ``params.t_end`` and record samples.

    The initial phases and then one noise vector per step are drawn from
    ``numpy.random.default_rng(params.seed)``. Controls are evaluated at the
    start of each step. The last step is shortened if ``t_end`` is not a
    multiple of ``dt`` so that the final sample lands on ``t_end``.
    """
    rng = np.random.default_rng(params.seed)
    phi = _initial_phases(p, params, rng)
    n_steps = params.n_steps
    dt = params.dt
    starts = np.arange(n_steps) * dt
    dts = np.full(n_steps, dt)
    dts[-1] = params.t_end - starts[-1]
    kc, ks, sig = schedule.evaluate_many(starts)

    n = p.n
    every = int(params.sample_every)
    sample_steps = np.arange(0, n_steps + 1, every)
    if sample_steps[-1] != n_steps:
        sample_steps = np.append(sample_steps, n_steps)
    phis = np.empty((sample_steps.size, n))
    phis[0] = phi
    J = np.ascontiguousarray(p.J)
    phi = phi.copy()
    for k0 in range(0, n_steps, _NOISE_CHUNK):
        k1 = min(k0 + _NOISE_CHUNK, n_steps)
        noise = rng.standard_normal((k1 - k0, n))
        # sample index m holds the state after sample_steps[m] steps
        sel = np.flatnonzero((sample_steps > k0) & (sample_steps <= k1))
        record_at = (sample_steps[sel] - 1 - k0).astype(np.int64)
        out = np.empty((sel.size, n))
        _integrate_chunk(phi, J, kc[k0:k1], ks[k0:k1], sig[k0:k1], dts[k0:k1], noise, record_at, out)
        phis[sel] = out
        if not np.all(np.isfinite(phi)):
            raise IntegrationError(f"non-finite phase before t={starts[k1 - 1] + dts[k1 - 1]}; reduce dt")

    times = np.array([starts[k] if k < n_steps else params.t_end for k in sample_steps])
    kc_s, ks_s, sig_s = schedule.evaluate_many(times)
    energy = np.array([lyapunov_energy(ph, p, a, b) for ph, a, b in zip(phis, kc_s, ks_s)])
    metric_name, metric = _sample_metric(p, phis)
    final = PhaseState(phis[-1], params.t_end)
    return Trajectory(times, phis, energy, metric, kc_s, ks_s, sig_s, final,
                      metric_name=metric_name, seed=params.seed)


def trajectory_to_csv(traj: Trajectory) -> str:
    """CSV text with header ``t,phi_0,...,phi_{n-1},E,metric,Kc,Ks,sigma``."""
    n = traj.phi.shape[1]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + [f"phi_{i}" for i in range(n)] + ["E", "metric", "Kc", "Ks", "sigma"])
    for k in range(len(traj)):
        w.writerow([repr(float(traj.t[k]))] + [repr(float(v)) for v in traj.phi[k]]
                   + [repr(float(x[k])) for x in (traj.energy, traj.metric, traj.kc, traj.ks, traj.sigma)])
    return buf.getvalue()
