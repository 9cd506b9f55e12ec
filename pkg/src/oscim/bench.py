"""Ensemble runs: success probability, approximation ratio, time-to-solution."""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .dynamics import SimParams, simulate, trajectory_to_csv
from .oracle import OracleResult
from .problem import IsingProblem, cut_value, machine_energy
from .readout import binarize, bitflip_count
from .schedule import Schedule

__all__ = ["RunRecord", "BenchReport", "run_ensemble", "tts", "SUCCESS_TOL"]

SUCCESS_TOL = 1e-9


def tts(t_run: float, success_prob: float, target: float = 0.99) -> Optional[float]:
    """Time to reach the optimum with probability ``target``.

    ``t_run * ln(1 - target) / ln(1 - p)``; ``None`` when ``p`` is 0 or 1.
    """
    if not 0.0 < success_prob < 1.0:
        return None
    return t_run * math.log(1.0 - target) / math.log(1.0 - success_prob)


@dataclass(frozen=True)
class RunRecord:
    seed: int
    final_energy: float
    cut: Optional[float]
    settled: bool
    max_residual: float
    bitflips: int
    success: bool
    spins: tuple


@dataclass(frozen=True)
class BenchReport:
    runs: int
    base_seed: int
    success_prob: float
    settled_fraction: float
    mean_approx_ratio: Optional[float]
    max_approx_ratio: Optional[float]
    tts_99: Optional[float]
    tts_defined: bool
    mean_bitflips: float
    median_residual: float
    oracle_machine_energy: float
    oracle_cut: Optional[float]
    oracle_method: str
    t_end: float
    records: tuple

    def to_dict(self) -> dict:
        d = asdict(self)
        d["records"] = [asdict(r) for r in self.records]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _one_run(args) -> tuple:
    p, schedule, params, seed, oracle_e, trace = args
    traj = simulate(p, schedule, replace(params, seed=seed))
    r = binarize(traj.final_state.phi)
    e = machine_energy(p, r.s)
    cut = cut_value(p.source, r.s) if p.source is not None else None
    rec = RunRecord(
        seed=seed,
        final_energy=e,
        cut=cut,
        settled=r.settled,
        max_residual=r.max_residual,
        bitflips=bitflip_count(traj),
        success=e <= oracle_e + SUCCESS_TOL * max(1.0, abs(oracle_e)),
        spins=tuple(int(v) for v in r.s),
    )
    return rec, (trajectory_to_csv(traj) if trace else None)


def run_ensemble(p: IsingProblem, schedule: Schedule, params: SimParams, n_runs: int,
                 base_seed: int, oracle: OracleResult, *, workers: int = 1,
                 trace_dir=None) -> BenchReport:
    """Simulate seeds ``base_seed .. base_seed + n_runs - 1`` and aggregate.

    A run succeeds when its binarized final spins reach the oracle's machine
    energy. With ``workers > 1`` runs are spread over processes; records are
    folded in seed order either way, so the report does not depend on it.
    ``trace_dir`` writes one trajectory CSV per run.
    """
    if n_runs < 1:
        raise ValueError(f"n_runs must be >= 1, got {n_runs}")
    if oracle.best_s.shape != (p.n,):
        raise ValueError(f"oracle solution has {oracle.best_s.size} spins, problem has n={p.n}")
    oracle_e = oracle.best_machine_energy
    if abs(machine_energy(p, oracle.best_s) - oracle_e) > SUCCESS_TOL * max(1.0, abs(oracle_e)):
        raise ValueError("oracle result does not belong to this problem")
    jobs = [(p, schedule, params, base_seed + k, oracle_e, trace_dir is not None) for k in range(n_runs)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_one_run, jobs))
    else:
        results = [_one_run(job) for job in jobs]
    records = tuple(rec for rec, _ in results)
    if trace_dir is not None:
        out = Path(trace_dir)
        out.mkdir(parents=True, exist_ok=True)
        for rec, text in results:
            (out / f"run_{rec.seed}.csv").write_text(text)

    success = sum(r.success for r in records) / n_runs
    ratios = None
    if p.source is not None and oracle.best_cut:
        ratios = np.array([r.cut / oracle.best_cut for r in records])
    t99 = tts(params.t_end, success)
    return BenchReport(
        runs=n_runs,
        base_seed=base_seed,
        success_prob=success,
        settled_fraction=sum(r.settled for r in records) / n_runs,
        mean_approx_ratio=None if ratios is None else float(ratios.mean()),
        max_approx_ratio=None if ratios is None else float(ratios.max()),
        tts_99=t99,
        tts_defined=t99 is not None,
        mean_bitflips=float(np.mean([r.bitflips for r in records])),
        median_residual=float(np.median([r.max_residual for r in records])),
        oracle_machine_energy=oracle_e,
        oracle_cut=oracle.best_cut,
        oracle_method=oracle.method,
        t_end=params.t_end,
        records=records,
    )
