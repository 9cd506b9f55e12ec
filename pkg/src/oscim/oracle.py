"""Reference solvers: exhaustive enumeration and tabu search.

Both minimize ``machine_energy = -s^T J s`` and report spins with
``s[0] = +1`` (the global flip is folded away).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .problem import IsingProblem, cut_value, machine_energy

__all__ = [
    "MAX_BRUTE_N",
    "OracleResult",
    "ProblemTooLarge",
    "brute_force",
    "tabu_search",
    "flip_delta",
    "default_tabu_params",
]

MAX_BRUTE_N = 24
_CHUNK_BITS = 16


class ProblemTooLarge(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class OracleResult:
    best_s: np.ndarray
    best_machine_energy: float
    best_cut: Optional[float]
    method: str
    evaluations: int

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "best_s": [int(v) for v in self.best_s],
            "best_machine_energy": self.best_machine_energy,
            "best_cut": self.best_cut,
            "evaluations": self.evaluations,
        }


def _result(p: IsingProblem, s: np.ndarray, method: str, evaluations: int) -> OracleResult:
    s = s * s[0]
    cut = cut_value(p.source, s) if p.source is not None else None
    return OracleResult(s, machine_energy(p, s), cut, method, int(evaluations))


def _tie_tol(e: float) -> float:
    return 1e-9 * max(1.0, abs(e))


def brute_force(p: IsingProblem) -> OracleResult:
    """Exact minimizer over the ``2**(n-1)`` configurations with ``s[0] = +1``.

    Among equal-energy minimizers the lexicographically smallest spin vector
    (ordering -1 < +1) wins.
    """
    n = p.n
    if n > MAX_BRUTE_N:
        raise ProblemTooLarge(f"n too large for brute force: {n} > {MAX_BRUTE_N}")
    free = n - 1
    total = 1 << free
    # position 1 is the most significant bit, so index order is lexicographic order
    shifts = np.arange(free - 1, -1, -1, dtype=np.int64)
    J = p.J
    best_e = np.inf
    best_idx = -1
    chunk = 1 << min(_CHUNK_BITS, free)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        bits = (idx[:, None] >> shifts[None, :]) & 1
        S = np.empty((idx.size, n))
        S[:, 0] = 1.0
        S[:, 1:] = 2.0 * bits - 1.0
        E = -np.einsum("ki,ki->k", S @ J, S)
        k = int(np.argmin(E))
        if E[k] < best_e - _tie_tol(best_e if np.isfinite(best_e) else E[k]):
            # earliest index within tolerance of the new minimum
            k = int(np.flatnonzero(E <= E[k] + _tie_tol(E[k]))[0])
            best_e, best_idx = float(E[k]), int(idx[k])
    s = np.ones(n)
    if free:
        s[1:] = 2.0 * ((best_idx >> shifts) & 1) - 1.0
    return _result(p, s, "brute", total)


def flip_delta(p: IsingProblem, s, i: int) -> float:
    """Change in machine energy when spin ``i`` is flipped: ``4 s_i (J s)_i``."""
    s = np.asarray(s, dtype=float)
    return float(4.0 * s[i] * (p.J[i] @ s))


def default_tabu_params(n: int) -> dict:
    return {"iters": 100 * n, "tenure": min(20, n), "restarts": 5}


def _lex_less(a: np.ndarray, b: np.ndarray) -> bool:
    diff = np.flatnonzero(a != b)
    return bool(diff.size) and a[diff[0]] < b[diff[0]]


def tabu_search(p: IsingProblem, iters: Optional[int] = None, tenure: Optional[int] = None,
                restarts: Optional[int] = None, seed: Optional[int] = 0) -> OracleResult:
    """Single-flip tabu search with aspiration.

    Every iteration applies the best admissible flip, even when it raises the
    energy. A flip is admissible when the spin was not flipped within the last
    ``tenure`` iterations, or when it would produce a new best energy.
    """
    defaults = default_tabu_params(p.n)
    iters = defaults["iters"] if iters is None else int(iters)
    tenure = defaults["tenure"] if tenure is None else int(tenure)
    restarts = defaults["restarts"] if restarts is None else int(restarts)
    if iters < 1:
        raise ValueError(f"iters must be >= 1, got {iters}")
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    rng = np.random.default_rng(seed)
    J = p.J
    n = p.n
    best_s = None
    best_e = np.inf
    evaluations = 0
    for _ in range(restarts):
        s = rng.choice([-1.0, 1.0], size=n)
        h = J @ s
        e = -float(s @ h)
        run_best_s, run_best_e = s.copy(), e
        tabu_until = np.zeros(n, dtype=np.int64)
        for it in range(1, iters + 1):
            delta = 4.0 * s * h
            evaluations += n
            allowed = (tabu_until < it) | (e + delta < run_best_e - _tie_tol(run_best_e))
            if not allowed.any():
                continue
            cand = np.where(allowed, delta, np.inf)
            i = int(np.argmin(cand))
            h -= 2.0 * s[i] * J[:, i]
            s[i] = -s[i]
            e += delta[i]
            tabu_until[i] = it + tenure
            if e < run_best_e - _tie_tol(run_best_e):
                run_best_s, run_best_e = s.copy(), e
        cand_s = run_best_s * run_best_s[0]
        cand_e = machine_energy(p, cand_s)
        if best_s is None or cand_e < best_e - _tie_tol(best_e) or (
                abs(cand_e - best_e) <= _tie_tol(best_e) and _lex_less(cand_s, best_s)):
            best_s, best_e = cand_s, cand_e
    return _result(p, best_s, "tabu", evaluations)
