"""Ising instances, MaxCut graphs and their energies.

Conventions used throughout the package:

* spins and node indices are 0-based;
* ``hamiltonian(p, s) = s^T J s`` sums every ordered pair, so each edge is
  counted twice;
* the machine minimizes ``machine_energy = -hamiltonian``; the ground state is
  the minimizer of that quantity.

A MaxCut graph with adjacency ``A`` becomes the Ising problem ``J = -A``.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = [
    "ProblemFormatError",
    "WeightedGraph",
    "IsingProblem",
    "as_spins",
    "hamiltonian",
    "machine_energy",
    "maxcut_to_ising",
    "cut_value",
    "laplacian",
    "gen_instance",
    "parse_problem",
    "serialize_problem",
    "load_problem",
    "graph_from_couplings",
    "save_problem",
    "INSTANCE_KINDS",
]

INSTANCE_KINDS = ("gnp", "complete_gaussian", "star")


class ProblemFormatError(ValueError):
    """Malformed problem file; message carries the line/position."""

    def __init__(self, message: str, line: Optional[int] = None, col: Optional[int] = None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", col {col}" if col is not None else "")
            message = f"{where}: {message}"
        super().__init__(message)
        self.line = line
        self.col = col


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected weighted graph; edges are kept sorted by ``(i, j)``."""

    n: int
    edges: tuple = ()

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"node count must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        clean = []
        seen = set()
        for k, e in enumerate(self.edges):
            i, j, w = e
            i, j, w = int(i), int(j), float(w)
            if not (0 <= i < j < self.n):
                raise ValueError(f"edge {k} ({i}, {j}) violates 0 <= i < j < n={self.n}")
            if not math.isfinite(w):
                raise ValueError(f"edge {k} ({i}, {j}) has non-finite weight {w}")
            if (i, j) in seen:
                raise ValueError(f"edge {k} duplicates pair ({i}, {j})")
            seen.add((i, j))
            clean.append((i, j, w))
        clean.sort(key=lambda e: (e[0], e[1]))
        object.__setattr__(self, "edges", tuple(clean))

    @property
    def total_weight(self) -> float:
        return float(sum(w for _, _, w in self.edges))

    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.n, self.n))
        for i, j, w in self.edges:
            A[i, j] = A[j, i] = w
        return A


@dataclass(frozen=True, eq=False)
class IsingProblem:
    """Symmetric coupling matrix with zero diagonal.

    ``source`` keeps the MaxCut graph the problem was built from, if any, so
    cut values can be reported next to energies.
    """

    J: np.ndarray
    source: Optional[WeightedGraph] = field(default=None, repr=False)

    def __post_init__(self):
        J = np.array(self.J, dtype=float) + 0.0  # folds -0.0 into 0.0
        if J.ndim != 2 or J.shape[0] != J.shape[1] or J.shape[0] < 1:
            raise ValueError(f"J must be a non-empty square matrix, got shape {J.shape}")
        if not np.all(np.isfinite(J)):
            raise ValueError("J contains non-finite entries")
        if not np.array_equal(J, J.T):
            raise ValueError("J must be symmetric")
        if np.any(np.diag(J) != 0):
            raise ValueError("diagonal terms are not supported; J[i][i] must be 0")
        if self.source is not None and self.source.n != J.shape[0]:
            raise ValueError("source graph size does not match J")
        J.setflags(write=False)
        object.__setattr__(self, "J", J)

    @property
    def n(self) -> int:
        return self.J.shape[0]

    def __eq__(self, other):
        if not isinstance(other, IsingProblem):
            return NotImplemented
        return np.array_equal(self.J, other.J) and self.source == other.source

    __hash__ = None


def as_spins(s, n: Optional[int] = None) -> np.ndarray:
    """Validate a spin vector and return it as a float array of +-1."""
    arr = np.asarray(s, dtype=float)
    if arr.ndim != 1:
        raise ValueError("spin configuration must be one-dimensional")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"spin configuration has length {arr.shape[0]}, problem has n={n}")
    if not np.all((arr == 1) | (arr == -1)):
        raise ValueError("spins must be exactly -1 or +1")
    return arr


def hamiltonian(p: IsingProblem, s) -> float:
    """``s^T J s`` over all ordered pairs."""
    s = as_spins(s, p.n)
    return float(s @ p.J @ s)


def machine_energy(p: IsingProblem, s) -> float:
    """Energy the oscillator network descends (unit coupling gain, no SYNC offset)."""
    return -hamiltonian(p, s)


def maxcut_to_ising(g: WeightedGraph) -> IsingProblem:
    return IsingProblem(-g.adjacency(), source=g)


def cut_value(g: WeightedGraph, s) -> float:
    s = as_spins(s, g.n)
    return float(sum(w * (1.0 - s[i] * s[j]) / 2.0 for i, j, w in g.edges))


def laplacian(p: IsingProblem) -> np.ndarray:
    """Weighted graph Laplacian ``D - J`` with ``D = diag(row sums of J)``."""
    return np.diag(p.J.sum(axis=1)) - p.J


def _upper_pairs(n: int):
    return np.triu_indices(n, k=1)


def gen_instance(kind: str, n: int, seed: Optional[int] = None, *, p: float = 0.5,
                 center: Optional[int] = None) -> WeightedGraph:
    """Generate a MaxCut instance.

    ``gnp`` keeps each pair with probability ``p`` at unit weight,
    ``complete_gaussian`` gives every pair a standard-normal weight, and
    ``star`` joins ``center`` (default node 2, so that n=4 yields the
    breadboard graph) to every other node with unit weight.
    """
    kind = kind.replace("-", "_")
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    rng = np.random.default_rng(seed)
    iu, ju = _upper_pairs(n)
    if kind == "gnp":
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"edge probability must lie in [0, 1], got {p}")
        keep = rng.random(iu.size) < p
        edges = [(int(i), int(j), 1.0) for i, j in zip(iu[keep], ju[keep])]
    elif kind == "complete_gaussian":
        w = rng.standard_normal(iu.size)
        edges = [(int(i), int(j), float(x)) for i, j, x in zip(iu, ju, w)]
    elif kind == "star":
        if center is None:
            center = 2 if n >= 3 else 0
        if not 0 <= center < n:
            raise ValueError(f"star center {center} out of range for n={n}")
        edges = [(min(i, center), max(i, center), 1.0) for i in range(n) if i != center]
    else:
        raise ValueError(f"unknown instance kind {kind!r}; expected one of {INSTANCE_KINDS}")
    return WeightedGraph(n, tuple(edges))


_EDGE_RE = re.compile(r"\[\s*[^\[\]]*?\]")


def _edge_lines(text: str, count: int) -> list:
    """Best-effort line numbers for the entries of the ``edges`` array."""
    start = text.find('"edges"')
    if start < 0:
        return [None] * count
    bracket = text.find("[", start)
    lines = [text.count("\n", 0, m.start()) + 1 for m in _EDGE_RE.finditer(text, bracket + 1)]
    if len(lines) < count:
        return [None] * count
    return lines[:count]


def parse_problem(text: str) -> WeightedGraph:
    """Parse ``{"n": int, "edges": [[i, j, w], ...]}``.

    Extra top-level keys (e.g. ``meta``) are ignored.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(doc, dict):
        raise ProblemFormatError("top level must be an object", 1, 1)
    if "n" not in doc or "edges" not in doc:
        raise ProblemFormatError("missing required field 'n' or 'edges'", 1, 1)
    n = doc["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ProblemFormatError(f"'n' must be a positive integer, got {n!r}")
    raw = doc["edges"]
    if not isinstance(raw, list):
        raise ProblemFormatError("'edges' must be a list")
    lines = _edge_lines(text, len(raw))
    seen = set()
    edges = []
    for k, e in enumerate(raw):
        line = lines[k]
        if not (isinstance(e, list) and len(e) == 3):
            raise ProblemFormatError(f"edge {k} must be [i, j, w]", line)
        i, j, w = e
        if any(isinstance(v, bool) or not isinstance(v, int) for v in (i, j)):
            raise ProblemFormatError(f"edge {k}: indices must be integers", line)
        if isinstance(w, bool) or not isinstance(w, (int, float)) or not math.isfinite(w):
            raise ProblemFormatError(f"edge {k}: weight must be a finite number", line)
        if i == j:
            raise ProblemFormatError(f"edge {k}: self-loop ({i}, {j}) not allowed", line)
        if not (0 <= i < j < n):
            raise ProblemFormatError(f"edge {k}: indices ({i}, {j}) must satisfy 0 <= i < j < {n}", line)
        if (i, j) in seen:
            raise ProblemFormatError(f"edge {k}: duplicate edge ({i}, {j})", line)
        seen.add((i, j))
        edges.append((i, j, float(w)))
    return WeightedGraph(n, tuple(edges))


def serialize_problem(g: WeightedGraph, meta: Optional[dict] = None) -> str:
    lines = ["{", f'  "n": {g.n},']
    if meta:
        lines.append(f'  "meta": {json.dumps(meta, sort_keys=True)},')
    if g.edges:
        body = ",\n".join(f"    [{i}, {j}, {json.dumps(w)}]" for i, j, w in g.edges)
        lines.append('  "edges": [\n' + body + "\n  ]")
    else:
        lines.append('  "edges": []')
    lines.append("}")
    return "\n".join(lines) + "\n"


def load_problem(path) -> WeightedGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_problem(fh.read())


def save_problem(g: WeightedGraph, path, meta: Optional[dict] = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_problem(g, meta))


def graph_from_couplings(J: np.ndarray) -> WeightedGraph:
    """Inverse of :func:`maxcut_to_ising`: edges with ``w = -J[i, j]``."""
    iu, ju = _upper_pairs(J.shape[0])
    edges = [(int(i), int(j), float(-J[i, j])) for i, j in zip(iu, ju) if J[i, j] != 0]
    return WeightedGraph(J.shape[0], tuple(edges))
