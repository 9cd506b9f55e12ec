"""Coupling-board emulation.

Couplings are realized as conductances, ``J_ij = 1 / (K_c * R_ij)``, set by
programmable resistors. Three resistor models are available:

``digipot8``
    8-bit digital potentiometer: codes 0..256, ``R = R_full*code/256 + R_wiper``.
``r2r_parallel``
    four binary-weighted switched branches: codes 1..15, ``R = 8*R_unit/code``
    (uneven resistance steps). Code 0 opens every switch.
``r2r_series``
    switched series ladder: codes 1..15, ``R = R_unit*code`` (even but coarse
    steps).

Every model also has the open-circuit code ``DISCONNECT`` (-1), which gives
zero coupling. Codes for the upper-triangle pairs are packed four to a chip,
in row-major pair order, matching the firmware's ``R[4*addr]`` layout.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .problem import IsingProblem, graph_from_couplings

__all__ = [
    "DISCONNECT",
    "VARIANTS",
    "CHANNELS_PER_CHIP",
    "BOARD_SPINS",
    "CouplingSignError",
    "QuantizerModel",
    "CouplingCodes",
    "QuantizationReport",
    "PackedLayout",
    "code_range",
    "levels",
    "code_to_resistance",
    "resistance_to_coupling",
    "nearest_code",
    "quantize_problem",
    "pair_index",
    "index_pair",
    "pack_codes",
    "codes_to_csv",
]

DISCONNECT = -1
VARIANTS = ("digipot8", "r2r_parallel", "r2r_series")
CHANNELS_PER_CHIP = 4
BOARD_SPINS = 8


class CouplingSignError(ValueError):
    """A ferromagnetic (positive) coupling cannot be wired on the board."""


@dataclass(frozen=True)
class QuantizerModel:
    variant: str = "digipot8"
    R_full: float = 10_000.0
    R_wiper: float = 75.0
    R_unit: float = 10_000.0

    def __post_init__(self):
        variant = self.variant.replace("-", "_")
        if variant not in VARIANTS:
            raise ValueError(f"unknown quantizer variant {self.variant!r}; expected one of {VARIANTS}")
        object.__setattr__(self, "variant", variant)
        for name in ("R_full", "R_wiper", "R_unit"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


def code_range(m: QuantizerModel) -> tuple:
    """Inclusive range of finite-resistance codes."""
    return (0, 256) if m.variant == "digipot8" else (1, 15)


def _is_disconnect(m: QuantizerModel, code: int) -> bool:
    return code == DISCONNECT or (m.variant == "r2r_parallel" and code == 0)


def code_to_resistance(m: QuantizerModel, code: int) -> float:
    code = int(code)
    if _is_disconnect(m, code):
        return math.inf
    lo, hi = code_range(m)
    if not lo <= code <= hi:
        raise ValueError(f"code {code} out of range [{lo}, {hi}] for {m.variant}")
    if m.variant == "digipot8":
        return m.R_full * code / 256.0 + m.R_wiper
    if m.variant == "r2r_parallel":
        # branch conductances G/8, G/4, G/2, G with G = 1/R_unit
        return 1.0 / (code * (1.0 / m.R_unit) / 8.0)
    return m.R_unit * code


def levels(m: QuantizerModel) -> tuple:
    """``(codes, resistances)`` of every finite level, sorted by resistance."""
    lo, hi = code_range(m)
    codes = np.arange(lo, hi + 1)
    res = np.array([code_to_resistance(m, c) for c in codes])
    order = np.argsort(res, kind="stable")
    return codes[order], res[order]


def resistance_to_coupling(R: float, K_c: float = 1.0) -> float:
    """Coupling magnitude of a resistor: ``1 / (K_c * R)``; an open circuit gives 0."""
    if not K_c > 0:
        raise ValueError(f"K_c must be positive, got {K_c}")
    if math.isinf(R) and R > 0:
        return 0.0
    if not R > 0:
        raise ValueError(f"resistance must be positive, got {R}")
    return 1.0 / (K_c * R)


def nearest_code(m: QuantizerModel, R_target: float) -> int:
    """Code whose resistance is closest to ``R_target``; ties go to the lower resistance."""
    codes, res = levels(m)
    if math.isinf(R_target):
        return DISCONNECT
    k = int(np.argmin(np.abs(res - R_target)))  # first hit = lower resistance
    return int(codes[k])


@dataclass(frozen=True, eq=False)
class CouplingCodes:
    """Per-pair codes in row-major upper-triangle order."""

    n: int
    codes: tuple
    variant: str = "digipot8"

    @property
    def chip_channel(self) -> tuple:
        return tuple(divmod(idx, CHANNELS_PER_CHIP) for idx in range(len(self.codes)))

    def code(self, i: int, j: int) -> int:
        return self.codes[pair_index(i, j, self.n)]


@dataclass(frozen=True, eq=False)
class QuantizationReport:
    """Per-pair quantization outcome; rows follow ``CouplingCodes`` order."""

    pairs: tuple
    J_target: np.ndarray
    J_quant: np.ndarray
    R_ohms: np.ndarray
    rel_err: np.ndarray
    clamped: tuple = ()
    j_scale: float = 1.0
    K_c: float = 1.0

    @property
    def max_rel_err(self) -> float:
        return float(self.rel_err.max()) if self.rel_err.size else 0.0


@dataclass(frozen=True, eq=False)
class QuantizeResult:
    codes: CouplingCodes
    problem: IsingProblem
    report: QuantizationReport = field(repr=False)

    def __iter__(self):
        return iter((self.codes, self.problem, self.report))


def pair_index(i: int, j: int, n: int) -> int:
    """Row-major upper-triangle index of pair ``(i, j)``, ``i < j``."""
    if not 0 <= i < j < n:
        raise IndexError(f"pair ({i}, {j}) out of range for n={n}")
    return i * (n - 1) - i * (i - 1) // 2 + (j - i - 1)


def index_pair(idx: int, n: int) -> tuple:
    m = n * (n - 1) // 2
    if not 0 <= idx < m:
        raise IndexError(f"pair index {idx} out of range for n={n}")
    i = 0
    while idx >= n - 1 - i:
        idx -= n - 1 - i
        i += 1
    return i, i + 1 + idx


def quantize_problem(p: IsingProblem, m: QuantizerModel = QuantizerModel(), K_c: float = 1.0, *,
                     signed: bool = False, j_scale: Optional[float] = 1.0,
                     clamp_tol: float = 1e-9) -> QuantizeResult:
    """Map every coupling to the nearest resistor code and rebuild the problem.

    Each nonzero ``J_ij`` asks for ``R = 1 / (K_c * j_scale * |J_ij|)``.
    ``j_scale`` converts problem units to physical conductance; ``None``
    picks the scale that puts the weakest coupling on the largest resistance.
    Targets outside the resistor range are clamped and listed in
    ``report.clamped`` when they miss the range by more than ``clamp_tol``
    (relative).

    By default (board wiring) every coupling must be antiferromagnetic,
    ``J_ij <= 0``; ``signed=True`` quantizes magnitudes and restores signs in
    software instead.
    """
    if not K_c > 0:
        raise ValueError(f"K_c must be positive, got {K_c}")
    J = p.J
    n = p.n
    if not signed and np.any(J > 0):
        i, j = (int(v) for v in np.argwhere(J > 0)[0])
        raise CouplingSignError(
            f"positive coupling J[{i}][{j}]={J[i, j]} cannot be wired; couplings must be <= 0 "
            "(use signed mode to handle signs in software)")
    mags = np.abs(J[np.triu_indices(n, k=1)])
    if j_scale is None:
        _, res_sorted = levels(m)
        nz = mags[mags > 0]
        j_scale = 1.0 / (K_c * res_sorted[-1] * nz.min()) if nz.size else 1.0
    if not j_scale > 0:
        raise ValueError(f"j_scale must be positive, got {j_scale}")
    _, res_sorted = levels(m)
    r_lo, r_hi = res_sorted[0], res_sorted[-1]

    pairs, codes, targets, quant, ohms, errs, clamped = [], [], [], [], [], [], []
    Jq = np.zeros_like(J)
    for i in range(n):
        for j in range(i + 1, n):
            target = float(J[i, j])
            pairs.append((i, j))
            targets.append(target)
            if target == 0.0:
                codes.append(DISCONNECT)
                quant.append(0.0)
                ohms.append(math.inf)
                errs.append(0.0)
                continue
            R_t = 1.0 / (K_c * j_scale * abs(target))
            if R_t < r_lo * (1 - clamp_tol) or R_t > r_hi * (1 + clamp_tol):
                clamped.append((i, j))
            code = nearest_code(m, R_t)
            R_q = code_to_resistance(m, code)
            jq = math.copysign(resistance_to_coupling(R_q, K_c) / j_scale, target)
            codes.append(code)
            quant.append(jq)
            ohms.append(R_q)
            errs.append(abs(jq - target) / abs(target))
            Jq[i, j] = Jq[j, i] = jq
    source = graph_from_couplings(Jq) if p.source is not None else None
    report = QuantizationReport(tuple(pairs), np.array(targets), np.array(quant), np.array(ohms),
                                np.array(errs), tuple(clamped), float(j_scale), float(K_c))
    return QuantizeResult(CouplingCodes(n, tuple(codes), m.variant), IsingProblem(Jq, source=source), report)


@dataclass(frozen=True, eq=False)
class PackedLayout:
    """Firmware register image: ``R[4*chip + channel]``, -1 for open circuit."""

    board_n: int
    R: tuple
    slot_pairs: tuple

    @property
    def n_chips(self) -> int:
        return len(self.R) // CHANNELS_PER_CHIP

    def chip(self, addr: int) -> tuple:
        return self.R[CHANNELS_PER_CHIP * addr:CHANNELS_PER_CHIP * (addr + 1)]

    def slot(self, i: int, j: int) -> tuple:
        return divmod(pair_index(i, j, self.board_n), CHANNELS_PER_CHIP)


def pack_codes(codes: CouplingCodes, board_n: Optional[int] = None) -> PackedLayout:
    """Lay per-pair codes out as chip/channel registers.

    With ``board_n`` larger than the problem, the problem occupies oscillators
    ``0..n-1`` of the board and every other pair is left open.
    """
    n = codes.n
    board_n = n if board_n is None else int(board_n)
    if board_n < n:
        raise IndexError(f"problem with n={n} does not fit a board of {board_n} oscillators")
    slots = board_n * (board_n - 1) // 2
    n_chips = -(-slots // CHANNELS_PER_CHIP)
    R = [DISCONNECT] * (n_chips * CHANNELS_PER_CHIP)
    slot_pairs = [None] * len(R)
    for idx in range(slots):
        slot_pairs[idx] = index_pair(idx, board_n)
    for (i, j), code in zip(((a, b) for a in range(n) for b in range(a + 1, n)), codes.codes):
        R[pair_index(i, j, board_n)] = DISCONNECT if _is_disconnect(QuantizerModel(codes.variant), code) else int(code)
    return PackedLayout(board_n, tuple(R), tuple(slot_pairs))


def codes_to_csv(layout: PackedLayout, report: QuantizationReport) -> str:
    """``chip,channel,i,j,code,R_ohms,J_target,J_quant,rel_err``, one row per wired slot."""
    by_pair = {pair: k for k, pair in enumerate(report.pairs)}
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["chip", "channel", "i", "j", "code", "R_ohms", "J_target", "J_quant", "rel_err"])
    for idx, pair in enumerate(layout.slot_pairs):
        if pair is None:
            continue
        chip, channel = divmod(idx, CHANNELS_PER_CHIP)
        k = by_pair.get(pair)
        if k is None:
            row = [DISCONNECT, "inf", 0.0, 0.0, 0.0]
        else:
            row = [layout.R[idx], repr(float(report.R_ohms[k])), repr(float(report.J_target[k])),
                   repr(float(report.J_quant[k])), repr(float(report.rel_err[k]))]
        w.writerow([chip, channel, pair[0], pair[1]] + row)
    return buf.getvalue()
