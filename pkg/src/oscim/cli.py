"""Command-line interface: ``oscim generate | solve | oracle | bench | quantize``.

Exit codes: 0 success, 1 usage error, 2 I/O or file-format error,
3 precondition violation.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .bench import run_ensemble
from .dynamics import SimParams, simulate, trajectory_to_csv
from .hardware import BOARD_SPINS, QuantizerModel, codes_to_csv, pack_codes, quantize_problem
from .oracle import MAX_BRUTE_N, brute_force, tabu_search
from .problem import (ProblemFormatError, cut_value, gen_instance, hamiltonian, load_problem,
                      machine_energy, maxcut_to_ising, serialize_problem)
from .readout import binarize
from .schedule import (DEFAULT_KC_END, DEFAULT_KC_START, DEFAULT_KS, DEFAULT_SIGMA_START,
                       DEFAULT_T_END, default_schedule, load_schedule)

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_PRECONDITION = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _pair(text: str) -> tuple:
    """``"a"`` or ``"a:b"`` -> ``(a, b)``."""
    parts = text.split(":")
    if len(parts) not in (1, 2):
        raise argparse.ArgumentTypeError(f"expected VALUE or START:END, got {text!r}")
    try:
        vals = [float(v) for v in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number in {text!r}") from None
    return (vals[0], vals[-1])


def _sim_flags() -> argparse.ArgumentParser:
    sim = argparse.ArgumentParser(add_help=False)
    g = sim.add_argument_group("simulation")
    g.add_argument("--schedule", help="schedule JSON file; overrides --kc/--ks/--sigma")
    g.add_argument("--dt", type=float, default=1e-3, help="time step in cycles (default 1e-3)")
    g.add_argument("--t-end", type=float, default=DEFAULT_T_END,
                   help=f"run length in cycles (default {DEFAULT_T_END:g})")
    g.add_argument("--kc", type=_pair, default=(DEFAULT_KC_START, DEFAULT_KC_END),
                   help="coupling gain, constant K or ramp START:END "
                        f"(default {DEFAULT_KC_START:g}:{DEFAULT_KC_END:g})")
    g.add_argument("--ks", type=float, default=DEFAULT_KS, help=f"SYNC amplitude (default {DEFAULT_KS:g})")
    g.add_argument("--sigma", type=_pair, default=(DEFAULT_SIGMA_START, 0.0),
                   help=f"noise amplitude, constant or START:END (default {DEFAULT_SIGMA_START:g}:0)")
    g.add_argument("--sample-every", type=int, default=100, help="steps between trace samples")
    return sim


def _schedule(args):
    if args.schedule:
        return load_schedule(args.schedule)
    return default_schedule(args.t_end, K_c_start=args.kc[0], K_c_end=args.kc[1], K_s=args.ks,
                            sigma=args.sigma[0], sigma_end=args.sigma[1])


def _sim_params(args) -> SimParams:
    return SimParams(dt=args.dt, t_end=args.t_end, sample_every=args.sample_every, seed=args.seed)


def _load(path):
    return maxcut_to_ising(load_problem(path))


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_generate(args) -> int:
    params = {"p": args.p} if args.kind.replace("-", "_") == "gnp" else {}
    g = gen_instance(args.kind, args.n, args.seed, **params)
    meta = {"kind": args.kind.replace("-", "_"), "seed": args.seed, **params}
    _emit(serialize_problem(g, meta), args.out)
    if args.out:
        print(f"{meta['kind']}: n={g.n}, edges={len(g.edges)}, total weight={g.total_weight:.6g}, "
              f"seed={args.seed} -> {args.out}")
    return EXIT_OK


def cmd_solve(args) -> int:
    p = _load(args.problem)
    traj = simulate(p, _schedule(args), _sim_params(args))
    r = binarize(traj.final_state.phi)
    result = {
        "seed": args.seed,
        "spins": [int(v) for v in r.s],
        "machine_energy": machine_energy(p, r.s),
        "hamiltonian": hamiltonian(p, r.s),
        "cut": cut_value(p.source, r.s),
        "settled": r.settled,
        "max_residual": r.max_residual,
    }
    if args.trace:
        Path(args.trace).write_text(trajectory_to_csv(traj))
    if args.out:
        Path(args.out).write_text(json.dumps(result, indent=2) + "\n")
    print(f"spins: {' '.join(f'{v:+d}' for v in result['spins'])}")
    print(f"machine_energy: {result['machine_energy']:.6g}  hamiltonian: {result['hamiltonian']:.6g}  "
          f"cut: {result['cut']:.6g}")
    print(f"settled: {str(r.settled).lower()}  max_residual: {r.max_residual:.4f} rad  seed: {args.seed}")
    if not r.settled:
        print(f"warning: phases did not settle (max residual {r.max_residual:.3f} rad)", file=sys.stderr)
    return EXIT_OK


def _run_oracle(p, args):
    method = args.method
    if method == "auto":
        method = "brute" if p.n <= MAX_BRUTE_N else "tabu"
    if method == "brute":
        return brute_force(p)
    return tabu_search(p, args.iters, args.tenure, args.restarts, args.seed)


def cmd_oracle(args) -> int:
    p = _load(args.problem)
    res = _run_oracle(p, args)
    doc = {"seed": args.seed, **res.to_dict()}
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    p = _load(args.problem)
    oracle = _run_oracle(p, args)
    report = run_ensemble(p, _schedule(args), _sim_params(args), args.runs, args.seed, oracle,
                          workers=args.workers, trace_dir=args.trace_dir)
    _emit(report.to_json(), args.out)
    if args.out:
        tts = "undefined" if report.tts_99 is None else f"{report.tts_99:.4g} cycles"
        print(f"runs: {report.runs}  success_prob: {report.success_prob:.3f}  "
              f"settled: {report.settled_fraction:.3f}  mean ratio: {report.mean_approx_ratio}  "
              f"tts_99: {tts}  mean bitflips: {report.mean_bitflips:.2f}")
    return EXIT_OK


def cmd_quantize(args) -> int:
    p = _load(args.problem)
    model = QuantizerModel(args.model, R_full=args.r_full, R_wiper=args.r_wiper, R_unit=args.r_unit)
    j_scale = None if args.j_scale == "auto" else float(args.j_scale)
    codes, qp, report = quantize_problem(p, model, args.kc, signed=args.signed, j_scale=j_scale)
    board_n = args.board_n if args.board_n is not None else (BOARD_SPINS if p.n <= BOARD_SPINS else p.n)
    layout = pack_codes(codes, board_n)
    _emit(codes_to_csv(layout, report), args.out)
    if args.problem_out:
        Path(args.problem_out).write_text(serialize_problem(
            qp.source, {"quantized_from": str(args.problem), "model": model.variant,
                        "j_scale": report.j_scale, "K_c": args.kc}))
    open_slots = sum(1 for c in layout.R if c == -1)
    msg = (f"{model.variant}: {len(layout.R)} slots on {layout.n_chips} chips, {open_slots} disconnected, "
           f"max rel err {report.max_rel_err:.4g}, j_scale {report.j_scale:.6g}")
    print(msg, file=sys.stderr if not args.out else sys.stdout)
    if report.clamped:
        print(f"warning: {len(report.clamped)} coupling(s) clamped to the resistor range: "
              f"{list(report.clamped)}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="oscim", description="Oscillator Ising machine simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sim = _sim_flags()

    gen = sub.add_parser("generate", help="write a random or fixed MaxCut instance")
    gen.add_argument("kind", choices=["gnp", "complete-gaussian", "star"])
    gen.add_argument("-n", type=int, default=None, help="node count (star defaults to 4)")
    gen.add_argument("-p", type=float, default=0.5, help="gnp edge probability")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", help="output file (default stdout)")
    gen.set_defaults(func=cmd_generate)

    solve = sub.add_parser("solve", parents=[sim], help="anneal one instance and read out spins")
    solve.add_argument("problem")
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--trace", help="write the sampled trajectory CSV here")
    solve.add_argument("--out", help="write the solution JSON here")
    solve.set_defaults(func=cmd_solve)

    def oracle_flags(sp):
        sp.add_argument("--method", choices=["auto", "brute", "tabu"], default="auto")
        sp.add_argument("--iters", type=int, default=None, help="tabu iterations per restart (default 100n)")
        sp.add_argument("--tenure", type=int, default=None, help="tabu tenure (default min(20, n))")
        sp.add_argument("--restarts", type=int, default=None, help="tabu restarts (default 5)")

    orc = sub.add_parser("oracle", help="exact or tabu reference solution as JSON")
    orc.add_argument("problem")
    oracle_flags(orc)
    orc.add_argument("--seed", type=int, default=0)
    orc.add_argument("--out")
    orc.set_defaults(func=cmd_oracle)

    bench = sub.add_parser("bench", parents=[sim], help="ensemble statistics against an oracle")
    bench.add_argument("problem")
    bench.add_argument("--runs", type=int, default=100)
    bench.add_argument("--seed", type=int, default=0, help="base seed; run k uses seed+k")
    oracle_flags(bench)
    bench.add_argument("--workers", type=int, default=1)
    bench.add_argument("--trace-dir", help="write per-run trajectory CSVs into this directory")
    bench.add_argument("--out", help="report JSON (default stdout)")
    bench.set_defaults(func=cmd_bench)

    q = sub.add_parser("quantize", help="map couplings to resistor codes and board slots")
    q.add_argument("problem")
    q.add_argument("--model", choices=["digipot8", "r2r-parallel", "r2r-series"], default="digipot8")
    q.add_argument("--kc", type=float, default=1.0, help="global coupling gain K_c (default 1)")
    q.add_argument("--j-scale", default="auto",
                   help="conductance per unit coupling, or 'auto' to put the weakest coupling "
                        "on the largest resistance (default auto)")
    q.add_argument("--signed", action="store_true", help="allow positive couplings (signs in software)")
    q.add_argument("--board-n", type=int, default=None,
                   help=f"oscillators on the board (default {BOARD_SPINS} for n <= {BOARD_SPINS})")
    q.add_argument("--r-full", type=float, default=10_000.0)
    q.add_argument("--r-wiper", type=float, default=75.0)
    q.add_argument("--r-unit", type=float, default=10_000.0)
    q.add_argument("--out", help="code dump CSV (default stdout)")
    q.add_argument("--problem-out", help="write the quantized problem file here")
    q.set_defaults(func=cmd_quantize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "generate" and args.n is None:
        if args.kind != "star":
            parser.error("generate: -n is required for random instances")
        args.n = 4
    try:
        return args.func(args)
    except (OSError, ProblemFormatError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
