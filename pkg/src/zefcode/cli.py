"""Command-line front end.

    zefcode kraft     --config code.toml
    zefcode lift      --config code.toml [--out table.toml]
    zefcode condense  --config run.toml [--out state.txt] [--machine]
    zefcode compress  --config run.toml [--out sweep.csv] [--seed S] [--exact]
    zefcode entropy   --config run.toml
    zefcode selftest

Exit status: 0 success, 1 validation error, 2 resource limit.
"""
from __future__ import annotations

import argparse
import math
import sys
import warnings
from pathlib import Path

from . import __version__
from .codes import (
    is_prefix_free_classical, is_prefix_free_quantum, kraft_sum_classical, quantum_kraft_sum,
)
from .compress import (
    ResourceLimitError, SweepRow, block_code, length_optimizing_check, rho_of, spectrum,
    sufficiency_experiment,
)
from .condense import CondensationWarning, isometry_check, simple_condense
from .formats import (
    ConfigError, format_code_table, format_csv, format_state, load_config,
)
from .machine import MachineError, format_trace, run_condense_program
from .qstate import DenseLimitError

MAX_STRING_QUBITS = 64


def _fmt(x: float) -> str:
    return f"{float(x) + 0.0:.12g}"  # + 0.0 turns -0.0 into 0.0


def _sum(x: float) -> str:
    return repr(round(float(x), 12) + 0.0)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def cmd_kraft(args) -> int:
    cfg = load_config(args.config)
    if cfg.code is not None:
        dims = cfg.code.dim_list()
        k = quantum_kraft_sum(cfg.code)
        pf = is_prefix_free_quantum(cfg.code)
    else:
        top = max(cfg.lengths)
        dims = [cfg.lengths.count(l) for l in range(1, top + 1)]
        k = quantum_kraft_sum({l: d for l, d in enumerate(dims, 1)})
        pf = False
    if cfg.classical is not None:
        print(f"classical Kraft sum = {_sum(kraft_sum_classical(cfg.classical))}, "
              f"prefix-free: {'yes' if is_prefix_free_classical(cfg.classical) else 'no'}")
    print(f"K = {_sum(k)}, prefix-free: {'yes' if pf else 'no'}, "
          f"d = [{','.join(map(str, dims))}]")
    if k > 1:
        print(f"Kraft violated: {_sum(k)}")
    return 0


def cmd_lift(args) -> int:
    cfg = load_config(args.config)
    if cfg.code is None:
        raise ConfigError(f"{args.config}: code violates Kraft; nothing to lift")
    _emit(format_code_table(cfg.code), args.out)
    return 0


def cmd_condense(args) -> int:
    cfg = load_config(args.config)
    if not cfg.inputs:
        raise ConfigError(f"{args.config}: missing [condense] inputs")
    n = len(cfg.inputs)
    if n * cfg.code.l_max > MAX_STRING_QUBITS:
        raise ResourceLimitError(f"{n * cfg.code.l_max} qubits exceed {MAX_STRING_QUBITS}")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", CondensationWarning)
        try:
            cs = simple_condense(cfg.code, cfg.inputs)
        except ValueError as exc:
            raise ConfigError(f"{args.config}: condense: {exc}") from None
    _emit(format_state(cs.state), args.out)
    report = sys.stdout if args.out else sys.stderr
    for w in caught:
        print(f"warning: {w.message}", file=report)
    try:
        iso = isometry_check(cfg.code, n)
    except ValueError:
        print(f"isometry: skipped ({cfg.code.size}^{n} products)", file=report)
    else:
        print(f"isometry: N={n}, products={iso.n_products}, "
              f"max Gram deviation={iso.max_deviation:.3g}, "
              f"collisions={len(iso.collisions)}, ok={'yes' if iso.ok else 'no'}", file=report)
    if args.machine:
        if cfg.classical is None or cfg.input_words is None:
            raise ConfigError(f"{args.config}: --machine needs a classical code and word inputs")
        state, trace = run_condense_program(cfg.classical, cfg.input_words)
        trace_path = (args.out + ".trace") if args.out else None
        if trace_path:
            Path(trace_path).write_text(format_trace(trace), encoding="utf-8", newline="\n")
        else:
            sys.stderr.write(format_trace(trace))
        half = state.clock // 2
        print(f"machine: tape={state.tape_bits} clock={state.clock} (2D, D={half}) "
              f"ancillas clear: {'yes' if state.ancillas_clear() else 'no'}", file=report)
    return 0


def _as_list(x) -> list:
    return list(x) if isinstance(x, (list, tuple)) else [x]


def cmd_compress(args) -> int:
    cfg = load_config(args.config)
    if cfg.ensemble is None:
        raise ConfigError(f"{args.config}: missing [ensemble]")
    sec = cfg.section("compress")
    ns = [int(n) for n in _as_list(sec.get("N", [4, 8, 12]))]
    deltas = [float(d) for d in _as_list(sec.get("deltas", [0.125, 0.25, 0.5]))]
    samples = int(sec.get("samples", 10_000))
    seed = args.seed if args.seed is not None else sec.get("seed")
    exact = True if args.exact else sec.get("exact")
    if not exact and seed is None:
        raise ConfigError(f"{args.config}: compress.seed is required for sampling")
    seed = int(seed) if seed is not None else 0
    ens = cfg.ensemble
    mean = ens.mean_length()
    l_max = cfg.code.l_max
    rows: list[SweepRow] = []
    summary = []
    for n in ns:
        if n < 1:
            raise ConfigError(f"{args.config}: compress.N must be positive")
        if n * l_max > MAX_STRING_QUBITS:
            raise ResourceLimitError(
                f"N={n} needs {n * l_max} qubits (limit {MAX_STRING_QUBITS}); "
                f"try N <= {MAX_STRING_QUBITS // l_max}")
        ells = sec.get("ells")
        block = sufficiency_experiment(ens, n, ells, samples=samples, seed=seed,
                                       exact_mode=exact)
        rows += block
        by_ell = {r.ell: r for r in block}
        for d in deltas:
            hi = min(n * l_max, math.ceil(n * (mean + d) - 1e-9))
            lo = max(0, math.floor(n * (mean - d) + 1e-9))
            parts = [f"N={n} delta={d:g}"]
            for tag, e in (("above", hi), ("below", lo)):
                r = by_ell.get(e)
                if r is not None:
                    parts.append(f"{tag}: ell={e} F={_fmt(r.avg_fidelity)} "
                                 f"[{_fmt(r.bound_lower)}, {_fmt(r.bound_upper)}]")
            summary.append("  ".join(parts))
    _emit(format_csv(SweepRow.FIELDS, [r.values() for r in rows]), args.out)
    report = sys.stdout if args.out else sys.stderr
    for line in summary:
        print(line, file=report)
    return 0


def cmd_entropy(args) -> int:
    cfg = load_config(args.config)
    sec = cfg.section("entropy")
    out = []
    if cfg.ensemble is not None:
        optimal, ident = length_optimizing_check(cfg.ensemble)
        out += [
            f"<l> = {_fmt(ident.avg_length)}",
            f"S(rho) = {_fmt(ident.entropy)}",
            f"D(rho||omega) = {_fmt(ident.rel_entropy)}",
            f"-log K = {_fmt(ident.minus_log_k)}",
            f"identity residual = {ident.residual:.3g}",
            f"<l> >= S(rho): {'yes' if ident.entropy_bound_ok else 'no'}",
            f"length-optimizing: {'yes' if optimal else 'no'}",
        ]
        if not optimal:
            out.append(f"overhead D(rho||omega) = {_fmt(ident.rel_entropy)} qubits per signal")
        eigs = spectrum(rho_of(cfg.ensemble))
    else:
        eigs = None
    if "spectrum" in sec:
        eigs = [float(x) for x in sec["spectrum"]]
    if eigs is not None:
        how = sec.get("construction", "shannon-fano")
        out.append(f"block coding ({how}): n, <l>/n, S, bound S <= <l>/n < S + 1/n")
        for n in _as_list(sec.get("block_sizes", [1, 2, 4])):
            _, rep = block_code(eigs, int(n), how)
            out.append(f"  {rep.n} {_fmt(rep.per_signal)} {_fmt(rep.entropy)} "
                       f"{'ok' if rep.bound_ok else 'VIOLATED'}")
    if not out:
        raise ConfigError(f"{args.config}: need [ensemble] or entropy.spectrum")
    print("\n".join(out))
    return 0


def cmd_selftest(args) -> int:
    from .selftest import run_all

    results = run_all(seed=args.seed if args.seed is not None else 2024)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return 0 if all(ok for _, ok, _ in results) else 1


COMMANDS = {
    "kraft": cmd_kraft, "lift": cmd_lift, "condense": cmd_condense,
    "compress": cmd_compress, "entropy": cmd_entropy, "selftest": cmd_selftest,
}


class _Parser(argparse.ArgumentParser):
    # usage mistakes are validation errors (1); 2 is reserved for resource limits
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="zefcode", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name != "selftest":
            p.add_argument("--config", required=True, help="TOML config file")
            p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--seed", type=int, help="master seed for sampling")
        if name == "compress":
            p.add_argument("--exact", action="store_true", help="enumerate all N-tuples")
        if name == "condense":
            p.add_argument("--machine", action="store_true",
                           help="also run the pointer machine and write its trace")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ResourceLimitError, DenseLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, MachineError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
