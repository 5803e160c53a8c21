"""Text formats: sparse-state files, code tables, experiment configs, CSV.

Sparse-state file: one ``bitstring re im`` line per support element, sorted
by bitstring. Code tables and configs are TOML documents; amplitudes are
written as ``"re im"`` strings keyed by bitstring.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .codes import (
    ClassicalCode, QuantumCode, huffman_from_probs, kraft_assign, lift_any,
    shannon_fano_lengths,
)
from .compress import Ensemble
from .qstate import SparseState, basis_state


class ConfigError(ValueError):
    """Malformed config or data file; the message names the offending field."""


def _num(x: float) -> str:
    x = float(x)
    if x == 0.0:
        x = 0.0  # drop the sign of -0.0
    return repr(x)


def format_state(state: SparseState) -> str:
    lines = []
    for bits in state.support():
        a = state[bits]
        lines.append(f"{bits} {_num(a.real)} {_num(a.imag)}\n")
    return "".join(lines)


def parse_amplitude(text: str | float | Sequence[float], where: str) -> complex:
    if isinstance(text, (int, float)):
        return complex(text)
    if isinstance(text, (list, tuple)):
        parts = list(text)
    else:
        parts = str(text).split()
    try:
        if len(parts) == 1:
            return complex(float(parts[0]))
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise ConfigError(f"{where}: expected 're im', got {text!r}")


def parse_state_text(text: str, source: str = "<state>") -> SparseState:
    amps: dict[str, complex] = {}
    width = None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        bits, *rest = line.split()
        if any(ch not in "01" for ch in bits):
            raise ConfigError(f"{source}:{lineno}: bad bitstring {bits!r}")
        if width is None:
            width = len(bits)
        elif len(bits) != width:
            raise ConfigError(f"{source}:{lineno}: bitstring length {len(bits)} != {width}")
        amps[bits] = amps.get(bits, 0j) + parse_amplitude(rest, f"{source}:{lineno}")
    if width is None:
        raise ConfigError(f"{source}: no amplitudes")
    return SparseState(width, amps)


def read_state(path: str | Path) -> SparseState:
    return parse_state_text(Path(path).read_text(encoding="utf-8"), str(path))


def write_state(path: str | Path, state: SparseState) -> None:
    Path(path).write_text(format_state(state), encoding="utf-8", newline="\n")


def state_from_table(table: Mapping[str, Any], where: str, width: int | None = None) -> SparseState:
    if not isinstance(table, Mapping) or not table:
        raise ConfigError(f"{where}: expected a table of bitstring = 're im'")
    amps = {}
    for bits, v in table.items():
        if any(ch not in "01" for ch in bits):
            raise ConfigError(f"{where}: bad bitstring {bits!r}")
        amps[bits] = parse_amplitude(v, f"{where}.{bits}")
    n = {len(b) for b in amps}
    if len(n) != 1:
        raise ConfigError(f"{where}: bitstrings of different lengths")
    state = SparseState(n.pop(), amps)
    if width is not None and state.num_qubits < width:
        state = state.padded(width)
    return state


def state_table(state: SparseState) -> dict[str, str]:
    return {b: f"{_num(state[b].real)} {_num(state[b].imag)}" for b in state.support()}


# -- code tables ----------------------------------------------------------------

def _toml_str(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def format_code_table(code: QuantumCode) -> str:
    out = io.StringIO()
    out.write(f"l_max = {code.l_max}\n")
    for l, states in code.sectors.items():
        for i, s in enumerate(states):
            out.write("\n[[basis]]\n")
            out.write(f"length = {l}\n")
            if code.labels.get(l):
                out.write(f"label = {_toml_str(code.label(l, i))}\n")
            items = ", ".join(f"{_toml_str(k)} = {_toml_str(v)}" for k, v in state_table(s).items())
            out.write(f"payload = {{ {items} }}\n")
    return out.getvalue()


def code_from_table(doc: Mapping[str, Any], where: str = "code") -> QuantumCode:
    try:
        l_max = int(doc["l_max"])
        rows = doc["basis"]
    except KeyError as exc:
        raise ConfigError(f"{where}: missing field {exc.args[0]!r}") from None
    sectors: dict[int, list[SparseState]] = {}
    labels: dict[int, list[str]] = {}
    for j, row in enumerate(rows):
        w = f"{where}.basis[{j}]"
        if "length" not in row or "payload" not in row:
            raise ConfigError(f"{w}: needs 'length' and 'payload'")
        l = int(row["length"])
        s = state_from_table(row["payload"], f"{w}.payload")
        if s.num_qubits != l:
            raise ConfigError(f"{w}: payload has {s.num_qubits} qubits, length is {l}")
        sectors.setdefault(l, []).append(s)
        labels.setdefault(l, []).append(str(row.get("label", f"e{l}.{len(labels.get(l, []))}")))
    try:
        return QuantumCode(l_max, sectors, {l: tuple(v) for l, v in labels.items()})
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def read_code_table(path: str | Path) -> QuantumCode:
    return code_from_table(_load_toml(path), str(path))


# -- experiment config ------------------------------------------------------------

@dataclass
class ExperimentConfig:
    """Parsed config document. Sections other than ``code`` are optional."""

    source: str
    raw: dict
    classical: ClassicalCode | None = None
    lengths: list[int] | None = None
    code: QuantumCode | None = None
    ensemble: Ensemble | None = None
    inputs: list[SparseState] = field(default_factory=list)
    input_words: list[str] | None = None

    def section(self, name: str) -> dict:
        sec = self.raw.get(name, {})
        if not isinstance(sec, dict):
            raise ConfigError(f"{self.source}: [{name}] must be a table")
        return sec


def _load_toml(path: str | Path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None


def load_config(path: str | Path) -> ExperimentConfig:
    return parse_config(_load_toml(path), str(path))


def parse_config(doc: dict, source: str = "<config>") -> ExperimentConfig:
    cfg = ExperimentConfig(source, doc)
    sec = cfg.section("code")
    if not sec:
        if "spectrum" in cfg.section("entropy"):
            return cfg  # spectrum-only block coding needs no code
        raise ConfigError(f"{source}: missing [code] section")
    where = f"{source}: code"
    l_max = sec.get("l_max")
    if "basis" in sec:
        cfg.code = code_from_table(sec, where)
    elif "words" in sec:
        words = sec["words"]
        if not words:
            raise ConfigError(f"{where}.words: no codewords")
        try:
            cfg.classical = ClassicalCode(tuple(str(w) for w in words))
        except ValueError as exc:
            raise ConfigError(f"{where}.words: {exc}") from None
        cfg.lengths = list(cfg.classical.lengths)
    elif "lengths" in sec:
        lengths = [int(l) for l in sec["lengths"]]
        if not lengths:
            raise ConfigError(f"{where}.lengths: no codewords")
        if any(l < 1 for l in lengths):
            raise ConfigError(f"{where}.lengths: lengths must be positive")
        cfg.lengths = lengths
        try:
            cfg.classical = kraft_assign(lengths)
        except ValueError:
            cfg.classical = None  # Kraft violated; only the sums are meaningful
    elif "probabilities" in sec:
        probs = [float(p) for p in sec["probabilities"]]
        how = sec.get("construction", "huffman")
        try:
            if how == "huffman":
                cfg.classical = huffman_from_probs(probs)
            elif how == "shannon-fano":
                cfg.classical = kraft_assign(shannon_fano_lengths(probs))
            else:
                raise ConfigError(f"{where}.construction: unknown {how!r}")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"{where}.probabilities: {exc}") from None
        cfg.lengths = list(cfg.classical.lengths)
    else:
        raise ConfigError(f"{where}: needs one of basis, words, lengths, probabilities")
    if cfg.code is None and cfg.classical is not None:
        width = int(l_max) if l_max is not None else cfg.classical.max_length
        if width < cfg.classical.max_length:
            raise ConfigError(f"{where}.l_max: shorter than the longest codeword")
        cfg.code = lift_any(cfg.classical, width)
    _parse_ensemble(cfg)
    _parse_inputs(cfg)
    return cfg


def _word_state(cfg: ExperimentConfig, word: str, where: str) -> SparseState:
    if cfg.code is None:
        raise ConfigError(f"{where}: no usable code")
    if len(word) > cfg.code.l_max or any(ch not in "01" for ch in word):
        raise ConfigError(f"{where}: bad codeword {word!r}")
    if cfg.classical is not None and word not in cfg.classical.codewords:
        raise ConfigError(f"{where}: {word!r} is not a codeword of the code")
    return basis_state(word).padded(cfg.code.l_max)


def _parse_ensemble(cfg: ExperimentConfig) -> None:
    sec = cfg.section("ensemble")
    if not sec:
        return
    where = f"{cfg.source}: ensemble"
    if cfg.code is None:
        raise ConfigError(f"{where}: the code violates Kraft; no ensemble possible")
    probs = sec.get("probabilities")
    if probs is None:
        raise ConfigError(f"{where}.probabilities: missing")
    probs = [float(p) for p in probs]
    if "words" in sec:
        states = [_word_state(cfg, str(w), f"{where}.words") for w in sec["words"]]
    elif "states" in sec:
        states = [state_from_table(t, f"{where}.states[{j}]", cfg.code.l_max)
                  for j, t in enumerate(sec["states"])]
        states = [SparseState(s.num_qubits, s.amplitudes, normalize=True) for s in states]
    elif cfg.classical is not None and len(probs) == len(cfg.classical):
        states = [_word_state(cfg, w, where) for w in cfg.classical.codewords]
    else:
        raise ConfigError(f"{where}: needs words or states")
    if len(states) != len(probs):
        raise ConfigError(f"{where}: {len(probs)} probabilities for {len(states)} states")
    try:
        cfg.ensemble = Ensemble(cfg.code, tuple(zip(probs, states)))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _parse_inputs(cfg: ExperimentConfig) -> None:
    sec = cfg.section("condense")
    if not sec:
        return
    where = f"{cfg.source}: condense"
    if "words" in sec:
        cfg.input_words = [str(w) for w in sec["words"]]
        cfg.inputs = [_word_state(cfg, w, f"{where}.words") for w in cfg.input_words]
    elif "states" in sec:
        cfg.inputs = [state_from_table(t, f"{where}.states[{j}]", cfg.code.l_max)
                      for j, t in enumerate(sec["states"])]
    elif "files" in sec:
        base = Path(cfg.source).parent
        cfg.inputs = [read_state(base / f) for f in sec["files"]]
    else:
        raise ConfigError(f"{where}: needs words, states or files")
    if not cfg.inputs:
        raise ConfigError(f"{where}: no inputs")


# -- CSV ------------------------------------------------------------------------

def _csv_num(x) -> str:
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isinf(x) or math.isnan(x):
        return str(x)
    s = f"{x:.12g}"
    return "0" if s == "-0" else s


def format_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    lines = [",".join(header)]
    lines += [",".join(_csv_num(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"
