"""Simple condensation of zero-extended codewords into one string.

Condensation is applied as the concatenation isometry on the code's length
basis: every product of basis vectors maps to the concatenation of their
payloads followed by |0> padding. The full unitary on ``N * l_max`` qubits
is never built.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .codes import QuantumCode, is_prefix_free_quantum
from .qstate import SparseState, TOL, inner, tensor

EXPAND_TOL = 1e-12
MEMBER_TOL = 1e-8


class CondensationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class CondensedString:
    state: SparseState
    code: QuantumCode
    n_words: int
    # per-word probability of each length
    word_lengths: tuple[Mapping[int, float], ...] = ()
    norm_deviation: float = 0.0

    def length_distribution(self) -> dict[int, float]:
        """P(total length = L), by convolving the per-word length laws."""
        dist = {0: 1.0}
        for w in self.word_lengths:
            nxt: dict[int, float] = {}
            for a, pa in dist.items():
                for l, pl in w.items():
                    nxt[a + l] = nxt.get(a + l, 0.0) + pa * pl
            dist = nxt
        return dist


def _expand_word(code: QuantumCode, word: SparseState) -> list[tuple[int, SparseState, complex]]:
    comps, residual = code.expand(word, tol=EXPAND_TOL)
    if residual > MEMBER_TOL:
        raise ValueError(f"input is not a codeword (residual norm {residual:.3g})")
    return [(l, code.sectors[l][i], c) for l, i, c in comps]


def _concatenate(expanded: Sequence[list[tuple[int, SparseState, complex]]],
                 total_qubits: int) -> SparseState:
    out: dict[str, complex] = {}
    for combo in itertools.product(*expanded):
        coeff = complex(1.0)
        payload = SparseState(0, {"": 1.0})
        for _, p, c in combo:
            coeff *= c
            payload = tensor(payload, p)
        pad = "0" * (total_qubits - payload.num_qubits)
        for bits, a in payload.items():
            key = bits + pad
            out[key] = out.get(key, 0j) + coeff * a
    return SparseState(total_qubits, out)


def simple_condense(code: QuantumCode, words: Sequence[SparseState]) -> CondensedString:
    """Concatenate payloads of N codewords, componentwise in the length basis."""
    expanded = [_expand_word(code, w) for w in words]
    state = _concatenate(expanded, len(words) * code.l_max)
    expected = math.prod(w.norm_squared() for w in words)
    deviation = abs(state.norm_squared() - expected)
    if deviation > TOL:
        warnings.warn(f"condensation is not norm preserving here (deviation {deviation:.3g}); "
                      "is the code prefix-free?", CondensationWarning, stacklevel=2)
    lengths = []
    for comps in expanded:
        dist: dict[int, float] = {}
        tot = math.fsum(abs(c) ** 2 for _, _, c in comps)
        for l, _, c in comps:
            dist[l] = dist.get(l, 0.0) + abs(c) ** 2 / tot
        lengths.append(dist)
    return CondensedString(state, code, len(words), tuple(lengths), deviation)


def uncondense(code: QuantumCode, state: SparseState, n_words: int) -> SparseState:
    """Undo simple condensation, returning the N-register product-space state.

    Reads payloads off the front of the string one word at a time. For a
    code with computational payloads this is greedy prefix parsing of each
    support bitstring; for general payloads it contracts against each basis
    payload. Raises if the state is not in the image of condensation.
    """
    if state.num_qubits != n_words * code.l_max:
        raise ValueError("state size does not match n_words * l_max")
    sectors = [(l, i, p) for l, ps in code.sectors.items() for i, p in enumerate(ps)]
    classical = {}
    if code.is_classical:
        for l, i, p in sectors:
            bits, amp = next(iter(p.items()))
            classical[bits] = (l, i, amp)
    # partial results: (register prefix so far, remaining string) -> amplitude
    layer: dict[tuple[str, str], complex] = {("", k): a for k, a in state.items()}
    for _ in range(n_words):
        nxt: dict[tuple[str, str], complex] = {}
        if classical:
            for (done, rest), a in layer.items():
                for l in code.sectors:
                    if rest[:l] in classical:
                        # coefficient conj(u) a on the basis vector u|w>: amplitude a on |w>
                        key = (done + rest[:l] + "0" * (code.l_max - l), rest[l:])
                        nxt[key] = nxt.get(key, 0j) + a
                        break
        else:
            for l, i, p in sectors:
                reg = p.padded(code.l_max)
                regbits = {}
                for (done, rest), a in layer.items():
                    c = p[rest[:l]]
                    if c != 0:
                        key = (done, rest[l:])
                        regbits[key] = regbits.get(key, 0j) + c.conjugate() * a
                for (done, rest), a in regbits.items():
                    for rb, ra in reg.items():
                        key = (done + rb, rest)
                        nxt[key] = nxt.get(key, 0j) + ra * a
        layer = nxt
    out: dict[str, complex] = {}
    for (done, rest), a in layer.items():
        if "1" in rest:
            continue
        out[done] = out.get(done, 0j) + a
    result = SparseState(state.num_qubits, out)
    lost = abs(state.norm_squared() - result.norm_squared())
    if lost > MEMBER_TOL:
        raise ValueError(f"state is outside the image of condensation (lost weight {lost:.3g})")
    return result


def split_product(state: SparseState, n_parts: int) -> list[SparseState]:
    """Factor a product state on ``n_parts`` equal registers (up to phase)."""
    width = state.num_qubits // n_parts
    if not len(state):
        raise ValueError("zero state")
    anchor = max(state.items(), key=lambda kv: abs(kv[1]))[0]
    parts = []
    for j in range(n_parts):
        lo, hi = j * width, (j + 1) * width
        amps = {bits[lo:hi]: a for bits, a in state.items()
                if bits[:lo] == anchor[:lo] and bits[hi:] == anchor[hi:]}
        parts.append(SparseState(width, amps, normalize=True))
    rebuilt = parts[0]
    for p in parts[1:]:
        rebuilt = tensor(rebuilt, p)
    fid = abs(inner(rebuilt, state)) ** 2 / state.norm_squared()
    if fid < 1 - MEMBER_TOL:
        raise ValueError("condensed string does not come from a product of codewords")
    return parts


def decondense(cs: CondensedString) -> list[SparseState]:
    """Recover the N input codewords (each up to a global phase)."""
    product = uncondense(cs.code, cs.state, cs.n_words)
    return split_product(product, cs.n_words)


@dataclass
class IsometryReport:
    n_words: int
    n_products: int
    max_deviation: float
    prefix_free: bool
    collisions: list[tuple[tuple[str, ...], tuple[str, ...]]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.max_deviation <= TOL


def isometry_check(code: QuantumCode, n_words: int, limit: int = 4096) -> IsometryReport:
    """Gram matrix of all condensed basis products against the identity."""
    basis = code.basis()
    n_products = len(basis) ** n_words
    if n_products > limit:
        raise ValueError(f"{n_products} products exceed the enumeration limit {limit}")
    images = []
    labels = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CondensationWarning)
        for combo in itertools.product(basis, repeat=n_words):
            images.append(simple_condense(code, [b for _, _, b in combo]).state)
            labels.append(tuple(code.label(l, i) for l, i, _ in combo))
    worst = 0.0
    collisions = []
    for a in range(n_products):
        for b in range(a, n_products):
            g = inner(images[a], images[b])
            dev = abs(g - (1.0 if a == b else 0.0))
            worst = max(worst, dev)
            if a != b and abs(abs(g) - 1.0) <= TOL:
                collisions.append((labels[a], labels[b]))
    return IsometryReport(n_words, n_products, worst, is_prefix_free_quantum(code), collisions)


def condensed_length_expectation(source, n_words: int | None = None) -> float:
    """Mean of the condensed length observable.

    ``source`` is a :class:`CondensedString`, or a single-word length law
    ``{l: p}`` together with ``n_words`` i.i.d. copies.
    """
    if isinstance(source, CondensedString):
        return math.fsum(l * p for w in source.word_lengths for l, p in w.items())
    if n_words is None:
        raise ValueError("n_words is required for a length distribution")
    return n_words * math.fsum(l * p for l, p in source.items())


def exact(p) -> Fraction:
    return p if isinstance(p, Fraction) else Fraction(p)


def sum_length_pmf(dist: Mapping[int, float | Fraction], n_words: int) -> dict[int, Fraction]:
    """Exact law of l_1 + ... + l_N for i.i.d. lengths with law ``dist``."""
    single = {l: exact(p) for l, p in dist.items() if p}
    out = {0: Fraction(1)}
    for _ in range(n_words):
        nxt: dict[int, Fraction] = {}
        for a, pa in out.items():
            for l, pl in single.items():
                nxt[a + l] = nxt.get(a + l, Fraction(0)) + pa * pl
        out = nxt
    return out


def deviation_probability(dist: Mapping[int, float | Fraction], n_words: int,
                          delta: float) -> Fraction:
    """P(|Lambda_N - N<l>| > N delta), exactly."""
    single = {l: exact(p) for l, p in dist.items()}
    mean = n_words * sum(l * p for l, p in single.items())
    gap = n_words * exact(delta)
    pmf = sum_length_pmf(single, n_words)
    return sum((p for L, p in pmf.items() if abs(L - mean) > gap), Fraction(0))


def convolve_dims(dims: Mapping[int, int], n_words: int) -> dict[int, int]:
    """Number of basis products with each total length."""
    out = {0: 1}
    for _ in range(n_words):
        nxt: dict[int, int] = {}
        for a, ca in out.items():
            for l, d in dims.items():
                if d:
                    nxt[a + l] = nxt.get(a + l, 0) + ca * d
        out = nxt
    return out


@dataclass
class DimensionReport:
    n_words: int
    counts: dict[int, int]
    violations: list[int]
    kraft: float
    power_bound_ok: bool | None

    @property
    def ok(self) -> bool:
        return not self.violations


def dimension_count_check(code: QuantumCode | Mapping[int, int], n_words: int) -> DimensionReport:
    """Check sum over l_1+..+l_N = L of d_l1...d_lN <= 2^L for every L."""
    dims = code.dims if isinstance(code, QuantumCode) else dict(code)
    l_max = code.l_max if isinstance(code, QuantumCode) else max(dims)
    if n_words * l_max > 40:
        raise ValueError("N * l_max must be at most 40")
    counts = convolve_dims(dims, n_words)
    violations = sorted(L for L, c in counts.items() if c > 2 ** L)
    k = sum(Fraction(d, 2 ** l) for l, d in dims.items())
    power_ok = (k ** n_words <= n_words * l_max) if k <= 1 else None
    return DimensionReport(n_words, counts, violations, float(k), power_ok)

