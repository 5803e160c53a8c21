"""Classical prefix codes and indeterminate-length quantum codes.

A :class:`QuantumCode` is given by an orthonormal basis of length
eigenstates. Each basis vector of length ``l`` is stored by its payload,
a state on the first ``l`` qubits; its zero-extended form pads the payload
with |0> up to ``l_max`` qubits.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .qstate import (
    DensityMatrix, SparseState, TOL, basis_state, inner, _check_dense,
)


class KraftError(ValueError):
    """Codeword lengths violate the Kraft inequality."""


class PrefixError(ValueError):
    """A codeword is a prefix of another one."""


@dataclass(frozen=True)
class ClassicalCode:
    codewords: tuple[str, ...]

    def __post_init__(self):
        words = tuple(self.codewords)
        object.__setattr__(self, "codewords", words)
        if not words:
            raise ValueError("no codewords")
        for w in words:
            if not w or any(ch not in "01" for ch in w):
                raise ValueError(f"invalid codeword {w!r}")
        if len(set(words)) != len(words):
            raise ValueError("codewords are not distinct")

    def __len__(self) -> int:
        return len(self.codewords)

    def __iter__(self):
        return iter(self.codewords)

    @property
    def lengths(self) -> tuple[int, ...]:
        return tuple(len(w) for w in self.codewords)

    @property
    def max_length(self) -> int:
        return max(self.lengths)


def kraft_sum_classical(code: ClassicalCode | Iterable[str]) -> float:
    return float(sum(Fraction(1, 2 ** len(w)) for w in code))


def is_prefix_free_classical(code: ClassicalCode | Iterable[str]) -> bool:
    # after sorting, any prefix relation shows up between neighbours
    words = sorted(code)
    return not any(b.startswith(a) for a, b in zip(words, words[1:]))


def _check_probs(probs: Sequence[float]) -> list[float]:
    probs = [float(p) for p in probs]
    if not probs:
        raise ValueError("need at least one symbol")
    if any(p <= 0 for p in probs):
        raise ValueError("probabilities must be positive")
    if abs(math.fsum(probs) - 1.0) > 1e-10:
        raise ValueError(f"probabilities sum to {math.fsum(probs)!r}, not 1")
    return probs


def huffman_lengths(probs: Sequence[float]) -> list[int]:
    probs = _check_probs(probs)
    if len(probs) == 1:
        return [1]
    # (weight, earliest symbol, symbols in the subtree)
    heap = [(p, i, [i]) for i, p in enumerate(probs)]
    heapq.heapify(heap)
    depth = [0] * len(probs)
    while len(heap) > 1:
        p1, i1, s1 = heapq.heappop(heap)
        p2, i2, s2 = heapq.heappop(heap)
        for s in s1 + s2:
            depth[s] += 1
        heapq.heappush(heap, (p1 + p2, min(i1, i2), s1 + s2))
    return depth


def huffman_from_probs(probs: Sequence[float]) -> ClassicalCode:
    """Optimal prefix code; codewords are returned in symbol order."""
    return kraft_assign(huffman_lengths(probs))


def shannon_fano_lengths(probs: Sequence[float]) -> list[int]:
    """``max(1, ceil(-log2 p))`` per symbol."""
    probs = _check_probs(probs)
    # the 1e-12 slack keeps exact powers of two from rounding up
    return [max(1, math.ceil(-math.log2(p) - 1e-12)) for p in probs]


def kraft_assign(lengths: Sequence[int]) -> ClassicalCode:
    """Canonical prefix code with the given lengths, in input order.

    Words are handed out lexicographically in order of nondecreasing length.
    """
    lengths = [int(l) for l in lengths]
    if not lengths or any(l < 1 for l in lengths):
        raise ValueError("lengths must be positive")
    total = sum(Fraction(1, 2 ** l) for l in lengths)
    if total > 1:
        raise KraftError(f"Kraft violated: {float(total)}")
    order = sorted(range(len(lengths)), key=lambda i: (lengths[i], i))
    words = [""] * len(lengths)
    value, prev = 0, lengths[order[0]]
    for i in order:
        value <<= lengths[i] - prev
        prev = lengths[i]
        words[i] = format(value, f"0{prev}b")
        value += 1
    return ClassicalCode(tuple(words))


@dataclass(frozen=True)
class QuantumCode:
    """Orthonormal length-eigenstate basis, grouped by length.

    ``sectors[l]`` lists the payload states (on ``l`` qubits) spanning the
    length-``l`` eigenspace of the length observable.
    """

    l_max: int
    sectors: Mapping[int, tuple[SparseState, ...]]
    labels: Mapping[int, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        secs = {int(l): tuple(v) for l, v in sorted(self.sectors.items()) if len(v)}
        object.__setattr__(self, "sectors", secs)
        if self.l_max < 1:
            raise ValueError("l_max must be positive")
        if not secs:
            raise ValueError("no codewords")
        for l, states in secs.items():
            if not 1 <= l <= self.l_max:
                raise ValueError(f"sector length {l} outside 1..{self.l_max}")
            for s in states:
                if s.num_qubits != l:
                    raise ValueError(f"payload in sector {l} has {s.num_qubits} qubits")
        basis = [(l, i, st.padded(self.l_max))
                 for l, states in secs.items() for i, st in enumerate(states)]
        object.__setattr__(self, "_basis", basis)
        if self.is_classical:
            keys = [next(iter(b.items()))[0] for _, _, b in basis]
            if len(set(keys)) != len(keys):
                raise ValueError("code basis is not orthonormal")
            return
        for a in range(len(basis)):
            for b in range(a, len(basis)):
                g = inner(basis[a][2], basis[b][2])
                if abs(g - (1.0 if a == b else 0.0)) > TOL:
                    raise ValueError("code basis is not orthonormal")

    @classmethod
    def from_classical(cls, code: ClassicalCode, l_max: int) -> "QuantumCode":
        return lift_classical(code, l_max)

    @property
    def dims(self) -> dict[int, int]:
        return {l: len(v) for l, v in self.sectors.items()}

    def dim_list(self) -> list[int]:
        return [len(self.sectors.get(l, ())) for l in range(1, self.l_max + 1)]

    @property
    def size(self) -> int:
        return sum(self.dims.values())

    def basis(self) -> list[tuple[int, int, SparseState]]:
        """(length, index, zero-extended state) for every basis vector."""
        return list(self._basis)

    def label(self, l: int, i: int) -> str:
        labs = self.labels.get(l)
        return labs[i] if labs else f"e{l}.{i}"

    @property
    def is_classical(self) -> bool:
        return all(len(s) == 1 and abs(abs(next(iter(s.items()))[1]) - 1) < TOL
                   for states in self.sectors.values() for s in states)

    def expand(self, state: SparseState, tol: float = 1e-12):
        """Coefficients in the length basis and the residual norm.

        Returns ``([(l, i, c), ...], residual)`` where ``residual`` is the
        norm of the component outside the codeword subspace.
        """
        if state.num_qubits != self.l_max:
            raise ValueError(f"state has {state.num_qubits} qubits, code has l_max={self.l_max}")
        comps = []
        rest = dict(state.items())
        for l, i, b in self.basis():
            c = inner(b, state)
            for bits, a in b.items():
                rest[bits] = rest.get(bits, 0j) - c * a
            if abs(c) > tol:
                comps.append((l, i, c))
        # subtract explicitly; sqrt(|psi|^2 - captured) loses half the digits
        residual = math.sqrt(math.fsum(abs(a) ** 2 for a in rest.values()))
        return comps, residual

    def sector_weights(self, state: SparseState) -> dict[int, float]:
        comps, _ = self.expand(state, tol=0.0)
        out: dict[int, float] = {}
        for l, _, c in comps:
            out[l] = out.get(l, 0.0) + abs(c) ** 2
        return out

    def sector_projector(self, l: int) -> np.ndarray:
        _check_dense(self.l_max)
        dim = 2 ** self.l_max
        out = np.zeros((dim, dim), dtype=complex)
        for s in self.sectors.get(l, ()):
            v = s.padded(self.l_max).to_vector()
            out += np.outer(v, v.conj())
        return out

    def length_observable(self) -> np.ndarray:
        return sum(l * self.sector_projector(l) for l in self.sectors)

    def codeword_projector(self) -> np.ndarray:
        return sum(self.sector_projector(l) for l in self.sectors)


def lift_classical(code: ClassicalCode | Iterable[str], l_max: int | None = None) -> QuantumCode:
    """Quantum code whose length-l basis is the computational payloads of length l."""
    if not isinstance(code, ClassicalCode):
        code = ClassicalCode(tuple(code))
    if not is_prefix_free_classical(code):
        raise PrefixError(f"code {list(code)} is not prefix-free")
    l_max = code.max_length if l_max is None else l_max
    if code.max_length > l_max:
        raise ValueError(f"codeword longer than l_max={l_max}")
    return _lift(code, l_max)


def _lift(code: ClassicalCode, l_max: int) -> QuantumCode:
    sectors: dict[int, list[SparseState]] = {}
    labels: dict[int, list[str]] = {}
    for w in sorted(code, key=lambda w: (len(w), w)):
        sectors.setdefault(len(w), []).append(basis_state(w))
        labels.setdefault(len(w), []).append(w)
    return QuantumCode(l_max, sectors, {l: tuple(v) for l, v in labels.items()})


def lift_any(code: ClassicalCode | Iterable[str], l_max: int | None = None) -> QuantumCode:
    """Like :func:`lift_classical` but accepts codes that are not prefix-free."""
    if not isinstance(code, ClassicalCode):
        code = ClassicalCode(tuple(code))
    return _lift(code, code.max_length if l_max is None else l_max)


def quantum_kraft_sum(code: QuantumCode | Mapping[int, int]) -> float:
    """Tr 2^-Lambda over the codeword subspace; also accepts a ``{l: d_l}`` table."""
    dims = code.dims if isinstance(code, QuantumCode) else code
    return float(sum(Fraction(d, 2 ** l) for l, d in dims.items()))


def is_prefix_free_quantum(code: QuantumCode, tol: float = TOL) -> bool:
    """True iff shorter payloads are orthogonal to every longer codeword's prefix state.

    For each pair of sectors ``l < l2`` this evaluates
    ``Tr[P_l Tr_{l+1..l2}(pi_l2)]`` sparsely.
    """
    return prefix_overlap(code) <= tol


def prefix_overlap(code: QuantumCode) -> float:
    """Largest sector-pair overlap ``Tr[P_l Tr_{l+1..l2}(pi_l2)]``."""
    worst = 0.0
    lengths = sorted(code.sectors)
    for a, l in enumerate(lengths):
        shorts = code.sectors[l]
        for l2 in lengths[a + 1:]:
            total = 0.0
            for long in code.sectors[l2]:
                by_suffix: dict[str, dict[str, complex]] = {}
                for bits, amp in long.items():
                    by_suffix.setdefault(bits[l:], {})[bits[:l]] = amp
                for short in shorts:
                    for part in by_suffix.values():
                        s = sum((short[p].conjugate() * amp for p, amp in part.items()), 0j)
                        total += abs(s) ** 2
            worst = max(worst, total)
    return worst


@dataclass(frozen=True)
class BasisMap:
    """Unitary defined on a code basis: ``sources[j] -> targets[j]``."""

    sources: tuple[SparseState, ...]
    targets: tuple[SparseState, ...]

    def apply(self, state: SparseState) -> SparseState:
        out = None
        for s, t in zip(self.sources, self.targets):
            c = inner(s, state)
            if abs(c) > 0:
                term = t.scaled(c)
                out = term if out is None else out + term
        if out is None:
            return SparseState(state.num_qubits, {})
        return out

    def gram_deviation(self) -> float:
        n = len(self.targets)
        worst = 0.0
        for a in range(n):
            for b in range(n):
                g = inner(self.targets[a], self.targets[b])
                worst = max(worst, abs(g - (1.0 if a == b else 0.0)))
        return worst


def remap_to_prefix_free(code: QuantumCode) -> tuple[BasisMap, QuantumCode]:
    """Map each length-l basis vector to a canonical classical prefix codeword of length l."""
    basis = code.basis()
    lengths = [l for l, _, _ in basis]
    words = kraft_assign(lengths)
    new = lift_classical(words, code.l_max)
    targets = tuple(basis_state(w).padded(code.l_max) for w in words)
    vmap = BasisMap(tuple(b for _, _, b in basis), targets)
    for (l, _, _), w in zip(basis, words):
        assert len(w) == l
    return vmap, new


def _zef_density(rho, code: QuantumCode) -> np.ndarray:
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if m.shape != (2 ** code.l_max,) * 2:
        raise ValueError("density matrix does not live on the code register")
    return m


def avg_length(rho, code: QuantumCode, tol: float = 1e-8) -> float:
    """<l> = Tr rho Lambda, with a check that rho lives on the codeword subspace."""
    m = _zef_density(rho, code)
    inside = float(np.trace(m @ code.codeword_projector()).real)
    if abs(inside - np.trace(m).real) > tol:
        raise ValueError(f"state leaks {np.trace(m).real - inside:.3g} outside the codeword subspace")
    return math.fsum(l * float(np.trace(m @ code.sector_projector(l)).real)
                     for l in code.sectors)


def omega_operator(code: QuantumCode) -> DensityMatrix:
    """2^-Lambda / K on the codeword subspace."""
    k = quantum_kraft_sum(code)
    m = sum((2.0 ** -l / k) * code.sector_projector(l) for l in code.sectors)
    return DensityMatrix(m)
