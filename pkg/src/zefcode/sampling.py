"""Seeded random codes, codewords, ensembles, density matrices and projectors."""
from __future__ import annotations

import numpy as np

from .codes import QuantumCode, kraft_assign
from .compress import Ensemble
from .qstate import SparseState, basis_state


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_lengths(rng: np.random.Generator, l_max: int, max_words: int = 6,
                   saturate: bool = False) -> list[int]:
    """Codeword lengths in 1..l_max satisfying Kraft; optionally with K = 1."""
    budget = 1.0
    lengths: list[int] = []
    target = int(rng.integers(1, max_words + 1))
    while len(lengths) < target:
        options = [l for l in range(1, l_max + 1) if 2.0 ** -l <= budget + 1e-15]
        if not options:
            break
        l = int(rng.choice(options))
        lengths.append(l)
        budget -= 2.0 ** -l
    if saturate:
        # fill the remaining Kraft budget greedily with the longest words that fit
        while budget > 1e-15:
            l = next(l for l in range(1, l_max + 1) if 2.0 ** -l <= budget + 1e-15)
            lengths.append(l)
            budget -= 2.0 ** -l
    return sorted(lengths)


def random_code(rng: np.random.Generator, l_max: int | None = None, max_words: int = 6,
                saturate: bool = False, mix: bool = True) -> QuantumCode:
    """Prefix-free code: canonical words of random lengths, rotated within each sector."""
    l_max = int(rng.integers(1, 5)) if l_max is None else l_max
    lengths = random_lengths(rng, l_max, max_words, saturate)
    words = kraft_assign(lengths)
    sectors: dict[int, list[SparseState]] = {}
    for w in words:
        sectors.setdefault(len(w), []).append(basis_state(w))
    if mix:
        for l, states in sectors.items():
            u = random_unitary(rng, len(states))
            rotated = []
            for col in range(len(states)):
                amps: dict[str, complex] = {}
                for row, s in enumerate(states):
                    for bits, a in s.items():
                        amps[bits] = amps.get(bits, 0j) + u[row, col] * a
                rotated.append(SparseState(l, amps))
            sectors[l] = rotated
    return QuantumCode(l_max, sectors)


def random_codeword(rng: np.random.Generator, code: QuantumCode,
                    max_terms: int | None = None) -> SparseState:
    """Normalized random superposition of a few basis vectors of ``code``."""
    basis = code.basis()
    k = len(basis) if max_terms is None else min(max_terms, len(basis))
    k = int(rng.integers(1, k + 1))
    picks = rng.choice(len(basis), size=k, replace=False)
    coeffs = rng.normal(size=k) + 1j * rng.normal(size=k)
    amps: dict[str, complex] = {}
    for c, j in zip(coeffs, picks):
        for bits, a in basis[j][2].items():
            amps[bits] = amps.get(bits, 0j) + c * a
    return SparseState(code.l_max, amps, normalize=True)


def random_ensemble(rng: np.random.Generator, code: QuantumCode,
                    max_states: int = 4) -> Ensemble:
    n = int(rng.integers(1, max_states + 1))
    probs = rng.dirichlet(np.ones(n))
    probs = probs / probs.sum()
    states = [random_codeword(rng, code) for _ in range(n)]
    return Ensemble(code, tuple(zip(probs.tolist(), states)))


def random_density(rng: np.random.Generator, dim: int, rank: int | None = None) -> np.ndarray:
    rank = int(rng.integers(1, dim + 1)) if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real


def random_projector(rng: np.random.Generator, dim: int, rank: int | None = None) -> np.ndarray:
    rank = int(rng.integers(0, dim + 1)) if rank is None else rank
    u = random_unitary(rng, dim)[:, :rank]
    return u @ u.conj().T
