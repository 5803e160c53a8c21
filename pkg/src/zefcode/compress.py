"""Compression by truncating condensed strings, and entropy/length identities.

A source emits zero-extended codewords with given probabilities. ``N`` of
them are condensed into one string; the string is cut after ``ell`` qubits
and restored by appending |0> qubits. This module measures the resulting
fidelity, the exact length-tail probabilities that bound it from below and
above, and the identity <l> = S(rho) + D(rho||omega) - log K.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .codes import (
    QuantumCode, huffman_lengths, kraft_assign, lift_classical, omega_operator,
    quantum_kraft_sum, shannon_fano_lengths,
)
from .condense import (
    CondensedString, _concatenate, _expand_word, exact, sum_length_pmf,
)
from .qstate import (
    DensityMatrix, SparseState, basis_state, partial_trace, relative_entropy,
    shannon_entropy, von_neumann_entropy,
)

EXACT_LIMIT = 65536


class ResourceLimitError(RuntimeError):
    """A request is too large for the desk-scale limits."""


@dataclass(frozen=True)
class Ensemble:
    code: QuantumCode
    entries: tuple[tuple[float, SparseState], ...]

    def __post_init__(self):
        entries = tuple((float(p), s) for p, s in self.entries)
        object.__setattr__(self, "entries", entries)
        if not entries:
            raise ValueError("empty ensemble")
        if any(p <= 0 for p, _ in entries):
            raise ValueError("probabilities must be positive")
        total = math.fsum(p for p, _ in entries)
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"probabilities sum to {total!r}")
        for _, s in entries:
            if not s.normalized:
                raise ValueError("ensemble states must be normalized")
            _, residual = self.code.expand(s)
            if residual > 1e-8:
                raise ValueError("ensemble state is not a codeword")

    @classmethod
    def from_words(cls, code: QuantumCode, words: Sequence[str],
                   probs: Sequence[float]) -> "Ensemble":
        """Computational-basis codewords given by their payload bits."""
        if len(words) != len(probs):
            raise ValueError("need one probability per word")
        states = [basis_state(w).padded(code.l_max) for w in words]
        return cls(code, tuple(zip(probs, states)))

    @property
    def probs(self) -> list[float]:
        return [p for p, _ in self.entries]

    @property
    def states(self) -> list[SparseState]:
        return [s for _, s in self.entries]

    def length_law(self) -> dict[int, Fraction]:
        """Single-word law of the length observable, as exact fractions."""
        out: dict[int, Fraction] = {}
        for p, s in self.entries:
            for l, w in self.code.sector_weights(s).items():
                out[l] = out.get(l, Fraction(0)) + exact(p) * exact(w)
        return {l: v for l, v in out.items() if v}

    def mean_length(self) -> float:
        return float(sum(l * p for l, p in self.length_law().items()))


def rho_of(ensemble: Ensemble) -> DensityMatrix:
    return DensityMatrix.mixture(ensemble.entries)


def spectrum(rho) -> list[float]:
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    w = np.linalg.eigvalsh((m + m.conj().T) / 2)
    return sorted((float(x) for x in w if x > 1e-12), reverse=True)


# -- truncation channel -------------------------------------------------------

def truncate_and_restore(state: SparseState, ell: int) -> DensityMatrix:
    """Keep the first ``ell`` qubits and append |0...0> for the rest."""
    n = state.num_qubits
    if not 0 <= ell <= n:
        raise ValueError(f"ell={ell} outside 0..{n}")
    kept = partial_trace(state, range(1, ell + 1)).matrix
    zeros = np.zeros((2 ** (n - ell),) * 2, dtype=complex)
    zeros[0, 0] = 1.0
    return DensityMatrix(np.kron(kept, zeros), validate=False)


truncated_state = truncate_and_restore


def truncation_fidelity(state: SparseState, ell: int) -> float:
    """<phi| sigma |phi> without building sigma.

    Grouping amplitudes as a[x, y] by kept prefix x and dropped suffix y,
    F = sum_y |sum_x conj(a[x, y]) a[x, 0...0]|^2.
    """
    n = state.num_qubits
    if not 0 <= ell <= n:
        raise ValueError(f"ell={ell} outside 0..{n}")
    zero = "0" * (n - ell)
    head = {bits[:ell]: a for bits, a in state.items() if bits[ell:] == zero}
    if not head:
        return 0.0
    acc: dict[str, complex] = {}
    for bits, a in state.items():
        h = head.get(bits[:ell])
        if h is not None:
            y = bits[ell:]
            acc[y] = acc.get(y, 0j) + a.conjugate() * h
    return math.fsum(abs(v) ** 2 for v in acc.values()) / state.norm_squared() ** 2


def kept_weight(state: SparseState, ell: int) -> float:
    """alpha^2: squared norm of the part that is |0> after qubit ``ell``."""
    zero = "0" * (state.num_qubits - ell)
    return math.fsum(abs(a) ** 2 for bits, a in state.items() if bits[ell:] == zero)


def tail_probability(state, code: QuantumCode | None, ell: int) -> float:
    """P(length > ell) for a codeword, or for a condensed string if ``code`` is None."""
    if isinstance(state, CondensedString):
        dist = state.length_distribution()
    else:
        if code is None:
            raise ValueError("a code is needed for a plain state")
        _, residual = code.expand(state)
        if residual > 1e-8:
            raise ValueError("state leaks outside the codeword subspace")
        dist = code.sector_weights(state)
    total = math.fsum(dist.values())
    return math.fsum(p for l, p in dist.items() if l > ell) / total


@dataclass
class SufficiencyReport:
    ell: int
    fidelity: float
    alpha: float
    eta: float
    chain: tuple[float, float, float, float]
    holds: bool


def sufficiency_bound_check(state, code: QuantumCode | None, ell: int,
                            tol: float = 1e-9) -> SufficiencyReport:
    """Check F >= alpha^4 >= (1 - eta)^2 >= 1 - 2 eta for one codeword."""
    psi = state.state if isinstance(state, CondensedString) else state
    f = truncation_fidelity(psi, ell)
    a2 = kept_weight(psi, ell) / psi.norm_squared()
    eta = tail_probability(state, code, ell)
    chain = (f, a2 * a2, (1 - eta) ** 2, 1 - 2 * eta)
    holds = all(x >= y - tol for x, y in zip(chain, chain[1:]))
    return SufficiencyReport(ell, f, math.sqrt(a2), eta, chain, holds)


# -- exact tails ----------------------------------------------------------------

def tail_above(law: Mapping[int, Fraction], n_words: int, ell: float) -> Fraction:
    """P(Lambda_N > ell)."""
    return sum((p for L, p in sum_length_pmf(law, n_words).items() if L > ell), Fraction(0))


def tail_below(law: Mapping[int, Fraction], n_words: int, ell: float) -> Fraction:
    """P(Lambda_N < ell)."""
    return sum((p for L, p in sum_length_pmf(law, n_words).items() if L < ell), Fraction(0))


def partial_sum_pmfs(law: Mapping[int, Fraction], n_words: int) -> list[dict[int, Fraction]]:
    """Exact pmfs of Lambda_m for m = 0..n_words."""
    out = [{0: Fraction(1)}]
    for _ in range(n_words):
        prev, nxt = out[-1], {}
        for a, pa in prev.items():
            for l, pl in law.items():
                nxt[a + l] = nxt.get(a + l, Fraction(0)) + pa * pl
        out.append(nxt)
    return out


def necessity_upper_bound(ensemble: Ensemble, n_words: int, ell: float,
                          lam: float | None = None,
                          pmfs: Sequence[Mapping[int, Fraction]] | None = None) -> tuple[float, int]:
    """Smallest ||W|| + 15 sqrt(alpha) over splits k = 1..N-1, capped at 1.

    ``alpha^2 = P(Lambda_{N-k} < ell)``. The bound holds for every split,
    so the minimum is a valid bound on the average fidelity. Returns the
    bound and the split that achieves it (0 when the cap is hit).
    """
    lam = max(spectrum(rho_of(ensemble))) if lam is None else lam
    if pmfs is None:
        pmfs = partial_sum_pmfs(ensemble.length_law(), n_words)
    best, best_k = 1.0, 0
    for k in range(1, n_words):
        a2 = float(sum((p for L, p in pmfs[n_words - k].items() if L < ell), Fraction(0)))
        b = lam ** k + 15 * math.sqrt(math.sqrt(a2))
        if b < best:
            best, best_k = b, k
    return best, best_k


@dataclass
class NecessityReport:
    n_words: int
    k: int
    delta: float
    ell: float
    lam_max: float
    w_norm: float
    alpha_sq: float
    bound: float
    side_condition: bool

    @property
    def informative(self) -> bool:
        return self.bound < 1.0


def necessity_bound(ensemble: Ensemble, n_words: int, k: int, delta: float,
                    strict: bool = True) -> NecessityReport:
    """Upper bound ||W|| + 15 sqrt(alpha) at ell = N(<l> - delta).

    ``strict`` raises when ell > (N - k)(<l> - delta / 2).
    """
    lams = spectrum(rho_of(ensemble))
    if len(lams) < 2:
        raise ValueError("the source must have more than one codeword state")
    if not 0 < k < n_words:
        raise ValueError("need 0 < k < N")
    law = ensemble.length_law()
    mean = sum(l * p for l, p in law.items())
    ell = n_words * (mean - exact(delta))
    side = ell <= (n_words - k) * (mean - exact(delta) / 2)
    if strict and not side:
        raise ValueError(f"side condition fails: ell={float(ell):g} > "
                         f"(N-k)(<l>-delta/2)={float((n_words - k) * (mean - exact(delta) / 2)):g}")
    lam = lams[0]
    a2 = float(tail_below(law, n_words - k, ell))
    w = lam ** k
    return NecessityReport(n_words, k, delta, float(ell), lam, w, a2,
                           w + 15 * math.sqrt(math.sqrt(a2)), side)


def plan_necessity(ensemble: Ensemble, eps: float, delta: float,
                   max_words: int = 4096) -> tuple[int, int]:
    """Smallest (k, N) with lambda^k < eps/2 and 15 sqrt(alpha) < eps/2.

    Tails here use floating-point convolution so that large N stay cheap.
    """
    lams = spectrum(rho_of(ensemble))
    if len(lams) < 2:
        raise ValueError("the source must have more than one codeword state")
    k = 1
    while lams[0] ** k >= eps / 2:
        k += 1
    law = ensemble.length_law()
    lmax = max(law)
    single = np.zeros(lmax + 1)
    for l, p in law.items():
        single[l] = float(p)
    mean = float(sum(l * p for l, p in law.items()))
    pmf = np.array([1.0])
    # pmf of Lambda_{N-k}, grown one word at a time
    for n in range(k + 1, max_words + 1):
        pmf = np.convolve(pmf, single)
        ell = n * (mean - delta)
        if ell > (n - k) * (mean - delta / 2):
            continue
        a2 = float(pmf[: math.ceil(ell)].sum())
        if 15 * math.sqrt(math.sqrt(max(a2, 0.0))) < eps / 2:
            return k, n
    raise ResourceLimitError(f"no N <= {max_words} reaches eps={eps}")


# -- sweeps ---------------------------------------------------------------------

@dataclass
class SweepRow:
    n_words: int
    ell: int
    eta_exact: float
    avg_fidelity: float
    stderr: float
    bound_lower: float
    bound_upper: float

    FIELDS = ("N", "ell", "eta_exact", "avg_fidelity", "stderr", "bound_lower", "bound_upper")

    def values(self) -> tuple:
        return (self.n_words, self.ell, self.eta_exact, self.avg_fidelity, self.stderr,
                self.bound_lower, self.bound_upper)


def _mean_and_stderr(values: Sequence[float]) -> tuple[float, float]:
    n = len(values)
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var / n)


def sufficiency_experiment(ensemble: Ensemble, n_words: int, ells: Iterable[int] | None = None,
                           samples: int = 10_000, seed: int = 0,
                           exact_mode: bool | None = None,
                           upper_bounds: bool = True) -> list[SweepRow]:
    """Average fidelity after truncation at each ``ell``, plus exact bounds.

    Enumerates all N-tuples when there are at most 65536 of them (or when
    ``exact_mode`` is True); otherwise draws ``samples`` seeded tuples and
    evaluates every ``ell`` on the same draws.
    """
    code = ensemble.code
    total = n_words * code.l_max
    ells = list(range(total + 1)) if ells is None else sorted(set(int(e) for e in ells))
    if any(not 0 <= e <= total for e in ells):
        raise ValueError(f"ell outside 0..{total}")
    n_tuples = len(ensemble.entries) ** n_words
    if exact_mode is None:
        exact_mode = n_tuples <= EXACT_LIMIT
    if exact_mode and n_tuples > EXACT_LIMIT:
        raise ResourceLimitError(
            f"{n_tuples} tuples exceed the exact-enumeration limit {EXACT_LIMIT}")
    if not exact_mode and samples < 1:
        raise ValueError("samples must be positive")
    expanded = [_expand_word(code, s) for s in ensemble.states]
    probs = ensemble.probs

    per_ell: dict[int, list[float]] = {e: [] for e in ells}
    weights: list[float] = []
    if exact_mode:
        draws = itertools.product(range(len(probs)), repeat=n_words)
    else:
        rng = np.random.default_rng(seed)
        picks = rng.choice(len(probs), size=(samples, n_words), p=probs)
        draws = (tuple(row) for row in picks)
    cache: dict[tuple, list[float]] = {}
    for draw in draws:
        fids = cache.get(draw)
        if fids is None:
            psi = _concatenate([expanded[i] for i in draw], total)
            fids = [truncation_fidelity(psi, e) for e in ells]
            if len(cache) < 100_000:
                cache[draw] = fids
        for e, f in zip(ells, fids):
            per_ell[e].append(f)
        if exact_mode:
            weights.append(math.prod(probs[i] for i in draw))

    pmfs = partial_sum_pmfs(ensemble.length_law(), n_words)
    pmf = pmfs[n_words]
    lam = max(spectrum(rho_of(ensemble)))
    rows = []
    for e in ells:
        if exact_mode:
            avg = math.fsum(w * f for w, f in zip(weights, per_ell[e]))
            err = 0.0
        else:
            avg, err = _mean_and_stderr(per_ell[e])
        eta = float(sum((p for L, p in pmf.items() if L > e), Fraction(0)))
        upper = necessity_upper_bound(ensemble, n_words, e, lam, pmfs)[0] if upper_bounds else 1.0
        rows.append(SweepRow(n_words, e, eta, avg, err, max(0.0, 1 - 2 * eta), upper))
    return rows


@dataclass
class NecessityRow:
    n_words: int
    delta: float
    ell: int
    avg_fidelity: float
    stderr: float
    bound: float
    k: int


def necessity_experiment(ensemble: Ensemble, n_words: int,
                         deltas: Sequence[float] = (0.125, 0.25, 0.5),
                         samples: int = 10_000, seed: int = 0,
                         exact_mode: bool | None = None) -> list[NecessityRow]:
    """Average fidelity at ell = floor(N(<l> - delta)) next to the upper bound there."""
    mean = ensemble.mean_length()
    ells = {d: max(0, math.floor(n_words * (mean - d) + 1e-9)) for d in deltas}
    rows = sufficiency_experiment(ensemble, n_words, sorted(set(ells.values())), samples,
                                  seed, exact_mode, upper_bounds=False)
    by_ell = {r.ell: r for r in rows}
    pmfs = partial_sum_pmfs(ensemble.length_law(), n_words)
    lam = max(spectrum(rho_of(ensemble)))
    out = []
    for d in deltas:
        r = by_ell[ells[d]]
        bound, k = necessity_upper_bound(ensemble, n_words, r.ell, lam, pmfs)
        out.append(NecessityRow(n_words, d, r.ell, r.avg_fidelity, r.stderr, bound, k))
    return out


# -- entropy and length -----------------------------------------------------------

@dataclass
class LengthIdentity:
    avg_length: float
    entropy: float
    rel_entropy: float
    kraft: float
    residual: float
    entropy_bound_ok: bool

    @property
    def minus_log_k(self) -> float:
        return -math.log2(self.kraft)


def length_identity(ensemble: Ensemble) -> LengthIdentity:
    """Evaluate <l> directly and as S(rho) + D(rho||omega) - log K."""
    code = ensemble.code
    rho = rho_of(ensemble)
    lam_op = code.length_observable()
    avg = float(np.trace(rho.matrix @ lam_op).real)
    s = von_neumann_entropy(rho)
    omega = omega_operator(code)
    d = relative_entropy(rho, omega)
    k = quantum_kraft_sum(code)
    residual = avg - (s + d - math.log2(k))
    return LengthIdentity(avg, s, d, k, residual, avg >= s - 1e-9)


def length_optimizing_check(ensemble: Ensemble, tol: float = 1e-9) -> tuple[bool, LengthIdentity]:
    ident = length_identity(ensemble)
    rho = rho_of(ensemble).matrix
    omega = omega_operator(ensemble.code).matrix
    close = float(np.max(np.abs(rho - omega))) <= tol
    return abs(ident.kraft - 1.0) <= 1e-10 and close, ident


def block_spectrum(eigs: Sequence[float], n: int) -> list[float]:
    eigs = [float(x) for x in eigs if x > 1e-12]
    if len(eigs) ** n > EXACT_LIMIT:
        raise ResourceLimitError(f"{len(eigs)}^{n} block eigenvalues exceed {EXACT_LIMIT}")
    return [math.prod(c) for c in itertools.product(eigs, repeat=n)]


@dataclass
class BlockCodeReport:
    n: int
    entropy: float
    avg_length: float
    per_signal: float
    lengths: list[int]
    bound_ok: bool


def block_code(rho, n: int, construction: str = "shannon-fano",
               tol: float = 1e-9) -> tuple[QuantumCode, BlockCodeReport]:
    """Prefix code on the eigenbasis of rho^(x)n; checks S <= <l>/n < S + 1/n."""
    if isinstance(rho, DensityMatrix) or (isinstance(rho, np.ndarray) and rho.ndim == 2):
        eigs = spectrum(rho)
    else:
        eigs = [float(x) for x in rho]
    total = math.fsum(eigs)
    eigs = [x / total for x in eigs]
    probs = block_spectrum(eigs, n)
    norm = math.fsum(probs)
    probs = [p / norm for p in probs]
    if construction == "shannon-fano":
        lengths = shannon_fano_lengths(probs)
    elif construction == "huffman":
        lengths = huffman_lengths(probs)
    else:
        raise ValueError(f"unknown construction {construction!r}")
    code = lift_classical(kraft_assign(lengths))
    s = shannon_entropy(eigs)
    avg = math.fsum(p * l for p, l in zip(probs, lengths))
    ok = s - tol <= avg / n < s + 1 / n + tol
    return code, BlockCodeReport(n, s, avg, avg / n, lengths, ok)

