"""Sparse pure states and small dense density operators.

Pure states are stored as a mapping from bitstrings to complex amplitudes.
Qubits are numbered from 1, left to right: qubit 1 is ``bits[0]``.
Anything that needs a matrix (entropies, Uhlmann fidelity, partial traces)
goes through :class:`DensityMatrix`, which is capped at ``DENSE_LIMIT`` qubits.
"""
from __future__ import annotations

import math
from collections import defaultdict
from typing import Iterable, Mapping, Sequence

import numpy as np

PRUNE = 1e-14
TOL = 1e-10
DENSE_LIMIT = 12


class DenseLimitError(ValueError):
    """Raised when a dense operation would exceed ``DENSE_LIMIT`` qubits."""


def _check_dense(n: int) -> None:
    if n > DENSE_LIMIT:
        raise DenseLimitError(
            f"dense operation on {n} qubits exceeds the {DENSE_LIMIT}-qubit limit"
        )


def _check_bits(bits: str) -> None:
    if any(ch not in "01" for ch in bits):
        raise ValueError(f"not a bitstring: {bits!r}")


class SparseState:
    """A pure state on ``num_qubits`` qubits with sparse amplitudes.

    Instances are treated as immutable. ``normalized`` is False for
    intermediate results whose norm was not checked or does not equal 1.
    """

    __slots__ = ("num_qubits", "_amps", "normalized")

    def __init__(self, num_qubits: int, amplitudes: Mapping[str, complex],
                 *, normalize: bool = False, check: bool = False):
        if num_qubits < 0:
            raise ValueError("num_qubits must be non-negative")
        amps: dict[str, complex] = {}
        for bits, a in amplitudes.items():
            if len(bits) != num_qubits:
                raise ValueError(
                    f"bitstring {bits!r} does not have {num_qubits} qubits")
            _check_bits(bits)
            a = complex(a)
            if abs(a) >= PRUNE:
                amps[bits] = amps.get(bits, 0j) + a
        self.num_qubits = num_qubits
        if normalize:
            nrm = math.sqrt(math.fsum(abs(a) ** 2 for a in amps.values()))
            if nrm == 0.0:
                raise ValueError("cannot normalize the zero vector")
            amps = {k: a / nrm for k, a in amps.items()}
        self._amps = amps
        norm2 = self.norm_squared()
        if check and abs(norm2 - 1.0) > TOL:
            raise ValueError(f"state is not normalized: |psi|^2 = {norm2!r}")
        self.normalized = abs(norm2 - 1.0) <= TOL

    @property
    def amplitudes(self) -> dict[str, complex]:
        return dict(self._amps)

    def items(self):
        return self._amps.items()

    def support(self) -> list[str]:
        return sorted(self._amps)

    def __getitem__(self, bits: str) -> complex:
        return self._amps.get(bits, 0j)

    def __len__(self) -> int:
        return len(self._amps)

    def __repr__(self) -> str:
        terms = ", ".join(f"|{k}>: {v:.6g}" for k, v in sorted(self._amps.items()))
        return f"SparseState({self.num_qubits}, {{{terms}}})"

    def norm_squared(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self._amps.values())

    def norm(self) -> float:
        return math.sqrt(self.norm_squared())

    def scaled(self, c: complex) -> "SparseState":
        return SparseState(self.num_qubits, {k: c * a for k, a in self._amps.items()})

    def __add__(self, other: "SparseState") -> "SparseState":
        if other.num_qubits != self.num_qubits:
            raise ValueError("dimension mismatch")
        out = dict(self._amps)
        for k, a in other.items():
            out[k] = out.get(k, 0j) + a
        return SparseState(self.num_qubits, out)

    def __sub__(self, other: "SparseState") -> "SparseState":
        return self + other.scaled(-1)

    def padded(self, num_qubits: int) -> "SparseState":
        """Append |0> qubits up to ``num_qubits``."""
        extra = num_qubits - self.num_qubits
        if extra < 0:
            raise ValueError("cannot pad to fewer qubits")
        return SparseState(num_qubits, {k + "0" * extra: a for k, a in self.items()})

    def to_vector(self) -> np.ndarray:
        _check_dense(self.num_qubits)
        vec = np.zeros(2 ** self.num_qubits, dtype=complex)
        for bits, a in self.items():
            vec[int(bits, 2) if bits else 0] = a
        return vec

    @classmethod
    def from_vector(cls, vec: Sequence[complex], **kw) -> "SparseState":
        vec = np.asarray(vec, dtype=complex)
        n = int(round(math.log2(len(vec)))) if len(vec) > 1 else 0
        if 2 ** n != len(vec):
            raise ValueError("vector length is not a power of two")
        amps = {format(i, f"0{n}b") if n else "": a
                for i, a in enumerate(vec) if abs(a) >= PRUNE}
        return cls(n, amps, **kw)

    def projector(self) -> "DensityMatrix":
        v = self.to_vector()
        return DensityMatrix(np.outer(v, v.conj()), validate=False)


def basis_state(bits: str) -> SparseState:
    return SparseState(len(bits), {bits: 1.0})


def inner(a: SparseState, b: SparseState) -> complex:
    """<a|b>, summed over the smaller support."""
    if a.num_qubits != b.num_qubits:
        raise ValueError(f"dimension mismatch: {a.num_qubits} vs {b.num_qubits}")
    if len(a) > len(b):
        return sum((a[k].conjugate() * v for k, v in b.items()), 0j)
    return sum((v.conjugate() * b[k] for k, v in a.items()), 0j)


def tensor(a: SparseState, b: SparseState) -> SparseState:
    amps = {ka + kb: va * vb for ka, va in a.items() for kb, vb in b.items()}
    return SparseState(a.num_qubits + b.num_qubits, amps)


def apply_operator(state: SparseState, matrix: np.ndarray,
                   qubits: Sequence[int]) -> SparseState:
    """Apply a dense operator on ``qubits`` (1-based, in matrix order)."""
    qubits = list(qubits)
    k = len(qubits)
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.shape != (2 ** k, 2 ** k):
        raise ValueError(f"operator shape {matrix.shape} does not act on {k} qubits")
    if len(set(qubits)) != k or any(not 1 <= q <= state.num_qubits for q in qubits):
        raise ValueError(f"invalid qubit indices {qubits}")
    idx = [q - 1 for q in qubits]
    out: dict[str, complex] = defaultdict(complex)
    for bits, a in state.items():
        col = int("".join(bits[i] for i in idx), 2) if k else 0
        chars = list(bits)
        for row in np.flatnonzero(np.abs(matrix[:, col]) > 0):
            sub = format(row, f"0{k}b")
            for i, ch in zip(idx, sub):
                chars[i] = ch
            out["".join(chars)] += matrix[row, col] * a
    return SparseState(state.num_qubits, out)


class DensityMatrix:
    """Dense density operator on a few qubits."""

    __slots__ = ("num_qubits", "matrix")

    def __init__(self, matrix, *, validate: bool = True, tol: float = TOL):
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        n = int(round(math.log2(m.shape[0]))) if m.shape[0] > 1 else 0
        if 2 ** n != m.shape[0]:
            raise ValueError("dimension is not a power of two")
        _check_dense(n)
        self.num_qubits = n
        self.matrix = m
        if validate:
            self.validate(tol)

    def validate(self, tol: float = TOL) -> None:
        m = self.matrix
        if np.max(np.abs(m - m.conj().T), initial=0.0) > tol:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > tol:
            raise ValueError(f"density matrix has trace {tr!r}")
        if np.linalg.eigvalsh(m).min(initial=0.0) < -tol:
            raise ValueError("density matrix has a negative eigenvalue")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(_herm(self.matrix))

    @classmethod
    def diag(cls, values: Iterable[float], **kw) -> "DensityMatrix":
        return cls(np.diag(np.asarray(list(values), dtype=complex)), **kw)

    @classmethod
    def mixture(cls, weighted: Iterable[tuple[float, SparseState]], **kw) -> "DensityMatrix":
        m = None
        for p, psi in weighted:
            v = psi.to_vector()
            term = p * np.outer(v, v.conj())
            m = term if m is None else m + term
        if m is None:
            raise ValueError("empty mixture")
        return cls(m, **kw)

    def __repr__(self) -> str:
        return f"DensityMatrix({self.num_qubits} qubits)"


def _herm(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2


def _as_matrix(x) -> np.ndarray:
    if isinstance(x, DensityMatrix):
        return x.matrix
    if isinstance(x, SparseState):
        return x.projector().matrix
    return np.asarray(x, dtype=complex)


def partial_trace(state: SparseState | DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduced density matrix on the 1-based qubits in ``keep``.

    Kept qubits appear in ascending order. Pure states are contracted
    sparsely, so only the kept subsystem has to fit under ``DENSE_LIMIT``.
    """
    n = state.num_qubits
    keep = sorted(set(keep))
    if any(not 1 <= q <= n for q in keep):
        raise ValueError(f"keep indices {keep} outside 1..{n}")
    _check_dense(len(keep))
    k = len(keep)
    if isinstance(state, SparseState):
        kidx = [q - 1 for q in keep]
        kset = set(kidx)
        didx = [i for i in range(n) if i not in kset]
        groups: dict[str, list[tuple[int, complex]]] = defaultdict(list)
        for bits, a in state.items():
            row = int("".join(bits[i] for i in kidx), 2) if k else 0
            groups["".join(bits[i] for i in didx)].append((row, a))
        out = np.zeros((2 ** k, 2 ** k), dtype=complex)
        for terms in groups.values():
            v = np.zeros(2 ** k, dtype=complex)
            for row, a in terms:
                v[row] += a
            out += np.outer(v, v.conj())
        return DensityMatrix(out, validate=False)
    m = state.matrix.reshape([2] * (2 * n))
    traced = [i for i in range(n) if i + 1 not in keep]
    # contract traced axes pairwise, highest first so indices stay valid
    for i in sorted(traced, reverse=True):
        cur = m.ndim // 2
        m = np.trace(m, axis1=i, axis2=i + cur)
    return DensityMatrix(m.reshape(2 ** k, 2 ** k), validate=False)


def fidelity_pure_mixed(phi: SparseState, sigma: DensityMatrix) -> float:
    """F = <phi|sigma|phi>."""
    if phi.num_qubits != sigma.num_qubits:
        raise ValueError("dimension mismatch")
    v = phi.to_vector()
    return float(np.vdot(v, sigma.matrix @ v).real)


def sqrtm_psd(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(_herm(m))
    # eigh leaves ~1e-17 noise on null eigenvalues; its sqrt would be ~1e-8
    floor = 1e-14 * max(float(np.max(np.abs(w), initial=0.0)), 1e-300)
    w = np.sqrt(np.where(w > floor, w, 0.0))
    return (v * w) @ v.conj().T


def _check_state(m: np.ndarray, tol: float = 1e-8) -> None:
    if np.max(np.abs(m - m.conj().T), initial=0.0) > tol:
        raise ValueError("input is not Hermitian")
    if np.linalg.eigvalsh(_herm(m)).min(initial=0.0) < -tol:
        raise ValueError("input has a negative eigenvalue")


def uhlmann_fidelity(r1, r2) -> float:
    """(Tr sqrt(sqrt(r1) r2 sqrt(r1)))^2, squared-fidelity convention."""
    a, b = _as_matrix(r1), _as_matrix(r2)
    if a.shape != b.shape:
        raise ValueError("dimension mismatch")
    _check_state(a)
    _check_state(b)
    # trace norm of sqrt(r1) sqrt(r2); singular values avoid a second sqrt of noise
    sv = np.linalg.svd(sqrtm_psd(a) @ sqrtm_psd(b), compute_uv=False)
    f = float(np.sum(sv) ** 2)
    return min(max(f, 0.0), 1.0)


def operator_norm(w) -> float:
    """Largest eigenvalue of a positive semidefinite operator."""
    m = _as_matrix(w)
    _check_state(m)
    return float(np.linalg.eigvalsh(_herm(m))[-1])


def shannon_entropy(probs: Iterable[float]) -> float:
    """Entropy in bits; zero-probability entries contribute nothing."""
    return -math.fsum(p * math.log2(p) for p in probs if p > 0)


def von_neumann_entropy(rho) -> float:
    w = np.linalg.eigvalsh(_herm(_as_matrix(rho)))
    return shannon_entropy(float(x) for x in w if x > 1e-15)


def relative_entropy(rho, omega, tol: float = 1e-9) -> float:
    """D(rho||omega) in bits; +inf when rho has weight outside omega's support."""
    a, b = _as_matrix(rho), _as_matrix(omega)
    if a.shape != b.shape:
        raise ValueError("dimension mismatch")
    wa, va = np.linalg.eigh(_herm(a))
    wb, vb = np.linalg.eigh(_herm(b))
    tr_a_log_a = -shannon_entropy(float(x) for x in wa if x > 1e-15)
    # <w_j| rho |w_j> for each eigenvector of omega
    weights = np.real(np.einsum("ij,ik,kj->j", vb.conj(), a, vb))
    on = wb > tol
    if weights[~on].sum() > tol:
        return math.inf
    tr_a_log_b = math.fsum(float(p * math.log2(x)) for p, x in zip(weights[on], wb[on]))
    return max(tr_a_log_a - tr_a_log_b, 0.0)
