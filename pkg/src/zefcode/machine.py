"""Reversible pointer machine that condenses classical-payload codewords.

The program has three parts: a copy loop that moves each register's
codeword onto the tape, a delay loop that idles until clock ``D``, and the
mirror image of both that uncopies the registers. Each pseudocode line and
each loop-guard evaluation costs one cycle; a delay-loop iteration costs one
cycle. With those costs every run halts at clock ``2D``.

Also here: the coherent branch operator ``U = X (x) Pi + 1 (x) Pi_perp`` and
block-controlled unitaries, acting on :class:`SparseState`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .codes import ClassicalCode
from .qstate import SparseState, apply_operator

COPY, DELAY, UNDELAY, UNCOPY = "copy", "delay", "undelay", "uncopy"


class MachineError(RuntimeError):
    """The program could not run to completion."""


@dataclass
class MachineState:
    registers: list[list[int]]
    tape: list[int]
    c: int = 0
    r: int = 0
    q: list[int] = field(default_factory=list)
    p: int = 0
    clock: int = 0

    @classmethod
    def initial(cls, inputs: Sequence[str], width: int) -> "MachineState":
        regs = [[int(b) for b in w.ljust(width, "0")] for w in inputs]
        return cls(regs, [0] * (width * len(inputs)), q=[0] * len(inputs))

    def pointers(self) -> tuple:
        return (self.r, tuple(self.q), self.p, self.c)

    def ancillas(self) -> tuple:
        """Everything except the tape and the clock."""
        return (tuple(tuple(r) for r in self.registers), self.pointers())

    @property
    def tape_bits(self) -> str:
        return "".join(map(str, self.tape))

    def ancillas_clear(self) -> bool:
        return (self.c == self.r == self.p == 0 and not any(self.q)
                and not any(any(r) for r in self.registers))


@dataclass(frozen=True)
class TraceRow:
    clock: int
    phase: str
    line: str
    r: int
    q: tuple[int, ...]
    p: int
    c: int

    def format(self) -> str:
        qs = ",".join(map(str, self.q))
        return f"{self.clock} {self.phase} {self.line} r={self.r} q={qs} p={self.p} c={self.c}"


def copy_cycles(lengths: Iterable[int]) -> int:
    """Cycles spent in the copy loop: per word, r++, 4 per bit, one exit test."""
    return sum(4 * l + 2 for l in lengths)


def minimal_delay(code: ClassicalCode, n_words: int) -> int:
    """Smallest D for which the copy loop always finishes with a delay step to spare."""
    return copy_cycles([code.max_length] * n_words) + 1


class _Run:
    def __init__(self, code: ClassicalCode, inputs: Sequence[str], width: int, delay: int):
        self.words = frozenset(code)
        self.width = width
        self.delay = delay
        self.n = len(inputs)
        self.s = MachineState.initial(inputs, width)
        self.trace: list[TraceRow] = []

    def tick(self, phase: str, line: str) -> None:
        s = self.s
        s.clock += 1
        self.trace.append(TraceRow(s.clock, phase, line, s.r, tuple(s.q), s.p, s.c))

    def is_codeword(self) -> bool:
        s = self.s
        reg = s.registers[s.r - 1]
        q = s.q[s.r - 1]
        return "".join(map(str, reg[:q])) in self.words

    def copy(self) -> None:
        s = self.s
        while True:
            s.r += 1
            self.tick(COPY, "r+=1")
            while True:
                i = s.r - 1
                if s.q[i] == self.width:
                    raise MachineError(f"register {s.r} holds no codeword; exit test never fires")
                s.q[i] += 1
                self.tick(COPY, "q+=1")
                s.p += 1
                self.tick(COPY, "p+=1")
                s.tape[s.p - 1] ^= s.registers[i][s.q[i] - 1]
                self.tick(COPY, "T^=R")
                done = self.is_codeword()
                self.tick(COPY, "exit?codeword")
                if done:
                    break
            self.tick(COPY, "exit?r=N")
            if s.r == self.n:
                break

    def idle(self) -> None:
        s = self.s
        if s.clock >= self.delay:
            raise MachineError(
                f"copy loop finished at clock {s.clock}, not before the deadline D={self.delay}")
        while s.clock < self.delay:
            s.c += 1
            self.tick(DELAY, "c+=1")
        while True:
            s.c -= 1
            self.tick(UNDELAY, "c-=1")
            if s.c == 0:
                break

    def uncopy(self) -> None:
        s = self.s
        while True:
            self.tick(UNCOPY, "enter?r=N")
            while True:
                i = s.r - 1
                self.tick(UNCOPY, "enter?codeword")
                s.registers[i][s.q[i] - 1] ^= s.tape[s.p - 1]
                self.tick(UNCOPY, "R^=T")
                s.p -= 1
                self.tick(UNCOPY, "p-=1")
                s.q[i] -= 1
                self.tick(UNCOPY, "q-=1")
                if s.q[i] == 0:
                    break
            s.r -= 1
            self.tick(UNCOPY, "r-=1")
            if s.r == 0:
                break


def run_condense_program(code: ClassicalCode, inputs: Sequence[str],
                         delay: int | None = None) -> tuple[MachineState, list[TraceRow]]:
    """Run the condensation program on basis-state codewords.

    Returns the final machine state and one trace row per cycle. The tape
    of the final state holds the concatenated inputs followed by zeros.
    """
    if not inputs:
        raise ValueError("need at least one input word")
    width = code.max_length
    if any(len(w) > width for w in inputs):
        raise ValueError("input longer than the register")
    if delay is None:
        delay = minimal_delay(code, len(inputs))
    run = _Run(code, inputs, width, delay)
    run.copy()
    run.idle()
    run.uncopy()
    return run.s, run.trace


def format_trace(trace: Iterable[TraceRow]) -> str:
    return "".join(row.format() + "\n" for row in trace)


def audit_reversal(trace: Sequence[TraceRow]) -> bool:
    """Check that the second half retraces the first half's pointers backwards.

    The pointer snapshot after cycle ``2D - j`` must equal the snapshot after
    cycle ``j`` for every ``j``, with the initial all-zero snapshot at ``j = 0``.
    """
    total = len(trace)
    if total % 2:
        return False
    zero = (0, tuple(0 for _ in trace[0].q), 0, 0)
    snaps = [zero] + [(t.r, t.q, t.p, t.c) for t in trace]
    return all(snaps[total - j] == snaps[j] for j in range(total + 1))


@dataclass
class ReversibilityReport:
    n_words: int
    n_inputs: int
    n_distinct_tapes: int
    collisions: list[tuple[tuple[str, ...], tuple[str, ...], str]]
    failures: list[tuple[tuple[str, ...], str]]

    @property
    def injective(self) -> bool:
        return not self.collisions and not self.failures


def _all_runs(code: ClassicalCode, n_words: int, delay: int | None, limit: int):
    n = len(code) ** n_words
    if n > limit:
        raise ValueError(f"{n} input tuples exceed the enumeration limit {limit}")
    for combo in itertools.product(code.codewords, repeat=n_words):
        try:
            state, trace = run_condense_program(code, combo, delay)
        except MachineError as exc:
            yield combo, None, None, str(exc)
        else:
            yield combo, state, trace, None


def check_reversibility(code: ClassicalCode, n_words: int, delay: int | None = None,
                        limit: int = 4096) -> ReversibilityReport:
    """Exhaustively test that distinct input tuples leave distinct tapes."""
    seen: dict[str, tuple[str, ...]] = {}
    collisions, failures = [], []
    count = 0
    for combo, state, _, err in _all_runs(code, n_words, delay, limit):
        count += 1
        if err:
            failures.append((combo, err))
            continue
        tape = state.tape_bits
        if tape in seen:
            collisions.append((seen[tape], combo, tape))
        else:
            seen[tape] = combo
    return ReversibilityReport(n_words, count, len(seen), collisions, failures)


@dataclass
class IndependenceReport:
    n_words: int
    delay: int
    n_inputs: int
    halting_clocks: set[int]
    ancilla_configs: int
    all_clear: bool
    reversal_ok: bool

    @property
    def ok(self) -> bool:
        return (self.halting_clocks == {2 * self.delay} and self.ancilla_configs == 1
                and self.all_clear and self.reversal_ok)


def check_input_independence(code: ClassicalCode, n_words: int, delay: int | None = None,
                             limit: int = 4096) -> IndependenceReport:
    """Every run must halt at 2D with the same (all-zero) ancillas."""
    d = minimal_delay(code, n_words) if delay is None else delay
    clocks, configs = set(), set()
    clear = reversal = True
    count = 0
    for _, state, trace, err in _all_runs(code, n_words, d, limit):
        count += 1
        if err:
            clear = False
            continue
        clocks.add(state.clock)
        configs.add(state.ancillas())
        clear &= state.ancillas_clear()
        reversal &= audit_reversal(trace)
    return IndependenceReport(n_words, d, count, clocks, len(configs), clear, reversal)


SWAP01 = np.array([[0, 1], [1, 0]], dtype=complex)


def _check_projector(proj: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    proj = np.asarray(proj, dtype=complex)
    if np.max(np.abs(proj - proj.conj().T)) > tol or np.max(np.abs(proj @ proj - proj)) > tol:
        raise ValueError("condition is not an orthogonal projector")
    return proj


def branch_matrix(proj: np.ndarray) -> np.ndarray:
    """U on (switch qubit) x (condition subsystem), switch first."""
    proj = _check_projector(proj)
    eye = np.eye(proj.shape[0])
    return np.kron(SWAP01, proj) + np.kron(np.eye(2), eye - proj)


def branch_operator_apply(proj: np.ndarray, switch: int, subsystem: Sequence[int],
                          state: SparseState) -> SparseState:
    """Flip the switch qubit on the part of ``state`` where the condition holds."""
    if switch in subsystem:
        raise ValueError("switch qubit overlaps the condition subsystem")
    return apply_operator(state, branch_matrix(proj), [switch, *subsystem])


def _check_unitary(u: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError("operator is not square")
    if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > tol:
        raise ValueError("operator is not unitary")
    return u


def controlled_matrix(v0: np.ndarray, v1: np.ndarray) -> np.ndarray:
    v0, v1 = _check_unitary(v0), _check_unitary(v1)
    if v0.shape != v1.shape:
        raise ValueError("branches act on different dimensions")
    p0 = np.diag([1.0, 0.0])
    p1 = np.diag([0.0, 1.0])
    return np.kron(p0, v0) + np.kron(p1, v1)


def controlled_branch(v0: np.ndarray, v1: np.ndarray, switch: int, work: Sequence[int],
                      state: SparseState) -> SparseState:
    """|0><0| (x) V0 + |1><1| (x) V1 with the switch qubit as control."""
    if switch in work:
        raise ValueError("switch qubit overlaps the work subsystem")
    return apply_operator(state, controlled_matrix(v0, v1), [switch, *work])
