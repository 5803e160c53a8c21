"""Quick built-in consistency checks, run by ``zefcode selftest``."""
from __future__ import annotations

import math

import numpy as np

from .codes import ClassicalCode, lift_classical, quantum_kraft_sum
from .compress import (
    Ensemble, block_code, length_identity, sufficiency_bound_check, sufficiency_experiment,
)
from .condense import decondense, isometry_check, simple_condense
from .machine import (
    branch_matrix, check_input_independence, check_reversibility, run_condense_program,
)
from .qstate import SparseState, basis_state, uhlmann_fidelity
from .sampling import (
    random_code, random_codeword, random_density, random_ensemble, random_projector,
)

WORDS = ("0", "10", "110", "111")
DYADIC = (0.5, 0.25, 0.125, 0.125)


def _kraft(rng):
    k = quantum_kraft_sum(lift_classical(WORDS))
    return abs(k - 1.0) <= 1e-12, f"K = {k}"


def _isometry(rng):
    code = lift_classical(WORDS)
    devs = [isometry_check(code, n).max_deviation for n in (2, 3)]
    bad = check_reversibility(ClassicalCode(("0", "01")), 2)
    ok = max(devs) <= 1e-10 and not bad.injective
    return ok, f"max Gram deviation {max(devs):.2g}, {{0,01}} collisions {len(bad.collisions)}"


def _machine(rng):
    code = lift_classical(WORDS)
    classical = ClassicalCode(WORDS)
    rep = check_input_independence(classical, 2)
    state, _ = run_condense_program(classical, ("10", "0"))
    cs = simple_condense(code, [basis_state(w).padded(3) for w in ("10", "0")])
    same = cs.state.support() == [state.tape_bits]
    return rep.ok and same, f"halts at {sorted(rep.halting_clocks)}, tape {state.tape_bits}"


def _sufficiency(rng):
    worst = math.inf
    for _ in range(200):
        code = random_code(rng)
        psi = random_codeword(rng, code)
        ell = int(rng.integers(0, code.l_max + 1))
        rep = sufficiency_bound_check(psi, code, ell)
        if not rep.holds:
            return False, f"chain broken at ell={ell}: {rep.chain}"
        worst = min(worst, rep.chain[0] - rep.chain[1])
    phi = SparseState(3, {"000": 1, "110": 1}, normalize=True)
    f = sufficiency_bound_check(phi, lift_classical(WORDS), 1).fidelity
    return abs(f - 0.25) <= 1e-12, f"hand case F = {f:.12g}, min slack {worst:.2g}"


def _identity(rng):
    worst = 0.0
    for _ in range(100):
        code = random_code(rng)
        ens = random_ensemble(rng, code)
        worst = max(worst, abs(length_identity(ens).residual))
    dy = length_identity(Ensemble.from_words(lift_classical(WORDS), WORDS, DYADIC))
    ok = worst <= 1e-9 and abs(dy.avg_length - 1.75) <= 1e-9 and abs(dy.rel_entropy) <= 1e-9
    return ok, f"max residual {worst:.2g}"


def _sweep(rng):
    ens = Ensemble.from_words(lift_classical(WORDS), WORDS, DYADIC)
    rows = sufficiency_experiment(ens, 4, exact_mode=True)
    fids = [r.avg_fidelity for r in rows]
    mono = all(a <= b + 1e-9 for a, b in zip(fids, fids[1:]))
    inside = all(r.bound_lower - 1e-9 <= r.avg_fidelity <= r.bound_upper + 1e-9 for r in rows)
    return mono and inside, f"N=4 exact sweep over {len(rows)} ells"


def _triangle(rng):
    for _ in range(200):
        r1, r2, r3 = (random_density(rng, 4) for _ in range(3))
        f12, f13, f23 = (uhlmann_fidelity(a, b) for a, b in ((r1, r2), (r1, r3), (r2, r3)))
        if math.sqrt(f13) > math.sqrt(f23) + math.sqrt(2 * (1 - math.sqrt(f12))) + 1e-9:
            return False, "triangle inequality violated"
    return True, "200 triples"


def _branch(rng):
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 4))
        u = branch_matrix(random_projector(rng, 2 ** n))
        eye = np.eye(u.shape[0])
        worst = max(worst, np.max(np.abs(u.conj().T @ u - eye)), np.max(np.abs(u @ u - eye)))
    return worst <= 1e-12, f"max deviation {worst:.2g}"


def _blocks(rng):
    per = [block_code([0.9, 0.1], n)[1] for n in (1, 2, 4)]
    lens = [r.per_signal for r in per]
    ok = all(r.bound_ok for r in per) and lens[0] > lens[1] > lens[2]
    return ok, "per-signal " + ", ".join(f"{x:.4f}" for x in lens)


def _roundtrip(rng):
    code = random_code(rng, l_max=3)
    words = [random_codeword(rng, code) for _ in range(2)]
    back = decondense(simple_condense(code, words))
    ok = all(abs(abs(np.vdot(a.to_vector(), b.to_vector())) - 1) <= 1e-9
             for a, b in zip(words, back))
    return ok, "condense then decondense"


CHECKS = [
    ("kraft", _kraft), ("isometry", _isometry), ("machine", _machine),
    ("sufficiency", _sufficiency), ("identity", _identity), ("sweep", _sweep),
    ("triangle", _triangle), ("branch", _branch), ("blocks", _blocks),
    ("roundtrip", _roundtrip),
]


def run_all(seed: int = 2024) -> list[tuple[str, bool, str]]:
    rng = np.random.default_rng(seed)
    out = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn(rng)
        except Exception as exc:  # report, keep going
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(ok), detail))
    return out
