"""Property-based checks of the invariants, driven by hypothesis."""
import math
from fractions import Fraction

import numpy as np
from hypothesis import given, settings, strategies as st

from zefcode.codes import (
    huffman_lengths, is_prefix_free_classical, kraft_assign, kraft_sum_classical,
    lift_classical, quantum_kraft_sum, shannon_fano_lengths,
)
from zefcode.compress import sufficiency_bound_check, truncation_fidelity
from zefcode.condense import convolve_dims, simple_condense, sum_length_pmf
from zefcode.qstate import SparseState, inner, partial_trace
from zefcode.sampling import random_code, random_codeword

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)

probs_strategy = st.lists(st.floats(min_value=1e-3, max_value=1.0), min_size=1, max_size=8).map(
    lambda xs: [x / sum(xs) for x in xs])

kraft_lengths = st.lists(st.integers(min_value=1, max_value=6), min_size=1, max_size=10).filter(
    lambda ls: sum(Fraction(1, 2 ** l) for l in ls) <= 1)


@given(kraft_lengths)
def test_kraft_assign_gives_prefix_code_with_requested_lengths(lengths):
    code = kraft_assign(lengths)
    assert [len(w) for w in code] == lengths
    assert is_prefix_free_classical(code)
    assert quantum_kraft_sum(lift_classical(code)) == kraft_sum_classical(code)


@given(probs_strategy)
def test_shannon_fano_bounds(probs):
    lengths = shannon_fano_lengths(probs)
    assert sum(2.0 ** -l for l in lengths) <= 1 + 1e-12
    for p, l in zip(probs, lengths):
        assert l < -math.log2(p) + 1 + 1e-9 or l == 1


@given(probs_strategy)
def test_huffman_never_worse_than_shannon_fano(probs):
    huff = sum(p * l for p, l in zip(probs, huffman_lengths(probs)))
    sf = sum(p * l for p, l in zip(probs, shannon_fano_lengths(probs)))
    assert huff <= sf + 1e-12
    assert sum(2.0 ** -l for l in huffman_lengths(probs)) <= 1 + 1e-12


@given(st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1)), min_size=8, max_size=8)
       .filter(lambda v: sum(a * a + b * b for a, b in v) > 1e-3),
       st.sets(st.integers(1, 3), min_size=1, max_size=3))
def test_normalized_states_and_partial_trace(vec, keep):
    amps = {format(i, "03b"): complex(a, b) for i, (a, b) in enumerate(vec)}
    s = SparseState(3, amps, normalize=True)
    assert abs(s.norm_squared() - 1) < 1e-10
    assert abs(partial_trace(s, sorted(keep)).trace() - 1) < 1e-10


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_condensation_preserves_inner_products(seed):
    rng = np.random.default_rng(seed)
    code = random_code(rng, l_max=3)
    n = int(rng.integers(1, 4))
    u = [random_codeword(rng, code) for _ in range(n)]
    v = [random_codeword(rng, code) for _ in range(n)]
    lhs = inner(simple_condense(code, u).state, simple_condense(code, v).state)
    assert abs(lhs - np.prod([inner(a, b) for a, b in zip(u, v)])) < 1e-10


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_sufficiency_chain(seed):
    rng = np.random.default_rng(seed)
    code = random_code(rng, l_max=4)
    psi = random_codeword(rng, code)
    ell = int(rng.integers(0, code.l_max + 1))
    rep = sufficiency_bound_check(psi, code, ell)
    assert rep.holds
    assert 0 <= rep.eta <= 1 and rep.alpha ** 2 >= 1 - rep.eta - 1e-12


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_fidelity_full_length_is_one(seed):
    rng = np.random.default_rng(seed)
    code = random_code(rng)
    psi = random_codeword(rng, code)
    assert abs(truncation_fidelity(psi, code.l_max) - 1) < 1e-12


@given(st.dictionaries(st.integers(1, 4), st.integers(1, 5), min_size=1, max_size=4),
       st.integers(1, 5))
def test_length_pmf_and_dimension_counts(weights, n):
    total = sum(weights.values())
    law = {l: Fraction(w, total) for l, w in weights.items()}
    pmf = sum_length_pmf(law, n)
    assert sum(pmf.values()) == 1
    assert min(pmf) == n * min(law) and max(pmf) == n * max(law)
    counts = convolve_dims(weights, n)
    assert sum(counts.values()) == total ** n
