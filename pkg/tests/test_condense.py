import math
import warnings
from fractions import Fraction

import numpy as np
import pytest

from zefcode.codes import QuantumCode, lift_any, lift_classical
from zefcode.condense import (
    CondensationWarning, condensed_length_expectation, decondense, deviation_probability,
    dimension_count_check, isometry_check, simple_condense, split_product, sum_length_pmf,
    uncondense,
)
from zefcode.qstate import SparseState, basis_state, inner
from zefcode.sampling import random_code, random_codeword

S2 = 1 / math.sqrt(2)


def zef(bits, width=3):
    return basis_state(bits).padded(width)


def test_concatenates_payloads(code):
    cs = simple_condense(code, [zef("10"), zef("0")])
    assert cs.state.amplitudes == {"100000": 1}


def test_superposed_lengths(code):
    phi = SparseState(3, {"000": S2, "111": S2})
    cs = simple_condense(code, [phi, zef("0")])
    assert set(cs.state.support()) == {"000000", "111000"}
    assert cs.state["111000"] == pytest.approx(S2)
    assert cs.length_distribution() == pytest.approx({2: 0.5, 4: 0.5})


def test_single_word_is_identity(code, rng):
    for _ in range(5):
        w = random_codeword(rng, code)
        out = simple_condense(code, [w]).state
        assert abs(inner(out, w) - 1) < 1e-12


def test_non_codeword_input_rejected(code):
    with pytest.raises(ValueError):
        simple_condense(code, [zef("001")])


def test_decondense_examples(code):
    back = decondense(simple_condense(code, [zef("10"), zef("0")]))
    assert [b.support() for b in back] == [["100"], ["000"]]
    phi = SparseState(3, {"000": S2, "111": S2})
    back = decondense(simple_condense(code, [phi, zef("0")]))
    assert abs(abs(inner(back[0], phi)) - 1) < 1e-12
    assert back[1].support() == ["000"]


def test_round_trip_random_superpositions(rng):
    for _ in range(30):
        code = random_code(rng, l_max=int(rng.integers(1, 4)))
        words = [random_codeword(rng, code) for _ in range(int(rng.integers(1, 4)))]
        back = decondense(simple_condense(code, words))
        for a, b in zip(words, back):
            assert abs(inner(a, b)) ** 2 == pytest.approx(1, abs=1e-10)


def test_uncondense_rejects_strings_outside_image(code):
    with pytest.raises(ValueError):
        uncondense(code, basis_state("001000"), 2)
    with pytest.raises(ValueError):
        uncondense(code, basis_state("0010"), 2)


def test_split_product_rejects_entangled():
    bell = SparseState(2, {"00": S2, "11": S2})
    with pytest.raises(ValueError):
        split_product(bell, 2)


def test_inner_products_preserved(rng):
    for _ in range(30):
        code = random_code(rng, l_max=3)
        n = int(rng.integers(1, 4))
        u = [random_codeword(rng, code) for _ in range(n)]
        v = [random_codeword(rng, code) for _ in range(n)]
        lhs = inner(simple_condense(code, u).state, simple_condense(code, v).state)
        rhs = np.prod([inner(a, b) for a, b in zip(u, v)])
        assert abs(lhs - rhs) < 1e-10


def test_support_is_zero_past_total_length(rng):
    for _ in range(30):
        code = random_code(rng, l_max=3, mix=False)
        basis = code.basis()
        picks = [basis[int(i)] for i in rng.integers(0, len(basis), size=3)]
        total = sum(l for l, _, _ in picks)
        cs = simple_condense(code, [b for _, _, b in picks])
        for bits in cs.state.support():
            assert "1" not in bits[total:]


def test_isometry_paper_code(code):
    for n, count in ((2, 16), (3, 64)):
        rep = isometry_check(code, n)
        assert rep.n_products == count
        assert rep.max_deviation < 1e-12 and rep.ok and not rep.collisions


def test_isometry_detects_collision():
    # "0"+"10" and "01"+"0" both concatenate to "010"
    bad = lift_any(["0", "01", "10"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CondensationWarning)
        rep = isometry_check(bad, 2)
    assert not rep.prefix_free
    assert rep.max_deviation == pytest.approx(1.0)
    assert rep.collisions


def test_pair_zero_zero_one_concatenates_injectively():
    # {0, 01} fails the prefix test, yet plain concatenation stays injective at N=2
    rep = isometry_check(lift_any(["0", "01"]), 2)
    assert not rep.prefix_free and rep.max_deviation < 1e-12


def test_condensation_warns_when_norm_changes():
    bad = lift_any(["0", "01", "10"])
    word = SparseState(2, {"00": 1, "01": 1}, normalize=True)  # "0" + "01"
    other = SparseState(2, {"10": 1, "00": 1}, normalize=True)  # "10" + "0"
    with pytest.warns(CondensationWarning):
        simple_condense(bad, [word, other])


def test_isometry_enumeration_limit(code):
    with pytest.raises(ValueError):
        isometry_check(code, 7)


def test_length_expectation(code, dyadic):
    law = {1: 0.5, 2: 0.25, 3: 0.25}
    assert condensed_length_expectation(law, 4) == pytest.approx(7.0)
    cs = simple_condense(code, [zef("10"), zef("110")])
    assert condensed_length_expectation(cs) == 5
    assert condensed_length_expectation(law, 0) == 0


def test_length_expectation_additive(rng):
    for _ in range(20):
        code = random_code(rng, l_max=3)
        words = [random_codeword(rng, code) for _ in range(3)]
        cs = simple_condense(code, words)
        single = sum(sum(l * p for l, p in code.sector_weights(w).items()) for w in words)
        assert condensed_length_expectation(cs) == pytest.approx(single, abs=1e-10)


def test_exact_pmf_and_tails():
    law = {1: Fraction(1, 2), 2: Fraction(1, 4), 3: Fraction(1, 4)}
    pmf = sum_length_pmf(law, 2)
    assert sum(pmf.values()) == 1
    assert pmf[2] == Fraction(1, 4) and pmf[6] == Fraction(1, 16)
    tails = [deviation_probability(law, n, 0.5) for n in (4, 8, 12, 16)]
    assert all(a > b for a, b in zip(tails, tails[1:]))


def test_dimension_counts(code):
    rep = dimension_count_check(code, 2)
    assert rep.counts[4] == 5 and rep.ok and rep.power_bound_ok
    bad = dimension_count_check({1: 3}, 4)
    assert bad.counts[4] == 81 and 4 in bad.violations
    assert bad.power_bound_ok is None
    with pytest.raises(ValueError):
        dimension_count_check(code, 20)
