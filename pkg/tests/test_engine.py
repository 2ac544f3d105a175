import itertools
from math import gcd

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_relators
from trigroup.abelian import abelianization, check_nontrivial_certificate, smith_diagonal
from trigroup.cascade import cascade_close, log_from_json, log_to_json, replay_log
from trigroup.cosets import coset_enumerate, enumerate_words
from trigroup.decide import (
    NONTRIVIAL,
    TRIVIAL,
    UNDECIDED,
    Budget,
    decide,
    run_all_stages,
    verify_verdict,
)
from trigroup.presentation import Presentation, SampleConfig, sample_presentation

# -- oracles ----------------------------------------------------------------


def det(M):
    """Integer determinant by cofactor expansion (small matrices only)."""
    if len(M) == 1:
        return M[0][0]
    return sum((-1) ** j * M[0][j] * det([row[:j] + row[j + 1:] for row in M[1:]]) for j in range(len(M)))


def minors_divisors(M, ncols):
    """Elementary divisors from gcds of k x k minors: d_k = D_k / D_{k-1}."""
    rows = len(M)
    D = [1]
    for k in range(1, min(rows, ncols) + 1):
        g = 0
        for ri in itertools.combinations(range(rows), k):
            for ci in itertools.combinations(range(ncols), k):
                g = gcd(g, det([[M[i][j] for j in ci] for i in ri]))
        if g == 0:
            break
        D.append(g)
    divs = [D[k] // D[k - 1] for k in range(1, len(D))]
    return tuple(divs + [0] * (ncols - len(divs)))


def check_involution(state):
    for x in range(2 * state.n + 1):
        for y in range(2 * state.n + 1):
            assert state.same(x, y) == state.same(state.inverse(x), state.inverse(y))


presentations = st.integers(1, 3).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.sampled_from(brute_relators(n)), max_size=8))
)

# -- cascade ------------------------------------------------------------------


def test_cascade_empty(words):
    s = cascade_close(Presentation(3))
    assert s.merges == 0 and len(s.classes()) == 7


def test_cascade_collapse_example(words):
    P = words("aab aac abC")
    s = cascade_close(P)
    assert s.is_trivial()
    rules = [step[0] for step in s.log]
    assert "R1" in rules
    assert replay_log(P, s.log) == [list(range(7))]


def test_cascade_full_n2():
    P = Presentation(2, tuple(brute_relators(2)))
    assert cascade_close(P).is_trivial()


@settings(max_examples=80, deadline=None)
@given(presentations, st.data())
def test_cascade_monotone_and_involution_closed(case, data):
    n, rels = case
    extra = data.draw(st.lists(st.sampled_from(brute_relators(n)), max_size=6))
    small = cascade_close(Presentation(n, tuple(rels)))
    big = cascade_close(Presentation(n, tuple(rels + extra)))
    check_involution(small)
    check_involution(big)
    for x in range(2 * n + 1):
        for y in range(2 * n + 1):
            if small.same(x, y):
                assert big.same(x, y)


@settings(max_examples=60, deadline=None)
@given(presentations)
def test_cascade_log_replays_to_same_classes(case):
    n, rels = case
    P = Presentation(n, tuple(rels))
    s = cascade_close(P)
    e = 2 * n
    log = log_from_json(log_to_json(s.log, e), e)
    assert replay_log(P, log) == s.classes()


def test_replay_rejects_forged_step(words):
    P = words("aab aac abC")
    log = list(cascade_close(P).log)
    rule, refs, (u, v) = log[0]
    forged = [(rule, refs, (u, 2 * P.n))] + log[1:]
    with pytest.raises(ValueError):
        replay_log(P, forged)


@settings(max_examples=60, deadline=None)
@given(presentations)
def test_cascade_trivial_is_sound(case):
    n, rels = case
    P = Presentation(n, tuple(rels))
    if cascade_close(P).is_trivial():
        assert coset_enumerate(P, 10**5).order == 1


# -- abelianization -----------------------------------------------------------


def test_abelianization_examples(words):
    assert words("aaa").relators and abelianization(words("aaa")).divisors == (3,)
    assert abelianization(words("aab aaB")).divisors == (1, 4)
    assert abelianization(Presentation(2)).divisors == (0, 0)
    assert abelianization(words("aab")).divisors == (1, 0)


def test_smith_textbook_example():
    assert smith_diagonal([[2, 4, 4], [-6, 6, 12], [10, -4, -16]], 3) == (2, 6, 12)


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 4), st.integers(1, 3), st.data())
def test_smith_matches_minors_oracle(rows, cols, data):
    M = [data.draw(st.lists(st.integers(-6, 6), min_size=cols, max_size=cols)) for _ in range(rows)]
    assert smith_diagonal(M, cols) == minors_divisors(M, cols)


def test_smith_divisibility_chain_on_samples():
    for seed in range(30):
        P = sample_presentation(SampleConfig(6, 0.01, seed))
        d = abelianization(P).divisors
        nz = [x for x in d if x]
        assert all(y % x == 0 for x, y in zip(nz, nz[1:]))
        assert d[len(nz):] == (0,) * (len(d) - len(nz))


def test_large_entries_do_not_overflow():
    big = 3**25
    assert smith_diagonal([[big, 0], [0, big * 2]], 2) == (big, 2 * big)


# -- coset enumeration --------------------------------------------------------


def test_coset_examples(words):
    assert coset_enumerate(words("aaa"), 100).order == 3
    assert coset_enumerate(words("aab bba aBB"), 100).order == 1
    assert not coset_enumerate(Presentation(1), 1000).finite


@pytest.mark.parametrize(
    "ngens, rels, order",
    [
        (2, [[0, 0], [2, 2, 2], [0, 2, 0, 2]], 6),  # S3
        (2, [[0, 0], [2, 2, 2], [0, 2] * 5], 60),  # A5
        (2, [[0] * 4, [2, 2], [0, 2] * 2], 8),  # D4
        (1, [[0] * 7], 7),
    ],
)
def test_coset_known_orders(ngens, rels, order):
    assert enumerate_words(ngens, rels, 10**4).order == order


def test_coset_deterministic(words):
    P = words("aab bba aBB")
    assert coset_enumerate(P, 500) == coset_enumerate(P, 500)


# -- decide -------------------------------------------------------------------


def test_decide_examples(words):
    v = decide(words("aab aaB"))
    assert v.outcome == NONTRIVIAL and v.certificate["divisors"] == [1, 4]
    v = decide(words("aab aac abC"))
    assert v.outcome == TRIVIAL and v.certificate["type"] == "CascadeLog"
    v = decide(words("aab"))
    assert v.outcome == NONTRIVIAL and v.certificate["divisors"] == [1, 0]
    for P in (words("aab aaB"), words("aab aac abC"), words("aab")):
        assert verify_verdict(P, decide(P), ())


def test_decide_undecided_has_no_certificate(words):
    # trivial abelianization, cascade off, no enumeration budget
    P = words("aab bba aBB")
    v = decide(P, Budget(cascade=False, max_cosets=0))
    assert v.outcome == UNDECIDED and v.certificate is None
    assert verify_verdict(P, v)


def test_decide_coset_stage_certificate(words):
    P = words("aab bba aBB")
    v = decide(P, Budget(cascade=False, max_cosets=100))
    assert v.outcome == TRIVIAL and v.stage == "cosets"
    assert verify_verdict(P, v)


def test_verdict_json_shape(words):
    import json

    doc = json.loads(decide(words("aaa")).to_json())
    assert set(doc) >= {"outcome", "certificate", "budget_spent"}


def test_forced_letters_trivialize(words):
    P = words("abc")
    v = decide(P, forced=[0, 1])
    assert verify_verdict(P, v, [0, 1])


def test_stages_never_contradict_on_samples():
    for seed in range(150):
        n = 2 + seed % 3
        P = sample_presentation(SampleConfig(n, [0.05, 0.1, 0.2, 0.3][seed % 4], seed))
        report = run_all_stages(P, 10**4)
        assert report.contradictions() == []
        v = decide(P)
        assert verify_verdict(P, v)


def test_simplified_enumeration_matches_raw():
    from trigroup.decide import simplified_words

    checked = 0
    for seed in range(120):
        n = 2 + seed % 2
        P = sample_presentation(SampleConfig(n, 0.15, seed))
        raw = coset_enumerate(P, 5000)
        ngens, rels = simplified_words(cascade_close(P), P.relators)
        simp = enumerate_words(ngens, rels, 5000) if ngens else None
        order = 1 if ngens == 0 else simp.order
        if raw.finite and order is not None:
            assert raw.order == order
            checked += 1
    assert checked > 50
