import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trigroup.davkd.diagram import enumerate_davkd, fulfillability_upper_bound, is_fulfillable
from trigroup.davkd.probability import (
    WitnessIndex,
    dnf_probability,
    exact_fulfillability,
    sample_presence,
    witness_sets,
)
from trigroup.presentation import Presentation, relator_array, relator_count


def brute_dnf(terms, p, nvars):
    total = 0.0
    for bits in itertools.product((0, 1), repeat=nvars):
        on = {i for i, b in enumerate(bits) if b}
        if any(set(t) <= on for t in terms):
            k = len(on)
            total += p**k * (1 - p) ** (nvars - k)
    return total


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.sets(st.integers(0, 7), min_size=0, max_size=4), max_size=8),
    st.floats(0.01, 0.99),
)
def test_dnf_matches_truth_table(terms, p):
    assert dnf_probability(terms, p) == pytest.approx(brute_dnf(terms, p, 8), abs=1e-12)


def test_dnf_edge_cases():
    assert dnf_probability([], 0.3) == 0.0
    assert dnf_probability([set()], 0.3) == 1.0
    assert dnf_probability([{0}, {1}], 0.5) == pytest.approx(0.75)
    assert dnf_probability([{0, 1}], 0.5) == pytest.approx(0.25)


def test_single_face_probability_closed_form():
    for D, n in itertools.product(enumerate_davkd(1, "canonical"), (2, 3)):
        N = relator_count(n)
        assert len(witness_sets(D, n)) == N
        for p in (0.02, 0.05):
            assert exact_fulfillability(D, n, p) == pytest.approx(1 - (1 - p) ** N, rel=1e-12)


def test_witnesses_agree_with_search():
    # presence of some witness set is exactly fulfillability of the sample
    rels = relator_array(2)
    rng = np.random.default_rng(5)
    for D in itertools.islice(enumerate_davkd(2, "canonical"), 25):
        ws = witness_sets(D, 2)
        for _ in range(4):
            mask = rng.random(len(rels)) < 0.25
            P = Presentation(2, [tuple(r) for r in rels[mask].tolist()])
            got, _ = is_fulfillable(D, P)
            present = set(np.flatnonzero(mask).tolist())
            assert got == any(w <= present for w in ws)


def test_monte_carlo_matches_exact_at_n2():
    Ds = [D for m in (1, 2) for D in enumerate_davkd(m, "canonical")]
    T = 20000
    freq = WitnessIndex.build(Ds, 2).frequencies(0.05, T, seed=11)
    for D, f in zip(Ds, freq):
        e = exact_fulfillability(D, 2, 0.05)
        assert abs(f - e) <= 4 * math.sqrt(e * (1 - e) / T) + 1e-12


def test_sample_presence_is_nested_in_p():
    lo = sample_presence(3, 0.02, 50, seed=4)
    hi = sample_presence(3, 0.05, 50, seed=4)
    for a, b in zip(lo, hi):
        assert set(a.tolist()) <= set(b.tolist())


def test_index_groups_share_frequencies():
    Ds = list(enumerate_davkd(2, "canonical"))
    idx = WitnessIndex.build(Ds, 2)
    freq = idx.frequencies(0.05, 2000, seed=0)
    for g in set(idx.group_of):
        vals = {f for f, h in zip(freq, idx.group_of) if h == g}
        assert len(vals) == 1


def test_bound_is_a_probability():
    for D in enumerate_davkd(2, "canonical"):
        assert 0 < fulfillability_upper_bound(D, 3, 0.02) <= 1
