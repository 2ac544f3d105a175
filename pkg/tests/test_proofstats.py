import itertools

import numpy as np
import pytest

from trigroup.presentation import Presentation, parse_presentation, relator_array
from trigroup.proofstats import (
    BoostConfig,
    boost_experiment,
    gprime_edges,
    gprime_expected_X,
    gprime_path_stats,
    letter_closure,
    path_counts,
    planted_pairs,
    valid_pairs,
    z_graph_edges,
    z_graph_expected_edges,
    z_graph_stats,
    z_graph_trials,
)

G1G2G3 = ((0, 2, 4),)


# -- Z-graph ---------------------------------------------------------------

def test_empty_presentation_has_no_edges():
    s = z_graph_stats(Presentation(4), letter_closure([0]))
    assert s.edge_count == 0 and s.nontrivial_components == 0
    assert s.vertices == 6


def test_single_relator_gives_single_edge():
    s = z_graph_stats(Presentation(3, G1G2G3), letter_closure([0]))
    assert s.edges == ((2, 4),)
    assert s.nontrivial_components == 1 and s.max_component_edges == 1


def test_relators_with_two_z_letters_are_ignored():
    assert z_graph_edges([(0, 2, 4)], letter_closure([0, 2])) == set()


def test_z_must_be_closed():
    with pytest.raises(ValueError):
        z_graph_stats(Presentation(2), {0})


def test_expected_edges_oracle_small():
    # brute force over all subsets of the relator space at n=2
    n, p, Z = 2, 0.3, letter_closure([0])
    rels = [tuple(r) for r in relator_array(n).tolist()]
    relevant = [r for r in rels if z_graph_edges([r], Z)]
    total = 0.0
    for bits in itertools.product((0, 1), repeat=len(relevant)):
        chosen = [r for r, b in zip(relevant, bits) if b]
        k = len(chosen)
        total += p**k * (1 - p) ** (len(relevant) - k) * len(z_graph_edges(chosen, Z))
    assert z_graph_expected_edges(n, p, Z) == pytest.approx(total, rel=1e-12)


def test_expected_edges_monte_carlo():
    n, p, Z = 10, 0.02, letter_closure([0, 2, 4])
    rows = z_graph_trials(n, p, Z, trials=400, seed=3)
    counts = np.array([r["edges"] for r in rows])
    mu = z_graph_expected_edges(n, p, Z)
    assert abs(counts.mean() - mu) <= 4 * counts.std(ddof=1) / np.sqrt(len(counts))


def test_component_claim_at_n40():
    # Known to fail: at this density G has hundreds of edges in expectation
    # against n^0.6 ~ 9, so components are far from "at most two edges".
    n = 40
    p = n**-1.5
    Z = letter_closure(x for r in G1G2G3 for x in r)
    rows = z_graph_trials(n, p, Z, trials=200, seed=0)
    frac = np.mean([r["small"] for r in rows])
    print(f"n=40: expected edges {z_graph_expected_edges(n, p, Z):.1f}, small fraction {frac:.3f}")
    assert frac >= 0.95


# -- G' ----------------------------------------------------------------------

def brute_expected_X(n, M, q, Z):
    prefixes = {pre for a, b in M for pre in ((a, b), (b, a))}
    rels = [tuple(r) for r in relator_array(n).tolist() if (r[0], r[1]) in prefixes]
    total = 0.0
    for bits in itertools.product((0, 1), repeat=len(rels)):
        chosen = [r for r, b in zip(rels, bits) if b]
        k = len(chosen)
        X, _ = path_counts(gprime_edges(chosen, M, Z, n))
        total += q**k * (1 - q) ** (len(rels) - k) * X
    return total


@pytest.mark.parametrize(
    "n,M,q,Z",
    [
        (2, ((0, 2),), 0.4, frozenset()),
        (2, ((0, 2), (1, 3)), 0.3, frozenset()),
        (3, ((0, 2),), 0.5, frozenset()),
        (3, ((0, 3),), 0.35, letter_closure([4])),
    ],
)
def test_exact_X_matches_subset_enumeration(n, M, q, Z):
    assert gprime_expected_X(n, M, q, Z) == pytest.approx(brute_expected_X(n, M, q, Z), abs=1e-12)


def test_gprime_edge_definition_by_hand():
    # abx and aby^-1 give the edge xy; here a=g1, b=g2, x=g3, y=g4.  Read
    # with x=G4 and y=G3 the same two relators also witness the edge G3 G4.
    M = ((0, 2),)
    assert gprime_edges([(0, 2, 4), (0, 2, 7)], M, frozenset(), 4) == {(4, 6), (5, 7)}
    # a prefix outside M contributes nothing
    assert gprime_edges([(0, 4, 2), (0, 4, 7)], M, frozenset(), 4) == set()


def test_path_counts_by_hand():
    assert path_counts([(0, 1), (1, 2), (2, 3)]) == (2, 1)
    assert path_counts([(0, 1), (0, 2), (0, 3)]) == (3, 3)
    assert path_counts([]) == (0, 0)


def test_eps_zero_gives_no_paths():
    s = gprime_path_stats(6, 10, 0.0, 0.5, trials=20, seed=1)
    assert set(s.X) == {0} and set(s.Y) == {0}
    assert s.expected_X == 0.0


def test_y_bound_and_moment():
    s = gprime_path_stats(6, 10, 1.0, 0.05, trials=300, seed=2)
    assert s.y_bound_holds
    assert abs(s.mean_X - s.expected_X) <= 4 * s.sigma_mean_X


def test_planted_pairs():
    M = planted_pairs(6, 10, seed=5)
    assert len(set(M)) == 10 and set(M) <= set(valid_pairs(6))
    assert M == planted_pairs(6, 10, seed=5)
    with pytest.raises(ValueError):
        planted_pairs(2, 100, seed=0)


# -- boost -------------------------------------------------------------------

def test_eps_zero_boost_is_identity():
    rep = boost_experiment(BoostConfig(6, 0.05, 0.0, G1G2G3, trials=40, seed=1))
    assert rep.gap_eps.mean == 0.0 and rep.gap_eps.up == rep.gap_eps.down == 0


def test_boost_dominance_and_monotonicity():
    rep = boost_experiment(BoostConfig(8, 0.03, 1.0, G1G2G3, trials=60, seed=2))
    assert rep.dominance_violations == 0
    assert rep.monotonicity_violations == 0
    assert rep.h_strong.lower >= rep.h_fixed.lower >= rep.h.lower


def test_boost_thread_independent():
    cfg = BoostConfig(6, 0.05, 1.0, G1G2G3, trials=12, seed=3)
    assert boost_experiment(cfg, 1).records == boost_experiment(cfg, 2).records


def test_boost_config_validation():
    with pytest.raises(ValueError):
        BoostConfig(3, 0.5, 3.0, G1G2G3, trials=5)
    with pytest.raises(ValueError):
        BoostConfig(2, 0.5, 1.0, G1G2G3, trials=5)  # g3 does not exist


def test_parse_round_trip_of_default_fixed_relator():
    assert parse_presentation("g1 g2 g3", 3).relators == G1G2G3
