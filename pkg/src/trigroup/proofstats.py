"""Quantities from the sharp-threshold argument, measured at desk scale.

* the boost experiment compares ``h(n,p)`` with the conditioned probabilities
  ``h(n,p | R_fixed)``, ``h(n,p | R_eps p)`` and ``h(n,p | R_strong)`` on
  shared randomness;
* the Z-graph joins letters ``x, y`` outside ``Z`` when a relator uses both
  and exactly one letter of ``Z``;
* the graph G' joins ``x, y`` when relators ``abx`` and ``aby^-1`` appear
  for a planted pair ``{a, b}``; ``X`` counts its paths of length two and
  ``Y`` the pairs of such paths sharing a vertex.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from functools import partial
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import binomtest

from trigroup.decide import TRIVIAL, Budget, decide
from trigroup.lab import HEstimate
from trigroup.parallel import map_ordered
from trigroup.presentation import (
    Presentation,
    presentation_from_indices,
    relator_array,
    relator_count,
)
from trigroup.seeding import derive_seed, rng, slot_uniforms


def letter_closure(letters: Iterable[int]) -> frozenset[int]:
    """Letters together with their inverses."""
    return frozenset(x for y in letters for x in (y, y ^ 1))


def _valid(a: int, b: int, c: int) -> bool:
    return b != a ^ 1 and c != b ^ 1 and a != c ^ 1


# -- boost ----------------------------------------------------------------

@dataclass(frozen=True)
class BoostConfig:
    n: int
    p: float
    eps: float
    r_fixed: tuple[tuple[int, int, int], ...]
    trials: int
    seed: int = 0
    budget: Budget = Budget(max_cosets=0)

    def __post_init__(self):
        Presentation(self.n, self.r_fixed)  # validates
        if not 0 <= self.p <= 1 or self.eps < 0 or self.eps * self.p > 1:
            raise ValueError("need 0 <= p <= 1 and 0 <= eps*p <= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")

    @property
    def Z(self) -> frozenset[int]:
        return letter_closure(x for r in self.r_fixed for x in r)


@dataclass(frozen=True)
class Gap:
    """Paired difference of certified-trivial indicators."""

    mean: float
    ci: tuple[float, float]
    up: int
    down: int
    alpha: float  # one-sided sign-test p-value for a positive gap

    @classmethod
    def paired(cls, a: np.ndarray, b: np.ndarray) -> "Gap":
        d = a.astype(np.int8) - b.astype(np.int8)
        T = d.size
        mean = float(d.mean())
        half = 1.96 * float(d.std(ddof=1)) / math.sqrt(T) if T > 1 else math.inf
        up, down = int((d > 0).sum()), int((d < 0).sum())
        alpha = float(binomtest(up, up + down, 0.5, alternative="greater").pvalue) if up + down else 1.0
        return cls(mean, (mean - half, mean + half), up, down, alpha)


@dataclass
class BoostReport:
    config: BoostConfig
    h: HEstimate
    h_fixed: HEstimate
    h_eps: HEstimate
    h_strong: HEstimate
    gap_fixed: Gap
    gap_eps: Gap
    dominance_violations: int
    monotonicity_violations: int
    records: list[dict] = field(default_factory=list, repr=False)

    @property
    def delta_i(self) -> float:
        """Largest ``delta`` with ``h(.|R_fixed) >= h + 2 delta`` on this sample."""
        return self.gap_fixed.mean / 2

    @property
    def delta_ii(self) -> float:
        """Smallest ``delta`` with ``h(.|R_eps p) <= h + delta`` on this sample."""
        return self.gap_eps.mean

    def to_dict(self) -> dict:
        cfg = self.config
        return {
            "n": cfg.n,
            "p": cfg.p,
            "eps": cfg.eps,
            "trials": cfg.trials,
            "Z_size": len(cfg.Z),
            "h": self.h.to_dict(),
            "h_fixed": self.h_fixed.to_dict(),
            "h_eps": self.h_eps.to_dict(),
            "h_strong": self.h_strong.to_dict(),
            "gap_fixed": asdict(self.gap_fixed),
            "gap_eps": asdict(self.gap_eps),
            "delta_i": self.delta_i,
            "delta_ii": self.delta_ii,
            "dominance_violations": self.dominance_violations,
            "monotonicity_violations": self.monotonicity_violations,
        }


def _boost_trial(cfg: BoostConfig, trial: int) -> dict:
    n, count = cfg.n, relator_count(cfg.n)
    tseed = derive_seed(cfg.seed, trial)
    base = np.flatnonzero(slot_uniforms(tseed, count) < cfg.p)
    extra = np.flatnonzero(slot_uniforms(derive_seed(cfg.seed, trial, 1), count) < cfg.eps * cfg.p)
    P = presentation_from_indices(n, base)
    verdicts = {
        "base": decide(P, cfg.budget),
        "fixed": decide(P.union(cfg.r_fixed), cfg.budget),
        "eps": decide(presentation_from_indices(n, np.union1d(base, extra)), cfg.budget),
        "strong": decide(P, cfg.budget, forced=cfg.Z),
    }
    return {"trial": trial, "seed": tseed} | {k: v.outcome for k, v in verdicts.items()}


def boost_experiment(cfg: BoostConfig, threads: int = 1) -> BoostReport:
    rows = map_ordered(partial(_boost_trial, cfg), range(cfg.trials), threads)
    est = {k: HEstimate.from_outcomes(cfg.n, cfg.p, [r[k] for r in rows]) for k in ("base", "fixed", "eps", "strong")}
    triv = {k: np.array([r[k] == TRIVIAL for r in rows]) for k in est}
    dominance = int((triv["fixed"] & ~triv["strong"]).sum())
    monotone = int((triv["base"] & ~(triv["fixed"] & triv["eps"] & triv["strong"])).sum())
    return BoostReport(
        cfg,
        est["base"],
        est["fixed"],
        est["eps"],
        est["strong"],
        Gap.paired(triv["fixed"], triv["base"]),
        Gap.paired(triv["eps"], triv["base"]),
        dominance,
        monotone,
        rows,
    )


# -- Z-graph --------------------------------------------------------------

def _components(vertices: Iterable[int], edges: Iterable[tuple[int, int]]) -> list[tuple[set, int]]:
    """Nontrivial components as ``(vertex set, edge count)``."""
    parent = {v: v for v in vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges = list(edges)
    for x, y in edges:
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[rx] = ry
    comps: dict[int, list] = {}
    for x, y in edges:
        entry = comps.setdefault(find(x), [set(), 0])
        entry[0].update((x, y))
        entry[1] += 1
    return [(vs, k) for vs, k in comps.values()]


@dataclass(frozen=True)
class ZGraphStats:
    n: int
    Z: tuple[int, ...]
    vertices: int
    edges: tuple[tuple[int, int], ...]
    nontrivial_components: int
    max_component_edges: int
    q_hat: float
    q_bound: float | None

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def small(self) -> bool:
        """Fewer than ``n^0.6`` nontrivial components, each with at most two edges."""
        return self.nontrivial_components < self.n**0.6 and self.max_component_edges <= 2

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "Z_size": len(self.Z),
            "vertices": self.vertices,
            "edges": self.edge_count,
            "nontrivial_components": self.nontrivial_components,
            "max_component_edges": self.max_component_edges,
            "q_hat": self.q_hat,
            "q_bound": self.q_bound,
            "n_pow_0_6": self.n**0.6,
            "small": self.small,
        }


def _check_closed(Z: frozenset[int]) -> None:
    if any(z ^ 1 not in Z for z in Z):
        raise ValueError("Z must be closed under inversion")


def z_graph_edges(relators: Iterable[Sequence[int]], Z: frozenset[int]) -> set[tuple[int, int]]:
    edges = set()
    for r in relators:
        inside = [x for x in r if x in Z]
        if len(inside) != 1:
            continue
        x, y = (x for x in r if x not in Z)
        if x != y:
            edges.add((min(x, y), max(x, y)))
    return edges


def z_graph_stats(P: Presentation, Z: Iterable[int], p: float | None = None) -> ZGraphStats:
    Z = frozenset(Z)
    _check_closed(Z)
    V = [x for x in range(2 * P.n) if x not in Z]
    edges = z_graph_edges(P.relators, Z)
    comps = _components(V, edges)
    pairs = len(V) * (len(V) - 1) // 2
    return ZGraphStats(
        P.n,
        tuple(sorted(Z)),
        len(V),
        tuple(sorted(edges)),
        len(comps),
        max((k for _, k in comps), default=0),
        len(edges) / pairs if pairs else 0.0,
        6 * len(Z) * p if p is not None else None,
    )


def z_graph_expected_edges(n: int, p: float, Z: Iterable[int]) -> float:
    """Exact ``E[#edges]`` for ``Gamma(n, p)``: each pair is an edge unless
    all relators witnessing it are absent."""
    Z = frozenset(Z)
    witnesses = z_graph_witness_counts(n, Z)
    return float(sum(1.0 - (1.0 - p) ** k for k in witnesses.values()))


def z_graph_witness_counts(n: int, Z: frozenset[int]) -> dict[tuple[int, int], int]:
    counts: dict[tuple[int, int], int] = {}
    for r in relator_array(n):
        e = z_graph_edges([tuple(int(x) for x in r)], Z)
        for edge in e:
            counts[edge] = counts.get(edge, 0) + 1
    return counts


def _z_trial(n: int, p: float, Z: frozenset[int], seed: int, trial: int) -> dict:
    tseed = derive_seed(seed, trial)
    idx = np.flatnonzero(slot_uniforms(tseed, relator_count(n)) < p)
    stats = z_graph_stats(presentation_from_indices(n, idx), Z, p)
    return {"trial": trial, "seed": tseed} | stats.to_dict()


def z_graph_trials(n: int, p: float, Z: Iterable[int], trials: int, seed: int = 0, threads: int = 1) -> list[dict]:
    Z = frozenset(Z)
    _check_closed(Z)
    return map_ordered(partial(_z_trial, n, p, Z, seed), range(trials), threads)


# -- G' and its paths -----------------------------------------------------

def valid_pairs(n: int) -> list[tuple[int, int]]:
    """Unordered pairs ``{a, b}`` of letters that can start a relator (``b != a^-1``)."""
    return [(a, b) for a in range(2 * n) for b in range(a + 1, 2 * n) if b != a ^ 1]


def planted_pairs(n: int, m_pairs: int, seed: int) -> tuple[tuple[int, int], ...]:
    pool = valid_pairs(n)
    if not 0 <= m_pairs <= len(pool):
        raise ValueError(f"m_pairs must be between 0 and {len(pool)}")
    pick = rng(seed, 0x6E7)
    chosen = pick.choice(len(pool), size=m_pairs, replace=False)
    return tuple(sorted(pool[i] for i in chosen))


def _prefixes(M: Iterable[tuple[int, int]]) -> list[tuple[int, int]]:
    return [pre for a, b in M for pre in ((a, b), (b, a))]


def _edge_at(T: set[int], x: int, y: int) -> bool:
    # abx and aby^-1 present, as two distinct relators
    return x != y ^ 1 and ((x in T and y ^ 1 in T) or (y in T and x ^ 1 in T))


def gprime_edges(relators: Iterable[Sequence[int]], M, Z: frozenset[int], n: int) -> set[tuple[int, int]]:
    wanted = set(_prefixes(M))
    suffixes: dict[tuple[int, int], set[int]] = {}
    for a, b, c in relators:
        if (a, b) in wanted:
            suffixes.setdefault((a, b), set()).add(c)
    edges = set()
    for T in suffixes.values():
        for c, c2 in itertools.permutations(T, 2):
            x, y = c, c2 ^ 1
            if x != y and x not in Z and y not in Z:
                edges.add((min(x, y), max(x, y)))
    return edges


def _paths(edges: Iterable[tuple[int, int]]) -> list[tuple[int, int, int]]:
    adj: dict[int, list[int]] = {}
    for x, y in edges:
        adj.setdefault(x, []).append(y)
        adj.setdefault(y, []).append(x)
    out = []
    for v, nb in adj.items():
        for u, w in itertools.combinations(sorted(nb), 2):
            out.append((v, u, w))
    return out


def path_counts(edges: Iterable[tuple[int, int]]) -> tuple[int, int]:
    """``(X, Y)``: paths of length two, and unordered pairs of them sharing a vertex."""
    paths = _paths(edges)
    sets = [frozenset(pth) for pth in paths]
    Y = sum(1 for i, j in itertools.combinations(range(len(sets)), 2) if sets[i] & sets[j])
    return len(paths), Y


def gprime_expected_X(n: int, M, q: float, Z: Iterable[int] = ()) -> float:
    """Exact ``E[X]`` when every relator is present independently with probability ``q``.

    Relators with different prefixes are independent, so for each candidate
    path the joint law of its two edge events is assembled prefix by prefix
    from an enumeration of the few relevant suffixes.
    """
    Z = frozenset(Z)
    V = [x for x in range(2 * n) if x not in Z]
    prefixes = _prefixes(M)
    total = 0.0
    for v in V:
        for u, w in itertools.combinations([x for x in V if x != v], 2):
            none1 = none2 = none12 = 1.0
            for a, b in prefixes:
                letters = sorted({x for x in (v, v ^ 1, u, u ^ 1, w, w ^ 1) if _valid(a, b, x)})
                p1 = p2 = p12 = 0.0  # probability of the edge event(s) failing here
                for bits in itertools.product((0, 1), repeat=len(letters)):
                    T = {x for x, bit in zip(letters, bits) if bit}
                    k = len(T)
                    weight = q**k * (1 - q) ** (len(letters) - k)
                    e1, e2 = _edge_at(T, v, u), _edge_at(T, v, w)
                    p1 += weight * (not e1)
                    p2 += weight * (not e2)
                    p12 += weight * (not e1 and not e2)
                none1 *= p1
                none2 *= p2
                none12 *= p12
            total += 1.0 - none1 - none2 + none12
    return total


@dataclass(frozen=True)
class PathStats:
    n: int
    m_pairs: int
    q: float
    trials: int
    X: tuple[int, ...]
    Y: tuple[int, ...]
    edge_counts: tuple[int, ...]
    expected_X: float | None

    @property
    def mean_X(self) -> float:
        return float(np.mean(self.X))

    @property
    def sigma_mean_X(self) -> float:
        """Standard error of ``mean_X``."""
        return float(np.std(self.X, ddof=1)) / math.sqrt(self.trials) if self.trials > 1 else math.inf

    @property
    def mean_Y(self) -> float:
        return float(np.mean(self.Y))

    @property
    def y_bound_holds(self) -> bool:
        return all(y <= x * (x - 1) // 2 for x, y in zip(self.X, self.Y))

    @property
    def formula_X(self) -> float:
        """``0.5 n^3 m^2 q^4``, the lower-bound regime for ``E[X]``."""
        return 0.5 * self.n**3 * self.m_pairs**2 * self.q**4

    @property
    def formula_Y(self) -> float:
        """``n^4 m^3 q^6``, the upper-bound regime for ``E[Y]``."""
        return self.n**4 * self.m_pairs**3 * self.q**6

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m_pairs": self.m_pairs,
            "q": self.q,
            "trials": self.trials,
            "mean_X": self.mean_X,
            "sigma_mean_X": self.sigma_mean_X,
            "expected_X": self.expected_X,
            "mean_Y": self.mean_Y,
            "mean_edges": float(np.mean(self.edge_counts)),
            "formula_X": self.formula_X,
            "formula_Y": self.formula_Y,
            "y_bound_holds": self.y_bound_holds,
        }


def _path_trial(n: int, q: float, M, Z: frozenset[int], seed: int, trial: int) -> tuple[int, int, int]:
    idx = np.flatnonzero(slot_uniforms(derive_seed(seed, trial), relator_count(n)) < q)
    rels = relator_array(n)[idx].tolist()
    edges = gprime_edges(rels, M, Z, n)
    X, Y = path_counts(edges)
    return X, Y, len(edges)


def gprime_path_stats(
    n: int,
    m_pairs: int,
    eps: float,
    p: float,
    trials: int,
    seed: int = 0,
    Z: Iterable[int] = (),
    threads: int = 1,
    exact_limit: int = 40,
) -> PathStats:
    """Sample ``R_eps p``, build G' and count ``X`` and ``Y`` per trial.

    The planted set ``M`` depends only on ``seed``.  The exact expectation is
    computed when at most ``exact_limit`` vertices remain.
    """
    Z = frozenset(Z)
    _check_closed(Z)
    q = eps * p
    if not 0 <= q <= 1:
        raise ValueError("eps * p must lie in [0, 1]")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    M = planted_pairs(n, m_pairs, seed)
    rows = map_ordered(partial(_path_trial, n, q, M, Z, seed), range(trials), threads)
    expected = gprime_expected_X(n, M, q, Z) if 2 * n - len(Z) <= exact_limit else None
    return PathStats(
        n,
        m_pairs,
        q,
        trials,
        tuple(r[0] for r in rows),
        tuple(r[1] for r in rows),
        tuple(r[2] for r in rows),
        expected,
    )
