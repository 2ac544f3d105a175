"""Fulfillability probabilities of diagrams under Gamma(n, p).

A diagram is fulfilled by a presentation iff the presentation contains every
relator of some witness (one relator per label, pairwise distinct).  The
event is a monotone DNF over independent relator slots, so its probability
is computed exactly by Shannon expansion, and Monte Carlo frequencies for
many diagrams at once come from an inverted index of witness relator sets.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from trigroup.davkd.diagram import Diagram, constraint_signature, fulfilling_tuples
from trigroup.presentation import relator_array, relator_count
from trigroup.seeding import derive_seed, slot_uniforms


def witness_sets(D: Diagram, n: int) -> list[frozenset[int]]:
    """Relator-index sets whose presence fulfills ``D`` (duplicates removed)."""
    rels = [tuple(r) for r in relator_array(n).tolist()]
    rank = {r: i for i, r in enumerate(rels)}
    return sorted({frozenset(rank[r] for r in t) for t in fulfilling_tuples(D, rels)}, key=sorted)


def dnf_probability(terms: Iterable[Iterable[int]], p: float) -> float:
    """``Pr[some term has all its variables true]``, variables i.i.d. Bernoulli(p)."""
    q = 1.0 - p

    @lru_cache(maxsize=None)
    def prob(ts: frozenset[int]) -> float:
        if not ts:
            return 0.0
        if 0 in ts:
            return 1.0
        comps = _components(ts)
        if len(comps) > 1:
            return 1.0 - math.prod(1.0 - prob(c) for c in comps)
        counts = Counter(v for t in ts for v in _bits(t))
        x = min(counts, key=lambda v: (-counts[v], v))
        bit = 1 << x
        present = _minimal({t & ~bit for t in ts})
        absent = frozenset(t for t in ts if not t & bit)
        return p * prob(present) + q * prob(absent)

    masks = {sum(1 << v for v in set(t)) for t in terms}
    return prob(_minimal(masks))


def _bits(t: int) -> list[int]:
    out = []
    while t:
        low = t & -t
        out.append(low.bit_length() - 1)
        t ^= low
    return out


def _minimal(ts: set[int]) -> frozenset[int]:
    # drop every term that contains another term
    if 0 in ts:
        return frozenset((0,))
    keep = []
    for t in ts:
        sub = (t - 1) & t
        while sub:
            if sub in ts:
                break
            sub = (sub - 1) & t
        else:
            keep.append(t)
    return frozenset(keep)


def _components(ts: frozenset[int]) -> list[frozenset[int]]:
    groups: list[tuple[int, list[int]]] = []
    for t in ts:
        support, members = t, [t]
        rest = []
        for s, ms in groups:
            if s & support:
                support |= s
                members.extend(ms)
            else:
                rest.append((s, ms))
        groups = rest + [(support, members)]
    return [frozenset(ms) for _, ms in groups]


def exact_fulfillability(D: Diagram, n: int, p: float) -> float:
    return dnf_probability(witness_sets(D, n), p)


def sample_presence(n: int, p: float, samples: int, seed: int) -> list[np.ndarray]:
    """Present relator indices for each of ``samples`` draws of Gamma(n, p)."""
    count = relator_count(n)
    return [np.flatnonzero(slot_uniforms(derive_seed(seed, s), count) < p) for s in range(samples)]


def _encode(idx: np.ndarray, base: int) -> np.ndarray:
    # sorted relator indices -> one integer, shorter sets padded with zeros
    idx = np.sort(idx, axis=1) + 1
    key = np.zeros(len(idx), dtype=np.int64)
    for col in range(idx.shape[1]):
        key = key * base + idx[:, col]
    return key


def witness_keys(D: Diagram, n: int) -> np.ndarray:
    """Distinct encoded witness relator sets of ``D`` (see ``_encode``)."""
    rels = [tuple(r) for r in relator_array(n).tolist()]
    rank = {r: i for i, r in enumerate(rels)}
    tuples = fulfilling_tuples(D, rels)
    if not tuples:
        return np.zeros(0, dtype=np.int64)
    idx = np.array([[rank[r] for r in t] for t in tuples], dtype=np.int64)
    return np.unique(_encode(idx, relator_count(n) + 1))


@dataclass
class WitnessIndex:
    """Encoded witness sets of many diagrams, grouped by constraint signature.

    A sample fulfills a signature iff one of its own relator subsets (of size
    at most the largest label count) is among the signature's witness keys.
    """

    n: int
    group_of: list[int]
    kmax: int
    ukey: np.ndarray
    start: np.ndarray
    stop: np.ndarray
    gid: np.ndarray

    @classmethod
    def build(cls, diagrams: Sequence[Diagram], n: int) -> "WitnessIndex":
        sig_id: dict[tuple, int] = {}
        group_of = []
        keys, gids = [], []
        kmax = 0
        for D in diagrams:
            sig = constraint_signature(D)
            if sig not in sig_id:
                sig_id[sig] = len(sig_id)
                kmax = max(kmax, D.k)
                w = witness_keys(D, n)
                keys.append(w)
                gids.append(np.full(len(w), sig_id[sig], dtype=np.int64))
            group_of.append(sig_id[sig])
        key = np.concatenate(keys) if keys else np.zeros(0, dtype=np.int64)
        gid = np.concatenate(gids) if gids else np.zeros(0, dtype=np.int64)
        order = np.argsort(key, kind="stable")
        key, gid = key[order], gid[order]
        ukey, start = np.unique(key, return_index=True)
        stop = np.append(start[1:], len(key)).astype(np.int64)
        return cls(n, group_of, kmax, ukey, start.astype(np.int64), stop, gid)

    @property
    def groups(self) -> int:
        return max(self.group_of, default=-1) + 1

    def _hits(self, draws: Sequence[np.ndarray]) -> np.ndarray:
        G = self.groups
        base = relator_count(self.n) + 1
        qkeys, qsample = [], []
        for s, present in enumerate(draws):
            for size in range(1, self.kmax + 1):
                for sub in itertools.combinations(present.tolist(), size):
                    k = 0
                    for v in sub:
                        k = k * base + v + 1
                    qkeys.append(k)
                    qsample.append(s)
        hits = np.zeros(G, dtype=np.int64)
        if not qkeys or not len(self.ukey):
            return hits
        q = np.array(qkeys, dtype=np.int64)
        qs = np.array(qsample, dtype=np.int64)
        pos = np.searchsorted(self.ukey, q)
        found = (pos < len(self.ukey)) & (self.ukey[np.minimum(pos, len(self.ukey) - 1)] == q)
        pos, qs = pos[found], qs[found]
        lens = self.stop[pos] - self.start[pos]
        rows = np.repeat(qs, lens)
        offs = np.arange(lens.sum()) - np.repeat(np.cumsum(lens) - lens, lens)
        cols = self.gid[np.repeat(self.start[pos], lens) + offs]
        pairs = np.unique(rows * G + cols)
        return np.bincount(pairs % G, minlength=G)

    def frequencies(self, p: float, samples: int, seed: int = 0, chunk: int = 500) -> list[float]:
        draws = sample_presence(self.n, p, samples, seed)
        hits = np.zeros(self.groups, dtype=np.int64)
        for lo in range(0, samples, chunk):
            hits += self._hits(draws[lo:lo + chunk])
        return [float(hits[g]) / samples for g in self.group_of]


def fulfillability_frequencies(
    diagrams: Sequence[Diagram], n: int, p: float, samples: int, seed: int = 0
) -> list[float]:
    """Monte Carlo frequency of fulfillability for each diagram on shared samples."""
    return WitnessIndex.build(diagrams, n).frequencies(p, samples, seed)
