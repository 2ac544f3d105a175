"""Coset enumeration of the trivial subgroup (HLT strategy with coincidences).

Columns are letter codes, so the inverse column of ``x`` is ``x ^ 1``.
Processing order is deterministic: cosets in creation order, relators in the
order given, columns ascending.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from trigroup.presentation import Presentation


class _Exceeded(Exception):
    pass


@dataclass(frozen=True)
class CosetResult:
    """``order`` is the group order when finite, ``None`` when the budget ran out."""

    order: int | None
    cosets_defined: int
    coincidences: int
    max_cosets: int

    @property
    def finite(self) -> bool:
        return self.order is not None

    def summary(self) -> dict:
        return {
            "order": self.order,
            "cosets_defined": self.cosets_defined,
            "coincidences": self.coincidences,
            "max_cosets": self.max_cosets,
        }


class _Table:
    def __init__(self, ncols: int, max_cosets: int):
        self.ncols = ncols
        self.max_cosets = max_cosets
        self.rows: list[list[int]] = [[-1] * ncols]
        self.parent = [0]
        self.coincidences = 0

    def define(self, c: int, x: int) -> None:
        if len(self.rows) >= self.max_cosets:
            raise _Exceeded
        d = len(self.rows)
        self.rows.append([-1] * self.ncols)
        self.parent.append(d)
        self.rows[c][x] = d
        self.rows[d][x ^ 1] = c

    def rep(self, c: int) -> int:
        parent = self.parent
        r = c
        while parent[r] != r:
            r = parent[r]
        while parent[c] != r:
            parent[c], c = r, parent[c]
        return r

    def _merge(self, a: int, b: int, queue: list[int]) -> None:
        a, b = self.rep(a), self.rep(b)
        if a == b:
            return
        lo, hi = min(a, b), max(a, b)
        self.parent[hi] = lo
        queue.append(hi)

    def coincidence(self, a: int, b: int) -> None:
        self.coincidences += 1
        rows = self.rows
        queue: list[int] = []
        self._merge(a, b, queue)
        i = 0
        while i < len(queue):
            g = queue[i]
            i += 1
            row = rows[g]
            for x in range(self.ncols):
                d = row[x]
                if d < 0:
                    continue
                xi = x ^ 1
                if rows[d][xi] == g:
                    rows[d][xi] = -1
                mu, nu = self.rep(g), self.rep(d)
                if rows[mu][x] >= 0:
                    self._merge(nu, rows[mu][x], queue)
                elif rows[nu][xi] >= 0:
                    self._merge(mu, rows[nu][xi], queue)
                else:
                    rows[mu][x] = nu
                    rows[nu][xi] = mu

    def scan_and_fill(self, alpha: int, word: Sequence[int]) -> None:
        rows = self.rows
        f = alpha
        b = alpha
        i = 0
        j = len(word) - 1
        while True:
            while i <= j and rows[f][word[i]] >= 0:
                f = rows[f][word[i]]
                i += 1
            if i > j:
                if f != alpha:
                    self.coincidence(f, alpha)
                return
            while j >= i and rows[b][word[j] ^ 1] >= 0:
                b = rows[b][word[j] ^ 1]
                j -= 1
            if j < i:
                self.coincidence(f, b)
                return
            if i == j:
                rows[f][word[i]] = b
                rows[b][word[i] ^ 1] = f
                return
            self.define(f, word[i])

    def live(self) -> int:
        return sum(1 for c in range(len(self.rows)) if self.parent[c] == c)


def enumerate_words(ngens: int, relators: Sequence[Sequence[int]], max_cosets: int) -> CosetResult:
    """Enumerate cosets of the trivial subgroup of ``<ngens | relators>``.

    Relators are arbitrary words over letter codes.
    """
    if max_cosets < 1:
        raise ValueError("max_cosets must be >= 1")
    rels = [list(w) for w in relators if len(w)]
    table = _Table(2 * ngens, max_cosets)
    try:
        alpha = 0
        while alpha < len(table.rows):
            if table.parent[alpha] == alpha:
                for w in rels:
                    table.scan_and_fill(alpha, w)
                    if table.parent[alpha] != alpha:
                        break
                if table.parent[alpha] == alpha:
                    row = table.rows[alpha]
                    for x in range(table.ncols):
                        if row[x] < 0:
                            table.define(alpha, x)
            alpha += 1
    except _Exceeded:
        return CosetResult(None, len(table.rows), table.coincidences, max_cosets)
    return CosetResult(table.live(), len(table.rows), table.coincidences, max_cosets)


def coset_enumerate(P: Presentation, max_cosets: int) -> CosetResult:
    """Order of ``<S | R>`` if at most ``max_cosets`` cosets suffice, else ``order=None``."""
    return enumerate_words(P.n, P.relators, max_cosets)
