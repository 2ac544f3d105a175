"""Decorated abstract van Kampen diagrams and their constraint analysis."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterator

from trigroup.davkd.discs import Disc, discs
from trigroup.presentation import Presentation


class BudgetExceeded(RuntimeError):
    pass


def _normalize_labels(labels) -> tuple[int, ...]:
    seen: dict[int, int] = {}
    return tuple(seen.setdefault(x, len(seen) + 1) for x in labels)


def restricted_growth(m: int) -> Iterator[tuple[int, ...]]:
    """Label sequences normalized by first appearance (set partitions of m faces)."""

    def rec(prefix, top):
        if len(prefix) == m:
            yield tuple(prefix)
            return
        for x in range(1, top + 2):
            prefix.append(x)
            yield from rec(prefix, max(top, x))
            prefix.pop()

    yield from rec([], 0)


@dataclass(frozen=True)
class Diagram:
    """A triangulated disc with a label, orientation bit and basepoint per face.

    ``orientation[f]`` is 0 when face ``f`` reads counterclockwise (the disc
    orientation) and 1 otherwise; ``basepoint[f]`` is the corner the reading
    starts from.  Labels are renumbered by first appearance.
    """

    disc: Disc
    labels: tuple[int, ...]
    orientation: tuple[int, ...]
    basepoint: tuple[int, ...]

    def __post_init__(self):
        m = self.disc.m
        if not (len(self.labels) == len(self.orientation) == len(self.basepoint) == m):
            raise ValueError("one decoration per face")
        if any(o not in (0, 1) for o in self.orientation) or any(b not in (0, 1, 2) for b in self.basepoint):
            raise ValueError("orientation in {0,1}, basepoint in {0,1,2}")
        object.__setattr__(self, "labels", _normalize_labels(self.labels))

    @property
    def m(self) -> int:
        return self.disc.m

    @property
    def k(self) -> int:
        return max(self.labels)

    @property
    def l1(self) -> int:
        return self.disc.l1

    @property
    def l2(self) -> int:
        return self.disc.l2

    def position(self, f: int, s: int) -> int:
        """Position (0, 1, 2) of side ``s`` of face ``f`` in the face's reading."""
        b = self.basepoint[f]
        if self.orientation[f] == 0:
            return (s - b) % 3
        return (b - 1 - s) % 3

    @cached_property
    def rank(self) -> tuple[int, ...]:
        """Map label -> 1-based rank with multiplicities nonincreasing (ties by label)."""
        counts = [0] * (self.k + 1)
        for x in self.labels:
            counts[x] += 1
        order = sorted(range(1, self.k + 1), key=lambda x: (-counts[x], x))
        rank = [0] * (self.k + 1)
        for r, x in enumerate(order, start=1):
            rank[x] = r
        return tuple(rank)

    @property
    def multiplicities(self) -> tuple[int, ...]:
        """``m_1 >= m_2 >= ... >= m_k``."""
        return tuple(sorted((self.labels.count(x) for x in range(1, self.k + 1)), reverse=True))

    def constraint_edges(self) -> list[tuple[int, int, int, int]]:
        """Edges ``(i, s, j, t)`` of the constraint graph, ``i >= j`` ranked labels, 0-based positions."""
        out = []
        rank = self.rank
        for d, g in self.disc.internal_edges():
            f, s = divmod(d, 3)
            h, t = divmod(g, 3)
            a = (rank[self.labels[f]], self.position(f, s))
            b = (rank[self.labels[h]], self.position(h, t))
            if b > a:
                a, b = b, a
            out.append(a + b)
        return sorted(out)

    def to_dict(self) -> dict:
        faces = [
            {"label": self.labels[f], "orientation": self.orientation[f], "basepoint": self.basepoint[f]}
            for f in range(self.m)
        ]
        edges = []
        for d, g in enumerate(self.disc.glue):
            if g == -1:
                edges.append({"sides": [list(divmod(d, 3))], "boundary": True})
            elif d < g:
                edges.append({"sides": [list(divmod(d, 3)), list(divmod(g, 3))], "boundary": False})
        return {"m": self.m, "faces": faces, "edges": edges}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> "Diagram":
        m = doc["m"]
        glue = [-1] * (3 * m)
        for edge in doc["edges"]:
            sides = [3 * f + s for f, s in edge["sides"]]
            if edge.get("boundary"):
                if len(sides) != 1:
                    raise ValueError("boundary edges have one side")
                continue
            if len(sides) != 2:
                raise ValueError("internal edges have two sides")
            d, g = sides
            glue[d], glue[g] = g, d
        disc = Disc(m, tuple(glue))
        if not disc.is_disc():
            raise ValueError("edge list does not describe a disc")
        faces = doc["faces"]
        return cls(
            disc,
            tuple(x["label"] for x in faces),
            tuple(x["orientation"] for x in faces),
            tuple(x["basepoint"] for x in faces),
        )

    @classmethod
    def from_json(cls, text: str) -> "Diagram":
        return cls.from_dict(json.loads(text))


def _decorations(m: int):
    for combo in itertools.product(range(6), repeat=m):
        yield tuple(c // 3 for c in combo), tuple(c % 3 for c in combo)


def raw_count(m: int) -> int:
    """Number of diagrams ``enumerate_davkd(m, 'raw')`` yields."""
    bell = sum(1 for _ in restricted_growth(m))
    return len(discs(m)) * bell * 6**m


def _transport(d: Diagram, face_map, rotation) -> tuple:
    m = d.m
    labels = [0] * m
    orient = [0] * m
    base = [0] * m
    for f in range(m):
        g = face_map[f]
        labels[g] = d.labels[f]
        orient[g] = d.orientation[f]
        base[g] = (d.basepoint[f] + rotation[f]) % 3
    return (_normalize_labels(labels), tuple(orient), tuple(base))


def orbit(d: Diagram) -> set[tuple]:
    """Decorations equivalent to ``d`` under automorphisms of its disc."""
    return {_transport(d, fm, rot) for fm, rot in d.disc.automorphisms()}


def enumerate_davkd(m: int, mode: str = "raw") -> Iterator[Diagram]:
    """Stream decorated diagrams with ``m`` faces.

    ``raw`` yields every decoration of every disc; ``canonical`` yields one
    representative (the lexicographically least decoration) per orbit of the
    disc's automorphism group.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if mode not in ("raw", "canonical"):
        raise ValueError("mode must be 'raw' or 'canonical'")
    for disc in discs(m):
        auts = disc.automorphisms()
        for labels in restricted_growth(m):
            for orient, base in _decorations(m):
                d = Diagram(disc, labels, orient, base)
                if mode == "canonical" and len(auts) > 1:
                    key = (d.labels, d.orientation, d.basepoint)
                    if any(img < key for img in orbit(d)):
                        continue
                yield d


def is_reduced(D: Diagram) -> bool:
    """False iff two adjacent faces are mirror images: same label, opposite
    orientations, shared edge at the same position in both readings."""
    for d, g in D.disc.internal_edges():
        f, s = divmod(d, 3)
        h, t = divmod(g, 3)
        if (
            f != h
            and D.labels[f] == D.labels[h]
            and D.orientation[f] != D.orientation[h]
            and D.position(f, s) == D.position(h, t)
        ):
            return False
    return True


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


@dataclass(frozen=True)
class ConstraintAnalysis:
    """Component counts ``C_i`` of the constraint graphs ``G_1..G_k`` and the
    degrees of freedom ``d_i = C_i - i(3/2 + f)`` (exact rationals)."""

    k: int
    multiplicities: tuple[int, ...]
    C: tuple[int, ...]
    edges_per_step: tuple[int, ...]
    f: Fraction

    @property
    def d(self) -> tuple[Fraction, ...]:
        step = Fraction(3, 2) + self.f
        return tuple(c - i * step for i, c in enumerate(self.C, start=1))

    @property
    def min_d(self) -> Fraction:
        return min(self.d)

    @property
    def edgeless(self) -> bool:
        return sum(self.edges_per_step) == 0


def constraint_analysis(D: Diagram, f=Fraction(1, 2)) -> ConstraintAnalysis:
    f = _as_fraction(f)
    if f <= 0:
        raise ValueError("f must be positive")
    k = D.k
    parent = list(range(3 * k))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    by_step = [[] for _ in range(k + 1)]
    for i, s, j, t in D.constraint_edges():
        by_step[i].append((3 * (i - 1) + s, 3 * (j - 1) + t))
    C = []
    comps = 0
    for i in range(1, k + 1):
        comps += 3
        for a, b in by_step[i]:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
                comps -= 1
        C.append(comps)
    return ConstraintAnalysis(k, D.multiplicities, tuple(C), tuple(len(x) for x in by_step[1:]), f)


def fulfillability_upper_bound(D: Diagram, n: int, p: float) -> float:
    """``min(1, min_i n^C_i p^i)``, evaluated in log space."""
    if n < 1 or not 0 < p <= 1:
        raise ValueError("need n >= 1 and 0 < p <= 1")
    C = constraint_analysis(D).C
    logs = [c * math.log(n) + i * math.log(p) for i, c in enumerate(C, start=1)]
    return math.exp(min(0.0, min(logs)))


@dataclass(frozen=True)
class BoundaryCheck:
    lhs: Fraction
    rhs: Fraction

    @property
    def holds(self) -> bool:
        return self.lhs >= self.rhs

    @property
    def equality(self) -> bool:
        return self.lhs == self.rhs


def boundary_bound_check(D: Diagram, f) -> BoundaryCheck:
    """Compare ``|dD|`` with ``3|D|(1 - 2d) + 2 sum_i d_i (m_i - m_{i+1})``, ``d = 1/2 - f/3``."""
    ca = constraint_analysis(D, f)
    density = Fraction(1, 2) - ca.f / 3
    ms = list(ca.multiplicities) + [0]
    rhs = 3 * D.m * (1 - 2 * density) + 2 * sum(di * (ms[i] - ms[i + 1]) for i, di in enumerate(ca.d))
    return BoundaryCheck(Fraction(D.l2), rhs)


# -- fulfillability -----------------------------------------------------------

def side_constraints(D: Diagram) -> list[tuple[int, int, int, int, int, int]]:
    """``(i, s, oi, j, t, oj)`` per internal edge, ranked labels.

    Face ``F`` with relator ``r`` reads ``r[s] ^ oF`` along its side in the
    disc orientation (``^ 1`` inverts a letter).  Across an edge the two
    readings must be mutually inverse.
    """
    rank = D.rank
    out = []
    for d, g in D.disc.internal_edges():
        f, s = divmod(d, 3)
        h, t = divmod(g, 3)
        out.append(
            (rank[D.labels[f]], D.position(f, s), D.orientation[f], rank[D.labels[h]], D.position(h, t), D.orientation[h])
        )
    return out


def is_consistent(D: Diagram) -> bool:
    """Whether the side constraints have a solution over all words (cyclically
    reduced or not).

    Each internal edge says one letter equals another or its inverse.  A cycle
    of such identifications with an odd number of inversions forces a letter
    to equal its own inverse, which no assignment satisfies.  Inconsistent
    diagrams are never fulfillable.
    """
    k = D.k
    parent = list(range(3 * k))
    parity = [0] * (3 * k)

    def find(x):
        p = 0
        while parent[x] != x:
            p ^= parity[x]
            x = parent[x]
        return x, p

    for i, s, oi, j, t, oj in side_constraints(D):
        want = 1 ^ oi ^ oj  # 1: the two letters are mutually inverse
        (ru, pu), (rv, pv) = find(3 * (i - 1) + s), find(3 * (j - 1) + t)
        if ru == rv:
            if pu ^ pv != want:
                return False
        else:
            parent[ru] = rv
            parity[ru] = pu ^ pv ^ want
    return True


def constraint_signature(D: Diagram) -> tuple:
    """Everything fulfillability depends on: ``k`` and the normalized side constraints."""
    cons = []
    for i, s, oi, j, t, oj in side_constraints(D):
        a, b = (i, s, oi), (j, t, oj)
        cons.append(a + b if a >= b else b + a)
    return (D.k, tuple(sorted(cons)))


def _search(k: int, cons, choices, max_nodes: int, first_only: bool):
    choices = list(choices)
    # relators indexed by (position, letter) so cross-label constraints pick candidates directly
    index: dict[tuple[int, int], list] = {}
    for r in choices:
        for pos in range(3):
            index.setdefault((pos, r[pos]), []).append(r)
    cross = [[] for _ in range(k + 1)]  # (s, oL, j, t, oj): side s of label L against earlier label j
    inner = [[] for _ in range(k + 1)]
    for c in cons:
        i, s, oi, j, t, oj = c
        if i == j:
            inner[i].append(c)
        elif i > j:
            cross[i].append((s, oi, j, t, oj))
        else:
            cross[j].append((t, oj, i, s, oi))
    assign = [None] * (k + 1)
    nodes = 0
    found = []

    def candidates(label):
        if not cross[label]:
            return choices
        # r[s] ^ oL must invert assign[j][t] ^ oj
        pools = sorted(
            (index.get((s, assign[j][t] ^ oj ^ 1 ^ oL), []) for s, oL, j, t, oj in cross[label]),
            key=len,
        )
        rest = [set(p) for p in pools[1:]]
        return [r for r in pools[0] if all(r in q for q in rest)]

    def ok(label):
        r = assign[label]
        return all((r[s] ^ oi) == (r[t] ^ oj ^ 1) for _, s, oi, _, t, oj in inner[label])

    def rec(label):
        nonlocal nodes
        if label > k:
            found.append(tuple(assign[1:]))
            return first_only
        for r in candidates(label):
            nodes += 1
            if nodes > max_nodes:
                raise BudgetExceeded(f"fulfillability search exceeded {max_nodes} nodes")
            if r in assign[1:label]:
                continue  # distinct labels stand for distinct relators
            assign[label] = r
            if ok(label) and rec(label + 1):
                return True
        assign[label] = None
        return False

    rec(1)
    return found


def is_fulfillable(D: Diagram, P: Presentation, max_faces: int = 12, max_nodes: int = 10**6):
    """Search for relators per label making ``D`` a van Kampen diagram over ``P``.

    Distinct labels receive distinct relators.  Returns ``(True, witness)`` with ``witness`` mapping each label to its
    relator, or ``(False, None)``.  The boundary is unconstrained.
    """
    if D.m > max_faces:
        raise BudgetExceeded(f"diagram has {D.m} faces, cap is {max_faces}")
    if not P.relators:
        return False, None
    found = _search(D.k, side_constraints(D), P.relators, max_nodes, True)
    if not found:
        return False, None
    rank = D.rank
    return True, {x: found[0][rank[x] - 1] for x in range(1, D.k + 1)}


def fulfilling_tuples(D: Diagram, relators, max_nodes: int = 10**8) -> list[tuple]:
    """Every per-label relator tuple (ranked label order, pairwise distinct) fulfilling ``D``."""
    return _search(D.k, side_constraints(D), list(relators), max_nodes, False)


def analysis_row(D: Diagram, f=Fraction(1, 2)) -> dict:
    """One JSONL report row; rationals are written as ``"p/q"`` strings."""
    ca = constraint_analysis(D, f)
    chk = boundary_bound_check(D, f)
    return {
        "m": D.m,
        "k": D.k,
        "l1": D.l1,
        "l2": D.l2,
        "C": list(ca.C),
        "d": [str(x) for x in ca.d],
        "min_d": str(ca.min_d),
        "bound_lhs": str(chk.lhs),
        "bound_rhs": str(chk.rhs),
    }
