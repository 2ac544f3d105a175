"""Triangulated discs as combinatorial maps.

A disc with ``m`` faces has darts ``3*f + s`` (face ``f``, side ``s``); sides
of a face run counterclockwise, so dart ``(f, s)`` goes from corner ``s`` to
corner ``s+1`` with the face on its left.  ``glue[d]`` is the dart on the
other side of the edge, or ``-1`` on the boundary.

Discs are generated by shelling: starting from one triangle, a new face is
glued along one boundary edge (adding a vertex) or along two consecutive
boundary edges (swallowing the vertex between them).  Every triangulated disc
arises this way; duplicates are removed with an orientation-preserving
canonical code.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache


@dataclass(frozen=True)
class Disc:
    m: int
    glue: tuple[int, ...]

    def __post_init__(self):
        if self.m < 1 or len(self.glue) != 3 * self.m:
            raise ValueError("glue must have 3*m entries")
        for d, g in enumerate(self.glue):
            if g != -1 and self.glue[g] != d:
                raise ValueError(f"gluing is not an involution at dart {d}")

    @property
    def l1(self) -> int:
        return sum(1 for g in self.glue if g != -1) // 2

    @property
    def l2(self) -> int:
        return sum(1 for g in self.glue if g == -1)

    def internal_edges(self) -> list[tuple[int, int]]:
        return [(d, g) for d, g in enumerate(self.glue) if g > d]

    def boundary_darts(self) -> list[int]:
        return [d for d, g in enumerate(self.glue) if g == -1]

    @cached_property
    def vertex_of_corner(self) -> tuple[int, ...]:
        """Vertex id of corner ``3*f + s`` (the start of dart ``(f, s)``)."""
        parent = list(range(3 * self.m))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for d, g in self.internal_edges():
            # dart d runs start(d) -> end(d); g runs the other way
            for a, b in ((d, _next(g)), (_next(d), g)):
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
        ids: dict[int, int] = {}
        return tuple(ids.setdefault(find(c), len(ids)) for c in range(3 * self.m))

    @property
    def V(self) -> int:
        return len(set(self.vertex_of_corner))

    def euler_characteristic(self) -> int:
        return self.V - (self.l1 + self.l2) + self.m

    def boundary_cycle(self) -> list[int]:
        """Boundary darts in counterclockwise order, starting from the smallest."""
        darts = self.boundary_darts()
        if not darts:
            return []
        start = darts[0]
        cycle = [start]
        d = self.next_boundary(start)
        while d != start:
            cycle.append(d)
            d = self.next_boundary(d)
            if len(cycle) > len(darts):
                raise ValueError("boundary is not a single cycle")
        return cycle

    def next_boundary(self, d: int) -> int:
        # rotate around the end vertex of d until a boundary dart leaves it
        x = _next(d)
        while self.glue[x] != -1:
            x = _next(self.glue[x])
        return x

    def is_disc(self) -> bool:
        """Connected, one boundary cycle, Euler characteristic 1."""
        if not self.connected() or self.euler_characteristic() != 1:
            return False
        try:
            return len(self.boundary_cycle()) == self.l2 and self.l2 > 0
        except ValueError:
            return False

    def connected(self) -> bool:
        seen = {0}
        stack = [0]
        while stack:
            f = stack.pop()
            for s in range(3):
                g = self.glue[3 * f + s]
                if g != -1 and g // 3 not in seen:
                    seen.add(g // 3)
                    stack.append(g // 3)
        return len(seen) == self.m

    def canonical(self) -> tuple["Disc", tuple]:
        code, _ = _canonical_code(self.glue)
        return Disc(self.m, _glue_from_code(code)), code

    def automorphisms(self) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        """Orientation-preserving automorphisms as ``(face_map, rotation)`` pairs.

        Side ``s`` of face ``f`` maps to side ``(s + rotation[f]) % 3`` of
        face ``face_map[f]``.
        """
        return _automorphisms(self.glue)


def _next(d: int) -> int:
    return 3 * (d // 3) + (d % 3 + 1) % 3


def _prev(d: int) -> int:
    return 3 * (d // 3) + (d % 3 + 2) % 3


def _traverse(glue: tuple[int, ...], start: int):
    """BFS numbering from dart ``start``; returns (code, face order, rotation per face)."""
    m = len(glue) // 3
    order = [start // 3]
    rot = {start // 3: start % 3}
    index = {start // 3: 0}
    code = []
    i = 0
    while i < len(order):
        f = order[i]
        r = rot[f]
        for k in range(3):
            g = glue[3 * f + (r + k) % 3]
            if g == -1:
                code.append(-1)
                continue
            h = g // 3
            if h not in index:
                index[h] = len(order)
                order.append(h)
                rot[h] = g % 3
            code.append(3 * index[h] + (g % 3 - rot[h]) % 3)
        i += 1
    if len(order) != m:
        raise ValueError("disc is not connected")
    return tuple(code), order, rot


def _canonical_code(glue: tuple[int, ...]):
    best = None
    starts = []
    for d in range(len(glue)):
        code, order, rot = _traverse(glue, d)
        if best is None or code < best:
            best = code
            starts = [d]
        elif code == best:
            starts.append(d)
    return best, starts


def _glue_from_code(code: tuple) -> tuple[int, ...]:
    return tuple(code)


@lru_cache(maxsize=4096)
def _automorphisms(glue: tuple[int, ...]):
    # automorphisms correspond to starts producing the code of start 0
    ref_code, ref_order, ref_rot = _traverse(glue, 0)
    auts = []
    for d in range(len(glue)):
        code, order, rot = _traverse(glue, d)
        if code != ref_code:
            continue
        m = len(glue) // 3
        face_map = [0] * m
        rotation = [0] * m
        for f_ref, f_img in zip(ref_order, order):
            face_map[f_ref] = f_img
            rotation[f_ref] = (rot[f_img] - ref_rot[f_ref]) % 3
        auts.append((tuple(face_map), tuple(rotation)))
    return auts


def _shell_children(disc: Disc):
    m = disc.m
    base = list(disc.glue)
    cycle = disc.boundary_cycle()
    L = len(cycle)
    new = 3 * m
    # glue along one boundary edge: new side 0 against it
    for b in cycle:
        glue = base + [-1, -1, -1]
        glue[b] = new
        glue[new] = b
        yield tuple(glue)
    # glue along two consecutive boundary edges b1 (u->v), b2 (v->w)
    if L >= 2:
        for i in range(L):
            b1, b2 = cycle[i], cycle[(i + 1) % L]
            if L == 2 and i == 1:
                break  # same pair of edges as i == 0
            glue = base + [-1, -1, -1]
            glue[b1] = new
            glue[new] = b1
            glue[b2] = new + 2
            glue[new + 2] = b2
            yield tuple(glue)


@lru_cache(maxsize=None)
def discs(m: int) -> tuple[Disc, ...]:
    """All triangulated discs with ``m`` faces, one per orientation-preserving
    isomorphism class, sorted by canonical code.  The ``glue`` of each is its
    canonical code, so face indices follow the canonical BFS order."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if m == 1:
        return (Disc(1, (-1, -1, -1)),)
    found = {}
    for parent in discs(m - 1):
        for glue in _shell_children(parent):
            code, _ = _canonical_code(glue)
            if code not in found:
                found[code] = Disc(m, _glue_from_code(code))
    return tuple(found[c] for c in sorted(found))
