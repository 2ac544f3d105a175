"""Deduction cascade: congruence closure over letters with inverse involution.

A relator ``xyz`` (and every rotation of it and of its formal inverse) says
the third letter is determined by the first two.  The closure keeps a
signature table keyed by the classes of the first two letters; two words with
equal signatures force their third letters together (rule R1).  The axioms
``y y^-1 e`` (all rotations, for every letter ``y``) ride through the same
table and implement the two e-rules:

* R2: ``xyz`` with ``y ~ x^-1`` forces ``z ~ e``;
* R3: ``xyz`` with ``x ~ e`` forces ``z ~ y^-1``.

Every merge ``u ~ v`` is mirrored by ``u^-1 ~ v^-1``.  Each logged step names
the two words whose signatures collided, so the log replays independently.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable, Sequence

from trigroup.presentation import Presentation, format_letter

# word provenance: ("rel", relator_index, rotation, inverted) or ("ax", letter, rotation)
WordRef = tuple


def _inv(x: int, e: int) -> int:
    return x if x == e else x ^ 1


def relator_words(rel: Sequence[int]) -> list[tuple[tuple[int, int, int], int, bool]]:
    """The six words a relator certifies: three rotations of it and of its inverse."""
    a, b, c = rel
    inv = (c ^ 1, b ^ 1, a ^ 1)
    out = []
    for inverted, w in ((False, (a, b, c)), (True, inv)):
        for rot in range(3):
            out.append(((w[rot], w[(rot + 1) % 3], w[(rot + 2) % 3]), rot, inverted))
    return out


def axiom_word(y: int, rot: int, e: int) -> tuple[int, int, int]:
    base = (y, _inv(y, e), e)
    return (base[rot], base[(rot + 1) % 3], base[(rot + 2) % 3])


def classify(ref1: WordRef, ref2: WordRef, e: int) -> str:
    axioms = [r for r in (ref1, ref2) if r[0] == "ax"]
    if not axioms:
        return "R1"
    if len(axioms) == 2:
        return "AX"
    _, y, rot = axioms[0]
    key = axiom_word(y, rot, e)[:2]
    return "R3" if e in key else "R2"


class DeductionState:
    """Union-find over the ``2n`` letters plus the identity ``e`` (index ``2n``).

    Classes are closed under inversion.  ``log`` lists applied steps as
    ``(rule, refs, (u, v))`` in application order.
    """

    def __init__(self, n: int):
        self.n = n
        self.e = 2 * n
        size = 2 * n + 1
        self.root = list(range(size))
        self.members = [[i] for i in range(size)]
        self.uses: list[list[int]] = [[] for _ in range(size)]
        self.words: list[tuple[int, int, int]] = []
        self.refs: list[WordRef] = []
        self._key: list[tuple[int, int]] = []
        self.table: dict[tuple[int, int], int] = {}
        self.log: list[tuple[str, tuple, tuple[int, int]]] = []
        self._pending: deque = deque()
        for y in range(size):
            for rot in range(3 if y != self.e else 1):
                self._add_word(axiom_word(y, rot, self.e), ("ax", y, rot))

    # -- queries ---------------------------------------------------------
    def find(self, x: int) -> int:
        return self.root[x]

    def same(self, x: int, y: int) -> bool:
        return self.root[x] == self.root[y]

    def inverse(self, x: int) -> int:
        return _inv(x, self.e)

    def is_trivial(self) -> bool:
        return len(self.members[self.root[self.e]]) == 2 * self.n + 1

    def identity_class(self) -> list[int]:
        return sorted(self.members[self.root[self.e]])

    def classes(self) -> list[list[int]]:
        seen = {}
        for x in range(2 * self.n + 1):
            seen.setdefault(self.root[x], []).append(x)
        return sorted(seen.values())

    @property
    def merges(self) -> int:
        return len(self.log)

    # -- building --------------------------------------------------------
    def add_relators(self, relators: Sequence[Sequence[int]], start_index: int = 0) -> None:
        """Add relators and close.  Stops early once every letter is ~ e."""
        for i, rel in enumerate(relators, start=start_index):
            if self.is_trivial():
                break
            for word, rot, inverted in relator_words(rel):
                self._add_word(word, ("rel", i, rot, inverted))
            self._drain()

    def force_identity(self, letters: Iterable[int]) -> None:
        """Impose ``z = e`` for each letter (used for the strong boost variant)."""
        for z in letters:
            self._pending.append((z, self.e, ("Z", ())))
        self._drain()

    def _add_word(self, word, ref) -> None:
        wid = len(self.words)
        self.words.append(word)
        self.refs.append(ref)
        root = self.root
        key = (root[word[0]], root[word[1]])
        self._key.append(key)
        self.uses[key[0]].append(wid)
        if key[1] != key[0]:
            self.uses[key[1]].append(wid)
        self._place(wid, key)

    def _place(self, wid: int, key) -> None:
        other = self.table.get(key)
        if other is None:
            self.table[key] = wid
        elif other != wid:
            c1 = self.words[wid][2]
            c2 = self.words[other][2]
            if self.root[c1] != self.root[c2]:
                self._pending.append((c1, c2, ("W", (self.refs[wid], self.refs[other]))))

    def _drain(self) -> None:
        pending = self._pending
        while pending:
            u, v, why = pending.popleft()
            if self.root[u] == self.root[v]:
                continue
            if why[0] == "Z":
                rule, refs = "Z", ()
            else:
                refs = why[1]
                rule = classify(refs[0], refs[1], self.e)
            self.log.append((rule, refs, (u, v)))
            self._union(u, v)
            self._union(_inv(u, self.e), _inv(v, self.e))

    def _union(self, u: int, v: int) -> None:
        root = self.root
        ru, rv = root[u], root[v]
        if ru == rv:
            return
        if len(self.members[ru]) + len(self.uses[ru]) < len(self.members[rv]) + len(self.uses[rv]):
            ru, rv = rv, ru
        for x in self.members[rv]:
            root[x] = ru
        self.members[ru].extend(self.members[rv])
        self.members[rv] = []
        moved = self.uses[rv]
        self.uses[rv] = []
        table = self.table
        words = self.words
        keys = self._key
        for wid in moved:
            old = keys[wid]
            if table.get(old) == wid:
                del table[old]
            w = words[wid]
            new = (root[w[0]], root[w[1]])
            keys[wid] = new
            self._place(wid, new)
        self.uses[ru].extend(moved)


def cascade_close(P: Presentation, forced: Iterable[int] = ()) -> DeductionState:
    """Least fixpoint of the cascade rules for ``P``.

    ``forced`` letters are identified with ``e`` before closing.
    """
    state = DeductionState(P.n)
    forced = list(forced)
    if forced:
        state.force_identity(forced)
    state.add_relators(P.relators)
    return state


def forced_state(P: Presentation, forced: Iterable[int] = ()) -> DeductionState:
    """A state holding only the ``forced`` identifications (cascade disabled)."""
    state = DeductionState(P.n)
    state.force_identity(forced)
    return state


# -- certificates ---------------------------------------------------------

def _ref_word(P: Presentation, ref, e: int):
    if ref[0] == "ax":
        _, y, rot = ref
        if not (0 <= y <= e and 0 <= rot < 3):
            raise ValueError(f"bad axiom reference {ref!r}")
        return axiom_word(y, rot, e)
    _, idx, rot, inverted = ref
    a, b, c = P.relators[idx]
    w = (c ^ 1, b ^ 1, a ^ 1) if inverted else (a, b, c)
    return (w[rot], w[(rot + 1) % 3], w[(rot + 2) % 3])


def replay_log(P: Presentation, log, forced: Iterable[int] = ()) -> list[list[int]]:
    """Replay a cascade log on ``P``, checking every premise; return the classes.

    Raises ``ValueError`` on the first step whose premise does not hold.  Uses
    a plain dictionary union-find, independent of :class:`DeductionState`.
    """
    n = P.n
    e = 2 * n
    parent = {x: x for x in range(2 * n + 1)}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)

    allowed = set(forced)
    for step, (rule, refs, (u, v)) in enumerate(log):
        if rule == "Z":
            if not ({u, v} == {u, e} and (u in allowed or v in allowed)):
                raise ValueError(f"step {step}: unforced identity {u}, {v}")
        else:
            w1 = _ref_word(P, refs[0], e)
            w2 = _ref_word(P, refs[1], e)
            if find(w1[0]) != find(w2[0]) or find(w1[1]) != find(w2[1]):
                raise ValueError(f"step {step}: signatures do not agree")
            if (u, v) not in ((w1[2], w2[2]), (w2[2], w1[2])):
                raise ValueError(f"step {step}: merged pair is not the pair of third letters")
        union(u, v)
        union(_inv(u, e), _inv(v, e))
    classes = {}
    for x in range(2 * n + 1):
        classes.setdefault(find(x), []).append(x)
    return sorted(classes.values())


def log_to_json(log, e: int) -> list:
    def name(x):
        return "e" if x == e else format_letter(x)

    out = []
    for rule, refs, (u, v) in log:
        out.append([rule, [list(r) for r in refs], [name(u), name(v)]])
    return out


def log_from_json(data, e: int) -> list:
    from trigroup.presentation import parse_letter

    def code(s):
        return e if s == "e" else parse_letter(s)

    out = []
    for rule, refs, (u, v) in data:
        refs = tuple(tuple(bool(x) if isinstance(x, bool) else x for x in r) for r in refs)
        out.append((rule, refs, (code(u), code(v))))
    return out
