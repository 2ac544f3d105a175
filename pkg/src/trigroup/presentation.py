"""Signed generators, length-3 relators and the binomial random presentation.

Letters are small integers: generator ``k`` (1-based) is ``2*(k-1)`` and its
inverse is ``2*(k-1) + 1``, so inversion is ``code ^ 1``.  Lexicographic order
on words is the order on these codes (g1 < G1 < g2 < G2 < ...).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

from trigroup.seeding import slot_uniforms

FORMAT_NAME = "trigroup-presentation"
FORMAT_VERSION = 1

Relator = tuple[int, int, int]


class PresentationError(ValueError):
    pass


class NotCyclicallyReduced(PresentationError):
    """A relator has an inverse pair at a cyclically adjacent position.

    ``position`` is 0 for a = b^-1, 1 for b = c^-1 and 2 for c = a^-1.
    """

    CONDITIONS = ("a != b^-1", "b != c^-1", "c != a^-1")

    def __init__(self, position: int, word=None):
        self.position = position
        self.word = word
        super().__init__(f"not cyclically reduced: {self.CONDITIONS[position]} fails for {word!r}")


class GeneratorOutOfRange(PresentationError):
    def __init__(self, generator: int, n: int):
        self.generator = generator
        self.n = n
        super().__init__(f"generator {generator} outside 1..{n}")


class ParseError(PresentationError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


def letter(generator: int, sign: int = 1) -> int:
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return 2 * (generator - 1) + (0 if sign == 1 else 1)


def inverse(code: int) -> int:
    return code ^ 1


def generator_of(code: int) -> int:
    return code // 2 + 1


def sign_of(code: int) -> int:
    return -1 if code & 1 else 1


def format_letter(code: int) -> str:
    return ("G" if code & 1 else "g") + str(code // 2 + 1)


def parse_letter(token: str) -> int:
    if len(token) < 2 or token[0] not in "gG" or not token[1:].isdigit():
        raise ValueError(f"bad letter token {token!r}")
    k = int(token[1:])
    if k < 1:
        raise ValueError(f"bad generator index in {token!r}")
    return letter(k, 1 if token[0] == "g" else -1)


def format_word(word: Iterable[int]) -> str:
    return " ".join(format_letter(x) for x in word)


def validate_relator(word: Sequence[int], n: int) -> Relator:
    """Return ``word`` as a relator over ``n`` generators or raise.

    The three cyclic-reduction conditions are checked in order a/b, b/c, c/a.
    """
    if len(word) != 3:
        raise PresentationError(f"relators have length 3, got {len(word)}")
    for x in word:
        if x < 0 or x // 2 + 1 > n:
            raise GeneratorOutOfRange(x // 2 + 1 if x >= 0 else x, n)
    a, b, c = (int(x) for x in word)
    if a == b ^ 1:
        raise NotCyclicallyReduced(0, format_word(word))
    if b == c ^ 1:
        raise NotCyclicallyReduced(1, format_word(word))
    if c == a ^ 1:
        raise NotCyclicallyReduced(2, format_word(word))
    return (a, b, c)


def relator_count(n: int, cyclic_slots: bool = False) -> int:
    linear = 2 * n * (4 * n * n - 6 * n + 3)
    if not cyclic_slots:
        return linear
    # words fixed by rotation are exactly x x x; every other class has size 3
    return (linear - 2 * n) // 3 + 2 * n


@lru_cache(maxsize=16)
def relator_array(n: int, cyclic_slots: bool = False) -> np.ndarray:
    """All slots for ``n`` generators as a read-only ``(N, 3)`` array in lex order.

    With ``cyclic_slots`` each rotation class is represented by its
    lexicographically smallest rotation.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    codes = np.arange(2 * n, dtype=np.int32)
    a, b, c = np.meshgrid(codes, codes, codes, indexing="ij")
    words = np.stack([a.ravel(), b.ravel(), c.ravel()], axis=1)
    ok = (words[:, 0] != (words[:, 1] ^ 1)) & (words[:, 1] != (words[:, 2] ^ 1)) & (words[:, 2] != (words[:, 0] ^ 1))
    words = words[ok]
    if cyclic_slots:
        r1 = words[:, [1, 2, 0]]
        r2 = words[:, [2, 0, 1]]
        base = 2 * n
        key = lambda w: (w[:, 0].astype(np.int64) * base + w[:, 1]) * base + w[:, 2]
        k0, k1, k2 = key(words), key(r1), key(r2)
        words = words[(k0 <= k1) & (k0 <= k2)]
    words = np.ascontiguousarray(words)
    words.setflags(write=False)
    return words


def relator_space(n: int, cyclic_slots: bool = False) -> tuple[int, Iterator[Relator]]:
    """Number of valid relators over ``n`` generators and a lex-ordered stream of them."""
    words = relator_array(n, cyclic_slots)
    return len(words), (tuple(int(x) for x in row) for row in words)


@dataclass(frozen=True)
class Presentation:
    """``<g1..gn | relators>`` with set semantics on exact words.

    Relators are stored sorted and deduplicated; ``Presentation(n, rels)``
    validates every relator.
    """

    n: int
    relators: tuple[Relator, ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise PresentationError("n must be >= 1")
        rels = sorted({validate_relator(r, self.n) for r in self.relators})
        object.__setattr__(self, "relators", tuple(rels))

    def __len__(self):
        return len(self.relators)

    def __iter__(self):
        return iter(self.relators)

    def union(self, other: Iterable[Sequence[int]]) -> "Presentation":
        return Presentation(self.n, self.relators + tuple(tuple(r) for r in other))

    def letters(self) -> set[int]:
        return {x for r in self.relators for x in r}

    def to_text(self) -> str:
        lines = [f"n={self.n}", f"# {FORMAT_NAME} v{FORMAT_VERSION}"]
        lines += [format_word(r) for r in self.relators]
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(
            {
                "format": FORMAT_NAME,
                "version": FORMAT_VERSION,
                "n": self.n,
                "relators": [[format_letter(x) for x in r] for r in self.relators],
            },
            sort_keys=True,
        )


@dataclass(frozen=True)
class SampleConfig:
    n: int
    p: float
    seed: int
    cyclic_slots: bool = field(default=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def sample_indices(n: int, p: float, seed: int, cyclic_slots: bool = False) -> np.ndarray:
    """Ranks of the slots present in Gamma(n, p) for ``seed``.

    Slot ``i`` is present iff its uniform ``u_i < p``; the uniforms depend only
    on ``seed`` and ``i``, so the sets for p <= p' are nested.
    """
    count = relator_count(n, cyclic_slots)
    if p <= 0.0:
        return np.zeros(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(count, dtype=np.int64)
    return np.flatnonzero(slot_uniforms(seed, count) < p)


def presentation_from_indices(n: int, indices, cyclic_slots: bool = False) -> Presentation:
    words = relator_array(n, cyclic_slots)[np.asarray(indices, dtype=np.int64)]
    return _trusted(n, [tuple(int(x) for x in row) for row in words])


def sample_presentation(cfg: SampleConfig) -> Presentation:
    return presentation_from_indices(cfg.n, sample_indices(cfg.n, cfg.p, cfg.seed, cfg.cyclic_slots), cfg.cyclic_slots)


def _trusted(n: int, rels: list[Relator]) -> Presentation:
    # rows of relator_array are valid and unique already; skip revalidation
    obj = object.__new__(Presentation)
    object.__setattr__(obj, "n", n)
    object.__setattr__(obj, "relators", tuple(sorted(set(rels))))
    return obj


def parse_presentation(text: str, n: int | None = None) -> Presentation:
    """Parse the line format (``n=<int>`` header, one relator per line).

    Lines starting with ``#`` and blank lines are ignored.  A JSON document
    (first non-space character ``{``) is parsed as the JSON form instead.
    """
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return _parse_json(stripped, n)
    header_n = None
    rels = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if header_n is None and line.startswith("n="):
            try:
                header_n = int(line[2:])
            except ValueError:
                raise ParseError(f"bad header {line!r}", lineno) from None
            if header_n < 1:
                raise ParseError("n must be >= 1", lineno)
            continue
        if header_n is None and n is None:
            raise ParseError("missing 'n=<int>' header", lineno)
        tokens = line.split()
        if len(tokens) != 3:
            raise ParseError(f"expected 3 tokens, got {len(tokens)}", lineno)
        try:
            word = tuple(parse_letter(t) for t in tokens)
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        rels.append((lineno, word))
    size = header_n if header_n is not None else n
    if size is None:
        raise ParseError("missing 'n=<int>' header")
    out = []
    for lineno, word in rels:
        try:
            out.append(validate_relator(word, size))
        except PresentationError as exc:
            exc.args = (f"line {lineno}: {exc.args[0]}",)
            exc.line = lineno
            raise
    return Presentation(size, tuple(out))


def _parse_json(text: str, n: int | None) -> Presentation:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(str(exc), exc.lineno) from None
    size = doc.get("n", n)
    if not isinstance(size, int):
        raise ParseError("JSON presentation needs an integer 'n'")
    try:
        rels = [tuple(parse_letter(t) for t in r) for r in doc.get("relators", [])]
    except (ValueError, TypeError) as exc:
        raise ParseError(str(exc)) from None
    return Presentation(size, tuple(rels))
