"""Three-valued triviality decisions with checkable certificates.

Stages run cheapest first: cascade, abelianization, coset enumeration.  The
first conclusive stage wins; an exhausted budget gives ``Undecided`` and never
a guess.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

from trigroup.abelian import abelianization, check_nontrivial_certificate
from trigroup.cascade import (
    DeductionState,
    cascade_close,
    forced_state,
    log_from_json,
    log_to_json,
    replay_log,
)
from trigroup.cosets import CosetResult, enumerate_words
from trigroup.presentation import Presentation, format_letter

TRIVIAL = "Trivial"
NONTRIVIAL = "Nontrivial"
UNDECIDED = "Undecided"


@dataclass(frozen=True)
class Budget:
    """Which stages run and how large a coset table may grow (0 disables enumeration)."""

    cascade: bool = True
    abelianization: bool = True
    max_cosets: int = 1000
    simplify: bool = True

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class Verdict:
    outcome: str
    stage: str | None = None
    certificate: dict | None = None
    budget_spent: dict = field(default_factory=dict)

    @property
    def trivial(self) -> bool:
        return self.outcome == TRIVIAL

    @property
    def nontrivial(self) -> bool:
        return self.outcome == NONTRIVIAL

    def to_dict(self) -> dict:
        return {
            "outcome": self.outcome,
            "stage": self.stage,
            "certificate": self.certificate,
            "budget_spent": self.budget_spent,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def simplified_words(state: DeductionState, words: Iterable[Sequence[int]]) -> tuple[int, list[list[int]]]:
    """Rewrite ``words`` through the classes of ``state`` (a Tietze transformation).

    One new generator per pair of mutually inverse non-identity classes; a
    self-inverse class yields an involution relator.  When every class of
    ``state`` is implied by ``words``, the result presents an isomorphic
    group.  Returns ``(ngens, relator words)``.
    """
    e = state.e
    image: dict[int, int | None] = {}
    rels: list[list[int]] = []
    ngens = 0
    for cls in state.classes():
        if state.same(cls[0], e):
            for x in cls:
                image[x] = None
            continue
        rep = cls[0]
        if rep in image:
            continue
        inv_cls = [state.inverse(x) for x in cls]
        t = 2 * ngens
        ngens += 1
        for x in cls:
            image[x] = t
        if state.same(rep, state.inverse(rep)):
            rels.append([t, t])
        else:
            for x in inv_cls:
                image[x] = t ^ 1
    seen = set()
    for word in words:
        out: list[int] = []
        for x in word:
            y = image[x]
            if y is None:
                continue
            if out and out[-1] == y ^ 1:
                out.pop()
            else:
                out.append(y)
        while len(out) >= 2 and out[0] == out[-1] ^ 1:
            out = out[1:-1]
        if out:
            key = tuple(out)
            if key not in seen:
                seen.add(key)
                rels.append(out)
    return ngens, rels


def _state(P: Presentation, forced, cascade: bool) -> DeductionState:
    return cascade_close(P, forced) if cascade else forced_state(P, forced)


def decide(P: Presentation, budget: Budget = Budget(), forced: Iterable[int] = ()) -> Verdict:
    """Decide whether ``<S | R>`` (with ``forced`` letters set to e) is trivial."""
    forced = sorted(set(forced))
    spent: dict = {}
    state = _state(P, forced, budget.cascade)
    spent["cascade_merges"] = state.merges
    if budget.cascade and state.is_trivial():
        return Verdict(TRIVIAL, "cascade", _cascade_cert(state, forced), spent)
    extra = [[z] for z in forced]
    if budget.abelianization:
        ab = abelianization(P, extra)
        spent["abelianization"] = True
        if ab.nontrivial:
            return Verdict(NONTRIVIAL, "abelianization", {"type": "ElementaryDivisors", "divisors": list(ab.divisors)}, spent)
    if budget.max_cosets > 0:
        res = _enumerate(P, state, forced, budget)
        spent["cosets_defined"] = res.cosets_defined
        if res.finite:
            cert = {"type": "CosetTableSummary", "simplified": budget.simplify, "cascade": budget.cascade, **res.summary()}
            return Verdict(TRIVIAL if res.order == 1 else NONTRIVIAL, "cosets", cert, spent)
    return Verdict(UNDECIDED, None, None, spent)


def _enumerate(P: Presentation, state: DeductionState, forced, budget: Budget) -> CosetResult:
    words = [list(r) for r in P.relators] + [[z] for z in forced]
    if budget.simplify:
        ngens, words = simplified_words(state, words)
        if ngens == 0:
            return CosetResult(1, 1, 0, budget.max_cosets)
        return enumerate_words(ngens, words, budget.max_cosets)
    return enumerate_words(P.n, words, budget.max_cosets)


def _cascade_cert(state: DeductionState, forced) -> dict:
    return {
        "type": "CascadeLog",
        "forced": [format_letter(z) for z in forced],
        "log": log_to_json(state.log, state.e),
    }


def verify_verdict(P: Presentation, verdict: Verdict, forced: Iterable[int] = ()) -> bool:
    """Check a verdict's certificate by independent replay.

    Cascade logs are replayed rule by rule; elementary divisors are confirmed
    by a rank computation over Q or GF(q); coset summaries by rerunning the
    deterministic enumeration.  ``Undecided`` verdicts carry nothing to check.
    """
    forced = sorted(set(forced))
    cert = verdict.certificate
    if verdict.outcome == UNDECIDED:
        return cert is None
    if cert is None:
        return False
    kind = cert.get("type")
    if kind == "CascadeLog":
        log = log_from_json(cert["log"], 2 * P.n)
        try:
            classes = replay_log(P, log, forced)
        except ValueError:
            return False
        return verdict.outcome == TRIVIAL and len(classes) == 1
    if kind == "ElementaryDivisors":
        return verdict.outcome == NONTRIVIAL and check_nontrivial_certificate(
            P, cert["divisors"], [[z] for z in forced]
        )
    if kind == "CosetTableSummary":
        budget = Budget(max_cosets=cert["max_cosets"], simplify=cert["simplified"])
        state = _state(P, forced, cert.get("cascade", True))
        res = _enumerate(P, state, forced, budget)
        expected = TRIVIAL if res.order == 1 else NONTRIVIAL
        return res.finite and res.summary() == {k: cert[k] for k in res.summary()} and verdict.outcome == expected
    return False


@dataclass
class StageReport:
    """Every stage run independently (for soundness audits)."""

    cascade_trivial: bool
    divisors: tuple[int, ...]
    coset_order: int | None

    def contradictions(self) -> list[str]:
        out = []
        ab_nontrivial = any(d != 1 for d in self.divisors)
        if self.cascade_trivial and ab_nontrivial:
            out.append("cascade Trivial vs abelianization Nontrivial")
        if self.cascade_trivial and self.coset_order not in (None, 1):
            out.append(f"cascade Trivial vs coset order {self.coset_order}")
        if self.coset_order == 1 and ab_nontrivial:
            out.append("coset order 1 vs abelianization Nontrivial")
        if self.coset_order is not None and 0 in self.divisors:
            out.append("finite coset order vs infinite abelianization")
        if self.coset_order is not None and 0 not in self.divisors:
            torsion = 1
            for d in self.divisors:
                torsion *= d
            if self.coset_order % torsion:
                out.append(f"torsion {torsion} does not divide order {self.coset_order}")
        return out


def run_all_stages(P: Presentation, max_cosets: int) -> StageReport:
    """Run every stage in isolation; coset enumeration sees the raw, unsimplified words."""
    state = cascade_close(P)
    ab = abelianization(P)
    res = enumerate_words(P.n, P.relators, max_cosets)
    return StageReport(state.is_trivial(), ab.divisors, res.order)
