"""Monte Carlo estimates of the collapse probability h(n, p) and its threshold.

Each trial ``t`` draws its presentation from the uniforms keyed by
``derive_seed(seed, t)``.  The same uniforms serve every ``p``, so for one
trial the relator sets grow monotonically along a grid of ``c`` values
(``p = c n^{-3/2}``), and sweeps carry certified verdicts along the grid.

``h`` is reported as a bracket: the certified-trivial fraction is a lower
bound and one minus the certified-nontrivial fraction an upper bound.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from typing import Sequence

import numpy as np
from scipy.stats import binomtest

from trigroup.decide import NONTRIVIAL, TRIVIAL, UNDECIDED, Budget, decide
from trigroup.parallel import map_ordered
from trigroup.presentation import presentation_from_indices, relator_count
from trigroup.seeding import derive_seed, rng, slot_uniforms

EXHAUSTIVE_SLOTS = 20


class NoBracket(RuntimeError):
    """The search range does not certify both sides of 1/2."""


def wilson(k: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    if trials == 0:
        return (0.0, 1.0)
    ci = binomtest(k, trials).proportion_ci(level, method="wilson")
    return (float(ci.low), float(ci.high))


def p_of_c(c: float, n: int) -> float:
    return c * n ** -1.5


@dataclass(frozen=True)
class HEstimate:
    """Bracket for ``h(n, p)``.

    Sampled estimates carry outcome counts; exhaustive ones carry exact
    probabilities (``trials`` is then the number of relator subsets).
    """

    n: int
    p: float
    trials: int
    trivial_frac: float
    nontrivial_frac: float
    undecided_frac: float
    counts: tuple[int, int, int] | None = None
    exhaustive: bool = False

    @classmethod
    def from_outcomes(cls, n: int, p: float, outcomes: Sequence[str]) -> "HEstimate":
        t = len(outcomes)
        if t == 0:
            raise ValueError("need at least one trial")
        k = (outcomes.count(TRIVIAL), outcomes.count(NONTRIVIAL), outcomes.count(UNDECIDED))
        return cls(n, p, t, k[0] / t, k[1] / t, k[2] / t, k)

    @property
    def lower(self) -> float:
        return self.trivial_frac

    @property
    def upper(self) -> float:
        return 1.0 - self.nontrivial_frac

    def ci(self, which: str = "trivial") -> tuple[float, float]:
        """95% Wilson interval for ``trivial``, ``nontrivial`` or ``undecided``."""
        idx = ("trivial", "nontrivial", "undecided").index(which)
        frac = (self.trivial_frac, self.nontrivial_frac, self.undecided_frac)[idx]
        if self.exhaustive:
            return (frac, frac)
        return wilson(self.counts[idx], self.trials)

    def to_dict(self) -> dict:
        lo, hi = self.ci("trivial")
        return {
            "n": self.n,
            "p": self.p,
            "trials": self.trials,
            "lower": self.lower,
            "upper": self.upper,
            "undecided": self.undecided_frac,
            "ci_lo": lo,
            "ci_hi": hi,
            "exhaustive": self.exhaustive,
        }


def trial_record(n: int, p: float, seed: int, budget: Budget, trial: int) -> dict:
    """Decide one sampled presentation; a JSONL trial-log row."""
    tseed = derive_seed(seed, trial)
    count = relator_count(n)
    if p <= 0:
        idx = np.zeros(0, dtype=np.int64)
    elif p >= 1:
        idx = np.arange(count)
    else:
        idx = np.flatnonzero(slot_uniforms(tseed, count) < p)
    v = decide(presentation_from_indices(n, idx), budget)
    return {
        "trial": trial,
        "seed": tseed,
        "n": n,
        "p": p,
        "verdict": v.outcome,
        "stage": v.stage,
        "budget_spent": v.budget_spent,
    }


def run_trials(n: int, p: float, trials: int, budget: Budget = Budget(), seed: int = 0, threads: int = 1) -> list[dict]:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    return map_ordered(partial(trial_record, n, p, seed, budget), range(trials), threads)


def exhaustive_h(n: int, p: float, budget: Budget = Budget()) -> HEstimate:
    """Exact bracket by deciding every subset of the relator space."""
    count = relator_count(n)
    if count > EXHAUSTIVE_SLOTS:
        raise ValueError(f"{count} slots is too many for exhaustive mode")
    q = Fraction(p)
    mass = {TRIVIAL: Fraction(0), NONTRIVIAL: Fraction(0), UNDECIDED: Fraction(0)}
    subsets = 0
    for bits in itertools.product((0, 1), repeat=count):
        k = sum(bits)
        weight = q**k * (1 - q) ** (count - k)
        idx = [i for i, b in enumerate(bits) if b]
        mass[decide(presentation_from_indices(n, idx), budget).outcome] += weight
        subsets += 1
    fr = {k: float(v) for k, v in mass.items()}
    return HEstimate(n, p, subsets, fr[TRIVIAL], fr[NONTRIVIAL], fr[UNDECIDED], None, True)


def estimate_h(
    n: int,
    p: float,
    trials: int,
    budget: Budget = Budget(),
    seed: int = 0,
    threads: int = 1,
    exhaustive: bool | None = None,
) -> HEstimate:
    """Bracket ``h(n, p)``; exhaustive by default when the relator space is tiny."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if exhaustive is None:
        exhaustive = relator_count(n) <= EXHAUSTIVE_SLOTS
    if exhaustive:
        return exhaustive_h(n, p, budget)
    rows = run_trials(n, p, trials, budget, seed, threads)
    return HEstimate.from_outcomes(n, p, [r["verdict"] for r in rows])


# -- sweeps ---------------------------------------------------------------

def _sweep_trial(n: int, c_grid: tuple[float, ...], seed: int, budget: Budget, trial: int) -> list[dict]:
    """Decide one coupled trial along the grid.

    The relator set grows with ``c``, so a Trivial verdict holds for every
    larger ``c`` and a Nontrivial one for every smaller ``c`` (the group with
    fewer relators maps onto the other).  Such rows are marked ``inherited``
    with the grid value that carries the certificate; this keeps each trial
    monotone even when a fixed coset budget is not.
    """
    tseed = derive_seed(seed, trial)
    u = slot_uniforms(tseed, relator_count(n))
    rows = []
    trivial_at = None
    for c in c_grid:
        p = p_of_c(c, n)
        row = {"trial": trial, "seed": tseed, "n": n, "c": c, "p": p}
        if trivial_at is not None:
            row |= {"verdict": TRIVIAL, "stage": "inherited", "budget_spent": {}, "inherited_from": trivial_at}
        else:
            v = decide(presentation_from_indices(n, np.flatnonzero(u < p)), budget)
            row |= {"verdict": v.outcome, "stage": v.stage, "budget_spent": v.budget_spent, "inherited_from": None}
            if v.outcome == TRIVIAL:
                trivial_at = c
        rows.append(row)
    nontrivial_at = None
    for row in reversed(rows):
        if row["verdict"] == NONTRIVIAL:
            nontrivial_at = row["c"]
        elif row["verdict"] == UNDECIDED and nontrivial_at is not None:
            row |= {"verdict": NONTRIVIAL, "stage": "inherited", "inherited_from": nontrivial_at}
    return rows


def _interpolate(c: np.ndarray, y: np.ndarray, q: float) -> float:
    y = np.maximum.accumulate(y)
    hit = np.flatnonzero(y >= q)
    if hit.size == 0:
        return math.nan
    j = int(hit[0])
    if j == 0:
        return float(c[0])
    y0, y1 = y[j - 1], y[j]
    return float(c[j - 1] + (q - y0) / (y1 - y0) * (c[j] - c[j - 1]))


@dataclass
class ThresholdCurve:
    """Coupled estimates along a ``c`` grid; ``trivial[t, j]`` is the
    certified-trivial indicator of trial ``t`` at ``c_grid[j]``."""

    n: int
    c_grid: tuple[float, ...]
    estimates: list[HEstimate]
    trivial: np.ndarray
    records: list[dict] = field(default_factory=list, repr=False)

    @property
    def lower(self) -> np.ndarray:
        return self.trivial.mean(axis=0)

    def c_quantile(self, q: float, trivial: np.ndarray | None = None) -> float:
        y = (self.trivial if trivial is None else trivial).mean(axis=0)
        return _interpolate(np.asarray(self.c_grid), y, q)

    @property
    def c_hat(self) -> float:
        return self.c_quantile(0.5)

    @property
    def p_hat(self) -> float:
        return p_of_c(self.c_hat, self.n)

    @property
    def window(self) -> tuple[float, float]:
        """``(p_0.1, p_0.9)``."""
        return (p_of_c(self.c_quantile(0.1), self.n), p_of_c(self.c_quantile(0.9), self.n))

    def relative_width(self, trivial: np.ndarray | None = None) -> float:
        lo = self.c_quantile(0.1, trivial)
        mid = self.c_quantile(0.5, trivial)
        hi = self.c_quantile(0.9, trivial)
        return (hi - lo) / mid

    def relative_width_ci(self, resamples: int = 400, seed: int = 0, level: float = 0.95) -> tuple[float, float]:
        """Percentile bootstrap over trials."""
        gen = rng(seed, 0xB007)
        T = self.trivial.shape[0]
        widths = []
        for _ in range(resamples):
            w = self.relative_width(self.trivial[gen.integers(0, T, T)])
            if math.isfinite(w):
                widths.append(w)
        if not widths:
            return (math.nan, math.nan)
        a = (1 - level) / 2
        return (float(np.quantile(widths, a)), float(np.quantile(widths, 1 - a)))

    def is_monotone(self) -> bool:
        return bool(np.all(np.diff(self.trivial.astype(np.int8), axis=1) >= 0))

    def csv_rows(self) -> list[dict]:
        return [e.to_dict() | {"c": c} for c, e in zip(self.c_grid, self.estimates)]


def sweep(
    n: int,
    c_grid: Sequence[float],
    trials: int,
    budget: Budget = Budget(),
    seed: int = 0,
    threads: int = 1,
) -> ThresholdCurve:
    c_grid = tuple(float(c) for c in c_grid)
    if list(c_grid) != sorted(c_grid):
        raise ValueError("c_grid must be sorted ascending")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    per_trial = map_ordered(partial(_sweep_trial, n, c_grid, seed, budget), range(trials), threads)
    trivial = np.array([[r["verdict"] == TRIVIAL for r in rows] for rows in per_trial], dtype=bool)
    estimates = [
        HEstimate.from_outcomes(n, p_of_c(c, n), [rows[j]["verdict"] for rows in per_trial])
        for j, c in enumerate(c_grid)
    ]
    records = [r for rows in per_trial for r in rows]
    return ThresholdCurve(n, c_grid, estimates, trivial, records)


def parse_grid(spec: str) -> tuple[float, ...]:
    """``lo:hi:step`` (inclusive of ``hi`` up to rounding) or a comma list."""
    if ":" not in spec:
        return tuple(float(x) for x in spec.split(","))
    lo, hi, step = (float(x) for x in spec.split(":"))
    if step <= 0 or hi < lo:
        raise ValueError("grid needs lo <= hi and step > 0")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return tuple(round(lo + i * step, 12) for i in range(count))


# -- bisection ------------------------------------------------------------

@dataclass(frozen=True)
class ThresholdResult:
    n: int
    c_hat: float
    bracket: tuple[float, float]
    fractions: tuple[float, float]
    ci_bracket: tuple[float, float]
    undecided: float
    evaluations: int

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "c_hat": self.c_hat,
            "bracket": list(self.bracket),
            "fractions": list(self.fractions),
            "ci_bracket": list(self.ci_bracket),
            "undecided": self.undecided,
            "evaluations": self.evaluations,
        }


def find_threshold(
    n: int,
    trials: int,
    tol: float,
    seed: int = 0,
    lo: float = 0.005,
    hi: float = 0.2,
    budget: Budget = Budget(),
    threads: int = 1,
    max_steps: int = 60,
) -> ThresholdResult:
    """Bisect on ``c`` for certified-trivial fraction 1/2.

    All evaluations share trial seeds, so the fraction is monotone in ``c``.
    ``ci_bracket`` is the narrowest interval between evaluated points whose
    Wilson intervals lie wholly below and wholly above 1/2.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    seen: dict[float, HEstimate] = {}

    def at(c):
        if c not in seen:
            seen[c] = estimate_h(n, p_of_c(c, n), trials, budget, seed, threads, exhaustive=False)
        return seen[c]

    if not (at(lo).lower < 0.5 < at(hi).lower):
        raise NoBracket(f"fractions {at(lo).lower:.3f} at c={lo} and {at(hi).lower:.3f} at c={hi} do not straddle 1/2")
    steps = 0
    while hi - lo >= tol and steps < max_steps:
        mid = 0.5 * (lo + hi)
        if at(mid).lower < 0.5:
            lo = mid
        else:
            hi = mid
        steps += 1
    f_lo, f_hi = at(lo).lower, at(hi).lower
    c_hat = lo + (0.5 - f_lo) / (f_hi - f_lo) * (hi - lo) if f_hi > f_lo else 0.5 * (lo + hi)
    below = [c for c, e in seen.items() if e.ci()[1] < 0.5]
    above = [c for c, e in seen.items() if e.ci()[0] > 0.5]
    ci_bracket = (max(below) if below else math.nan, min(above) if above else math.nan)
    undecided = 0.5 * (at(lo).undecided_frac + at(hi).undecided_frac)
    return ThresholdResult(n, c_hat, (lo, hi), (f_lo, f_hi), ci_bracket, undecided, len(seen))
