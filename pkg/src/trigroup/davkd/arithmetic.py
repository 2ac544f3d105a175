"""Parameter arithmetic for the isoperimetric union bound.

For ``n >= 16`` the density parameter is ``f(n) = log log n / log^{1/3} n``,
the relator probability ``p = n^{-3/2-f}`` and the local-to-global window
``[K^2/2, 240 K^2]`` with ``K = 200/f``.  The union bound over diagrams up to
the window's top size is

    S(n) = sum_{m <= 240 K^2} (6 a m)^m n^{-f/2},

majorized by ``(b/f^2)^{b/f^2} n^{-f/2}``.  Both are astronomically large or
small, so everything is kept as natural logarithms.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

DEFAULT_A = 30.0


def default_b(a: float = DEFAULT_A) -> float:
    # with B = b/f^2 = 6 a M (M the window top) B^B dominates M (6aM)^M
    return 6.0 * a * 240.0 * 200.0**2


def density_f(n: float) -> float:
    if n < 16:
        raise ValueError("n must be >= 16")
    ln = math.log(n)
    return math.log(ln) / ln ** (1.0 / 3.0)


@dataclass(frozen=True)
class ArithmeticParams:
    n: float
    f: float
    density: float
    p: float
    K: float
    window_lo: float
    window_hi: float
    a: float
    b: float
    terms: int
    log_tail_sum: float
    log_majorant: float

    @property
    def majorant_holds(self) -> bool:
        return self.log_majorant >= self.log_tail_sum

    def to_dict(self) -> dict:
        return asdict(self)


def _log_series(a: float, M: int, chunk: int = 1 << 20) -> float:
    """``log sum_{m=1}^{M} (6 a m)^m``."""
    best = -math.inf
    acc = 0.0  # sum of exp(t - best)
    for lo in range(1, M + 1, chunk):
        m = np.arange(lo, min(M, lo + chunk - 1) + 1, dtype=np.float64)
        t = m * np.log(6.0 * a * m)
        top = float(t.max())
        if top > best:
            acc = acc * math.exp(best - top) if acc else 0.0
            best = top
        acc += float(np.exp(t - best).sum())
    return best + math.log(acc)


def threshold_arithmetic(n: float, a: float = DEFAULT_A, b: float | None = None) -> ArithmeticParams:
    """Evaluate ``f``, ``p``, ``K``, the window and the log tail sum at ``n``."""
    if a <= 0:
        raise ValueError("a must be positive")
    f = density_f(n)
    b = default_b(a) if b is None else b
    if b <= 0:
        raise ValueError("b must be positive")
    ln = math.log(n)
    K = 200.0 / f
    hi = 240.0 * K * K
    M = int(math.floor(hi))
    log_sum = _log_series(a, M) - 0.5 * f * ln
    B = b / (f * f)
    return ArithmeticParams(
        n=n,
        f=f,
        density=0.5 - f / 3.0,
        p=math.exp((-1.5 - f) * ln),
        K=K,
        window_lo=K * K / 2.0,
        window_hi=hi,
        a=a,
        b=b,
        terms=M,
        log_tail_sum=log_sum,
        log_majorant=B * math.log(B) - 0.5 * f * ln,
    )
