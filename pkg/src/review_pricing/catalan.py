#!/usr/bin/env python3
"""
Catalan Module for Review Pricing

Exact counts of like/dislike strings whose every prefix keeps a*likes - b*dislikes
at or above -m (Catalan's quadrilateral), with the trapezoid closed form and a
brute-force enumerator used as cross-checks.
"""

import itertools
import math
from dataclasses import dataclass
from typing import Tuple

import pandas as pd

from review_pricing.model import ReviewCount


DEFAULT_T_MAX_CAP = 10_000
BARRIER_EPSILON = 1e-12


def _is_integral(value: float) -> bool:
    return float(value).is_integer()


@dataclass(frozen=True)
class CatalanTable:
    """
    Catalan quadrilateral counts C_m^{a,b}(likes, dislikes) for likes + dislikes <= t_max.

    Counts are stored as a triangular array of diagonals: diagonals[t][d] is the count
    for dislikes = d and likes = t - d.

    Attributes:
        a: Barrier slope per like
        b: Barrier slope per dislike
        m: Barrier offset
        t_max: Largest likes + dislikes in the table
        diagonals: Exact counts, one tuple per diagonal
    """
    a: float
    b: float
    m: float
    t_max: int
    diagonals: Tuple[Tuple[int, ...], ...]

    def count(self, likes: int, dislikes: int) -> int:
        """Count for one cell; cells outside the table raise ValueError."""
        t = likes + dislikes
        if likes < 0 or dislikes < 0 or t > self.t_max:
            raise ValueError(f"Cell ({likes}, {dislikes}) is outside the table (t_max={self.t_max})")
        return self.diagonals[t][dislikes]

    def diagonal(self, t: int) -> Tuple[int, ...]:
        """Counts on likes + dislikes = t, indexed by dislikes."""
        return self.diagonals[t]

    def to_frame(self) -> pd.DataFrame:
        """Long-format table with columns likes, dislikes, count."""
        rows = [
            {'likes': t - d, 'dislikes': d, 'count': value}
            for t, diagonal in enumerate(self.diagonals)
            for d, value in enumerate(diagonal)
        ]
        return pd.DataFrame(rows, columns=['likes', 'dislikes', 'count'])


def _barrier(a: float, b: float, m: float, eps: float):
    """Return a predicate telling whether a cell lies strictly below the barrier."""
    if _is_integral(a) and _is_integral(b) and _is_integral(m):
        ia, ib, im = int(a), int(b), int(m)
        return lambda likes, dislikes: ia * likes - ib * dislikes < -im

    def blocked(likes: int, dislikes: int) -> bool:
        scale = 1.0 + a * likes + b * dislikes + m
        return a * likes - b * dislikes < -m - eps * scale
    return blocked


def build_table(a: float, b: float, m: float, t_max: int,
                cap: int = DEFAULT_T_MAX_CAP, eps: float = BARRIER_EPSILON) -> CatalanTable:
    """
    Fill the Catalan quadrilateral by the recurrence C(l, d) = C(l-1, d) + C(l, d-1).

    Integral slopes and offset are compared exactly; real-valued ones use a relative
    tolerance so that cells lying on the barrier up to rounding are kept.

    Args:
        a: Barrier slope per like (> 0)
        b: Barrier slope per dislike (> 0)
        m: Barrier offset (>= 0)
        t_max: Largest likes + dislikes to fill
        cap: Largest accepted t_max
        eps: Relative tolerance for real-valued barriers

    Returns:
        CatalanTable with exact integer counts
    """
    if a <= 0 or b <= 0:
        raise ValueError(f"Barrier slopes must be positive (got a={a}, b={b})")
    if m < 0:
        raise ValueError(f"Barrier offset must be nonnegative, got {m}")
    if t_max < 0:
        raise ValueError(f"t_max must be nonnegative, got {t_max}")
    if t_max > cap:
        raise ValueError(f"t_max={t_max} exceeds the configured cap of {cap}")

    blocked = _barrier(a, b, m, eps)
    diagonals = [(1,)]
    for t in range(1, t_max + 1):
        previous = diagonals[-1]
        current = []
        for d in range(t + 1):
            likes = t - d
            if blocked(likes, d):
                current.append(0)
                continue
            from_like = previous[d] if likes >= 1 else 0
            from_dislike = previous[d - 1] if d >= 1 else 0
            current.append(from_like + from_dislike)
        diagonals.append(tuple(current))

    return CatalanTable(a=a, b=b, m=m, t_max=t_max, diagonals=tuple(diagonals))


def trapezoid_closed_form(m: int, r: ReviewCount) -> int:
    """
    Catalan trapezoid C_m(l, d) for unit slopes.

    Counts strings where every prefix has at least -m net likes. This is the
    trapezoid of the combinatorics literature shifted by one: C_m here equals C'_{m+1}
    there.

    Args:
        m: Integer barrier offset (>= 0)
        r: Review counts (l, d)

    Returns:
        binom(l+d, d) if d <= m; binom(l+d, d) - binom(l+d, d-m-1) if m < d <= l+m; else 0
    """
    if m < 0:
        raise ValueError(f"Barrier offset must be nonnegative, got {m}")
    n = r.likes + r.dislikes
    d = r.dislikes
    if d <= m:
        return math.comb(n, d)
    if d <= r.likes + m:
        return math.comb(n, d) - math.comb(n, d - m - 1)
    return 0


def catalan_number(n: int) -> int:
    """The n-th Catalan number binom(2n, n) / (n + 1)."""
    return math.comb(2 * n, n) // (n + 1)


def brute_force_count(a: float, b: float, m: float, r: ReviewCount) -> int:
    """
    Count admissible strings by enumerating every placement of the dislikes.

    Only meant for small cells; used to check build_table.
    """
    n = r.likes + r.dislikes
    total = 0
    for positions in itertools.combinations(range(n), r.dislikes):
        dislike_at = set(positions)
        likes = dislikes = 0
        admissible = True
        for step in range(n):
            if step in dislike_at:
                dislikes += 1
            else:
                likes += 1
            if a * likes - b * dislikes < -m:
                admissible = False
                break
        if admissible:
            total += 1
    return total
