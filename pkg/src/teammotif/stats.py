"""Nonparametric statistics: Mann-Whitney U-test, issue-comment run lengths,
and event-type proportion tables.

The U-test uses the full permutation distribution for small tie-free samples
(combined size <= 10) and the tie-corrected normal approximation with
continuity correction otherwise.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from statistics import mean, median
from typing import Iterable, Sequence

from .events import Event, EventType


class EmptySampleError(ValueError):
    """A U-test sample (or run-length group) is empty."""


class EmptyCorpusError(ValueError):
    """Proportions requested for an empty event list."""


#: Combined sample size at or below which the exact distribution is used (tie-free data only).
EXACT_LIMIT = 10

_MIN_P = 1e-300


class UTestMethod(Enum):
    EXACT = "exact"
    NORMAL_APPROX = "normal_approx"


@dataclass(frozen=True)
class UTestResult:
    u_statistic: float
    p_two_sided: float
    n1: int
    n2: int
    method: UTestMethod

    def to_dict(self) -> dict:
        return {
            "u_statistic": self.u_statistic,
            "p_two_sided": self.p_two_sided,
            "n1": self.n1,
            "n2": self.n2,
            "method": self.method.value,
        }


@dataclass(frozen=True)
class RunLengthComparison:
    """U-test over two groups of per-team mean run lengths, plus the direction
    of the difference (which group has the larger median)."""

    test: UTestResult
    direction: str  # "a_higher" | "b_higher" | "tie"
    median_a: float
    median_b: float

    def to_dict(self) -> dict:
        return {
            "test": self.test.to_dict(),
            "direction": self.direction,
            "median_a": self.median_a,
            "median_b": self.median_b,
        }


def _midranks(pooled: Sequence[float]) -> tuple[list[float], list[int]]:
    """1-based ranks with ties assigned their average rank, plus tie-group sizes."""
    n = len(pooled)
    order = sorted(range(n), key=lambda i: pooled[i])
    ranks = [0.0] * n
    tie_sizes: list[int] = []
    i = 0
    while i < n:
        j = i
        while j + 1 < n and pooled[order[j + 1]] == pooled[order[i]]:
            j += 1
        avg = (i + j + 2) / 2.0
        for t in range(i, j + 1):
            ranks[order[t]] = avg
        tie_sizes.append(j - i + 1)
        i = j + 1
    return ranks, tie_sizes


def _exact_two_sided_p(u1: float, n1: int, n2: int) -> float:
    """Two-sided p from the full permutation distribution of U (tie-free ranks)."""
    n = n1 + n2
    mu = n1 * n2 / 2.0
    observed_dev = abs(u1 - mu)
    offset = n1 * (n1 + 1) / 2.0
    total = 0
    hits = 0
    for combo in combinations(range(1, n + 1), n1):
        u = sum(combo) - offset
        total += 1
        if abs(u - mu) >= observed_dev - 1e-12:
            hits += 1
    return hits / total


def _normal_two_sided_p(u1: float, n1: int, n2: int, tie_sizes: Sequence[int]) -> float:
    """Tie-corrected normal approximation with continuity correction."""
    n = n1 + n2
    mu = n1 * n2 / 2.0
    tie_term = sum(t ** 3 - t for t in tie_sizes)
    sigma_sq = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if sigma_sq <= 0:
        return 1.0
    z = max(abs(u1 - mu) - 0.5, 0.0) / math.sqrt(sigma_sq)
    return math.erfc(z / math.sqrt(2.0))


def mann_whitney_u(a: Sequence[float], b: Sequence[float], method: str = "auto") -> UTestResult:
    """Two-sided Mann-Whitney U-test.

    Reports the U statistic of the first sample (rank-sum form with midranks),
    so ``mann_whitney_u(a, b).u_statistic + mann_whitney_u(b, a).u_statistic
    == n1 * n2``.  ``method`` is "auto", "exact", or "normal"; "exact"
    requires tie-free data.
    """
    n1, n2 = len(a), len(b)
    if n1 == 0 or n2 == 0:
        raise EmptySampleError("both samples must be nonempty")
    ranks, tie_sizes = _midranks(list(a) + list(b))
    u1 = sum(ranks[:n1]) - n1 * (n1 + 1) / 2.0
    has_ties = any(t > 1 for t in tie_sizes)

    if method == "exact":
        if has_ties:
            raise ValueError("exact method requires tie-free samples")
        use_exact = True
    elif method == "normal":
        use_exact = False
    elif method == "auto":
        use_exact = (n1 + n2) <= EXACT_LIMIT and not has_ties
    else:
        raise ValueError(f"unknown method {method!r}")

    if use_exact:
        p = _exact_two_sided_p(u1, n1, n2)
        used = UTestMethod.EXACT
    else:
        p = _normal_two_sided_p(u1, n1, n2, tie_sizes)
        used = UTestMethod.NORMAL_APPROX
    p = min(max(p, _MIN_P), 1.0)
    return UTestResult(u_statistic=u1, p_two_sided=p, n1=n1, n2=n2, method=used)


def run_length_means(pre_reduction: Sequence[EventType]) -> float | None:
    """Mean length of maximal runs of consecutive issue-comment events.

    Returns None when the sequence contains no issue comments (no-comments
    marker); such teams are excluded from group-level lists.
    """
    runs: list[int] = []
    current = 0
    for event_type in pre_reduction:
        if event_type is EventType.ISSUE_COMMENT:
            current += 1
        elif current:
            runs.append(current)
            current = 0
    if current:
        runs.append(current)
    if not runs:
        return None
    return mean(runs)


def _group_run_lengths(group: Iterable[Sequence[EventType]], pooled: bool) -> list[float]:
    values: list[float] = []
    for seq in group:
        if pooled:
            current = 0
            for event_type in seq:
                if event_type is EventType.ISSUE_COMMENT:
                    current += 1
                elif current:
                    values.append(float(current))
                    current = 0
            if current:
                values.append(float(current))
        else:
            m = run_length_means(seq)
            if m is not None:
                values.append(m)
    return values


def compare_run_lengths(
    group_a: Iterable[Sequence[EventType]],
    group_b: Iterable[Sequence[EventType]],
    pooled: bool = False,
) -> RunLengthComparison:
    """U-test on per-team mean issue-comment run lengths of two groups.

    With ``pooled=True`` every maximal run is a sample point instead of one
    mean per team.  Teams without issue comments are excluded either way.
    """
    values_a = _group_run_lengths(group_a, pooled)
    values_b = _group_run_lengths(group_b, pooled)
    if not values_a or not values_b:
        raise EmptySampleError("each group needs at least one team with issue comments")
    result = mann_whitney_u(values_a, values_b)
    median_a = float(median(values_a))
    median_b = float(median(values_b))
    if median_a > median_b:
        direction = "a_higher"
    elif median_b > median_a:
        direction = "b_higher"
    else:
        direction = "tie"
    return RunLengthComparison(test=result, direction=direction, median_a=median_a, median_b=median_b)


def proportions(events: Iterable[Event | EventType]) -> list[tuple[EventType, float]]:
    """Percentage of each event type, sorted descending; sums to 100 up to rounding."""
    counts: Counter[EventType] = Counter()
    for item in events:
        counts[item if isinstance(item, EventType) else item.event_type] += 1
    total = sum(counts.values())
    if total == 0:
        raise EmptyCorpusError("no events to tabulate")
    rows = [(event_type, 100.0 * count / total) for event_type, count in counts.items()]
    rows.sort(key=lambda row: (-row[1], row[0].value))
    return rows
