"""Down-sample the majority team group by nearest-neighbor matching on event
frequency vectors, and tabulate group medians before/after."""
from __future__ import annotations

from dataclasses import dataclass
from math import sqrt
from typing import Sequence

import numpy as np

from .events import EventType
from .teams import FREQUENCY_TYPES


class MajorityExhaustedError(ValueError):
    """Fewer majority teams than minority teams to match."""


@dataclass(frozen=True)
class MatchedPair:
    minority_repo_id: int
    majority_repo_id: int
    distance: float


@dataclass(frozen=True)
class MedianTable:
    event_types: tuple[EventType, ...]
    minority: tuple[float, ...]
    majority_before: tuple[float, ...]
    majority_after: tuple[float, ...]

    def rows(self) -> list[tuple[str, float, float, float]]:
        return [
            (event_type.value, self.minority[i], self.majority_before[i], self.majority_after[i])
            for i, event_type in enumerate(self.event_types)
        ]


def match_teams(
    minority: Sequence[tuple[int, np.ndarray]],
    majority: Sequence[tuple[int, np.ndarray]],
) -> list[MatchedPair]:
    """Greedy nearest-neighbor matching without replacement.

    Minority teams are processed in descending total-event order (large teams
    have the fewest good matches); each takes its Euclidean-nearest unused
    majority team, ties broken by smaller repo id.  Deterministic.  Returns
    one pair per minority team, sorted by minority repo id.
    """
    if not minority:
        raise ValueError("minority group is empty")
    if len(majority) < len(minority):
        raise MajorityExhaustedError(
            f"{len(majority)} majority teams cannot cover {len(minority)} minority teams"
        )
    majority_ids = np.array([repo_id for repo_id, _ in majority], dtype=np.int64)
    majority_matrix = np.stack([np.asarray(vec, dtype=np.float64) for _, vec in majority])
    order = sorted(
        range(len(minority)),
        key=lambda i: (-float(np.sum(minority[i][1])), minority[i][0]),
    )
    used = np.zeros(len(majority), dtype=bool)
    pairs: list[MatchedPair] = []
    for i in order:
        repo_id, vector = minority[i]
        deltas = majority_matrix - np.asarray(vector, dtype=np.float64)
        squared = np.einsum("ij,ij->i", deltas, deltas)
        squared[used] = np.inf
        best = squared.min()
        candidates = np.nonzero(squared == best)[0]
        pick = candidates[np.argmin(majority_ids[candidates])]
        used[pick] = True
        pairs.append(
            MatchedPair(
                minority_repo_id=repo_id,
                majority_repo_id=int(majority_ids[pick]),
                distance=sqrt(float(best)),
            )
        )
    pairs.sort(key=lambda pair: pair.minority_repo_id)
    return pairs


def median_table(
    minority: Sequence[np.ndarray],
    majority_all: Sequence[np.ndarray],
    majority_matched: Sequence[np.ndarray],
    event_types: Sequence[EventType] = FREQUENCY_TYPES,
) -> MedianTable:
    """Component-wise medians of the three groups (even counts average the
    middle two)."""
    if not minority or not majority_all or not majority_matched:
        raise ValueError("median_table requires nonempty groups")

    def medians(vectors: Sequence[np.ndarray]) -> tuple[float, ...]:
        return tuple(float(x) for x in np.median(np.stack(vectors).astype(np.float64), axis=0))

    return MedianTable(
        event_types=tuple(event_types),
        minority=medians(minority),
        majority_before=medians(majority_all),
        majority_after=medians(majority_matched),
    )
