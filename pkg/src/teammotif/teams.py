"""Team rosters and per-repository event sequences.

A repository becomes a team when at least two human accounts contributed a
push or pull request; bot and non-member events are dropped from its
timeline.  Sequences are reduced to a six-symbol alphabet and short ones are
filtered out.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from .botdetect.features import Label
from .events import CONTRIBUTION_TYPES, Event, EventType


class TeamKind(Enum):
    HUMAN_ONLY = "human_only"
    HUMAN_BOT = "human_bot"


class ReducedSymbol(Enum):
    """Six-symbol sequence alphabet; values are the compact CSV codes."""

    PU = "P"  # push
    PR = "R"  # pull request
    IS = "I"  # issues + issue comment, merged
    RC = "V"  # pull request review comment
    CR = "C"  # create
    DE = "D"  # delete


#: Definition-order index; also the lexicographic order used for tie-breaks.
SYMBOL_INDEX = {symbol: i for i, symbol in enumerate(ReducedSymbol)}

_CODE_TO_SYMBOL = {symbol.value: symbol for symbol in ReducedSymbol}

REDUCTION_MAP = {
    EventType.PUSH: ReducedSymbol.PU,
    EventType.PULL_REQUEST: ReducedSymbol.PR,
    EventType.ISSUES: ReducedSymbol.IS,
    EventType.ISSUE_COMMENT: ReducedSymbol.IS,
    EventType.PULL_REQUEST_REVIEW_COMMENT: ReducedSymbol.RC,
    EventType.CREATE: ReducedSymbol.CR,
    EventType.DELETE: ReducedSymbol.DE,
}

#: Event types counted by frequency vectors (issues and issue comments separate).
FREQUENCY_TYPES = (
    EventType.PUSH,
    EventType.PULL_REQUEST,
    EventType.ISSUES,
    EventType.ISSUE_COMMENT,
    EventType.CREATE,
    EventType.DELETE,
)


@dataclass
class Team:
    repo_id: int
    members: frozenset[int]
    kind: TeamKind
    events: list[Event]  # time-ordered, bots and non-members removed


@dataclass
class TeamSequence:
    repo_id: int
    kind: TeamKind
    symbols: list[ReducedSymbol]
    pre_reduction: list[EventType] = field(default_factory=list)


def _bot_login_set(bot_labels: Mapping[str, Label] | Iterable[str]) -> set[str]:
    if isinstance(bot_labels, Mapping):
        return {login for login, label in bot_labels.items() if label is Label.BOT}
    return set(bot_labels)


def build_teams(events: Iterable[Event], bot_labels: Mapping[str, Label] | Iterable[str]) -> list[Team]:
    """Group events by repository and form teams.

    ``bot_labels`` is either a login -> Label mapping or a plain set of bot
    logins; unlisted accounts count as human.  A team is human-bot when any
    bot performed any event on the repo, regardless of the bot's own
    membership.  Output is ordered by repo id.
    """
    bots = _bot_login_set(bot_labels)
    by_repo: dict[int, list[Event]] = {}
    for event in events:
        by_repo.setdefault(event.repo_id, []).append(event)

    teams: list[Team] = []
    for repo_id in sorted(by_repo):
        timeline = sorted(by_repo[repo_id], key=lambda e: e.created_at)  # stable: ties keep input order
        has_bot = any(e.actor_login in bots for e in timeline)
        human_events = [e for e in timeline if e.actor_login not in bots]
        members = {
            e.actor_id for e in human_events if e.event_type in CONTRIBUTION_TYPES
        }
        if len(members) < 2:
            continue
        teams.append(
            Team(
                repo_id=repo_id,
                members=frozenset(members),
                kind=TeamKind.HUMAN_BOT if has_bot else TeamKind.HUMAN_ONLY,
                events=[e for e in human_events if e.actor_id in members],
            )
        )
    return teams


def reduce_alphabet(raw: Sequence[EventType]) -> list[ReducedSymbol]:
    """Map raw event types onto the six-symbol alphabet, dropping the rest;
    order is preserved."""
    return [REDUCTION_MAP[t] for t in raw if t in REDUCTION_MAP]


def team_sequence(team: Team) -> TeamSequence:
    pre = [event.event_type for event in team.events]
    return TeamSequence(
        repo_id=team.repo_id,
        kind=team.kind,
        symbols=reduce_alphabet(pre),
        pre_reduction=pre,
    )


def filter_short(sequences: Iterable[TeamSequence], min_len: int = 5) -> list[TeamSequence]:
    """Keep sequences with at least ``min_len`` reduced symbols (inclusive)."""
    if min_len < 1:
        raise ValueError("min_len must be at least 1")
    return [seq for seq in sequences if len(seq.symbols) >= min_len]


def build_sequences(teams: Iterable[Team], min_len: int = 5) -> list[TeamSequence]:
    return filter_short((team_sequence(team) for team in teams), min_len=min_len)


def frequency_vector(seq: TeamSequence, include_review_comments: bool = False) -> np.ndarray:
    """Counts of the six tabulated event types in the pre-reduction sequence
    (optionally a seventh component for review comments)."""
    counts = {event_type: 0 for event_type in FREQUENCY_TYPES}
    review = 0
    for event_type in seq.pre_reduction:
        if event_type in counts:
            counts[event_type] += 1
        elif event_type is EventType.PULL_REQUEST_REVIEW_COMMENT:
            review += 1
    vector = [counts[event_type] for event_type in FREQUENCY_TYPES]
    if include_review_comments:
        vector.append(review)
    return np.array(vector, dtype=np.int64)


def symbols_to_string(symbols: Iterable[ReducedSymbol]) -> str:
    return "".join(symbol.value for symbol in symbols)


def string_to_symbols(text: str) -> list[ReducedSymbol]:
    try:
        return [_CODE_TO_SYMBOL[ch] for ch in text]
    except KeyError as exc:
        raise ValueError(f"unknown symbol code {exc.args[0]!r} in {text!r}") from None


def split_by_kind(sequences: Iterable[TeamSequence]) -> dict[TeamKind, list[TeamSequence]]:
    out: dict[TeamKind, list[TeamSequence]] = {TeamKind.HUMAN_BOT: [], TeamKind.HUMAN_ONLY: []}
    for seq in sequences:
        out[seq.kind].append(seq)
    return out
