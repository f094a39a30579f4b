"""Account features for bot classification.

Four features per account: mean pairwise cosine similarity of its comments,
whether it has ever belonged to an organization, how many distinct event
types it generated, and where the string "bot" sits in its login.
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from math import sqrt
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..events import Event

#: Cap on comments per account for the O(n^2) pairwise similarity (most recent kept).
DEFAULT_COMMENT_CAP = 200

_TOKEN_RE = re.compile(r"[a-z0-9]+")


class BotPlacement(Enum):
    BEGINNING = "beginning"
    MIDDLE = "middle"
    END = "end"
    ABSENT = "absent"


class Label(Enum):
    BOT = "Bot"
    HUMAN = "Human"


class EmptyHistoryError(ValueError):
    """Feature extraction requested for an account with no events."""


@dataclass(frozen=True)
class AccountFeatures:
    comment_similarity: float  # -1 exactly when the account has fewer than 2 comments
    organization_owned: bool
    unique_event_types: int
    bot_placement: BotPlacement


@dataclass(frozen=True)
class LabeledAccount:
    login: str
    features: AccountFeatures
    label: Label


#: Column layout used when features are fed to a classifier (placement one-hot).
FEATURE_COLUMNS = (
    "comment_similarity",
    "organization_owned",
    "unique_event_types",
    "placement_beginning",
    "placement_middle",
    "placement_end",
    "placement_absent",
)

_PLACEMENT_ORDER = (
    BotPlacement.BEGINNING,
    BotPlacement.MIDDLE,
    BotPlacement.END,
    BotPlacement.ABSENT,
)


def candidate_accounts(logins: Iterable[str]) -> set[str]:
    """Logins whose lowercase form contains the substring "bot"."""
    return {login for login in logins if "bot" in login.lower()}


def bot_name_placement(login: str) -> BotPlacement:
    low = login.lower()
    if "bot" not in low:
        return BotPlacement.ABSENT
    if low.startswith("bot"):
        return BotPlacement.BEGINNING
    if low.endswith("bot"):
        return BotPlacement.END
    return BotPlacement.MIDDLE


def _tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def comment_similarity(comments: Sequence[str], cap: int | None = DEFAULT_COMMENT_CAP) -> float:
    """Mean cosine similarity over all unordered pairs of term-frequency vectors.

    Returns -1.0 when fewer than two comments exist.  Comments with no tokens
    contribute similarity 0 to their pairs.  At most ``cap`` most recent
    comments are compared.
    """
    if cap is not None and len(comments) > cap:
        comments = comments[-cap:]
    if len(comments) < 2:
        return -1.0
    vectors = [Counter(_tokenize(text)) for text in comments]
    norms = [sqrt(sum(count * count for count in vec.values())) for vec in vectors]
    total = 0.0
    n_pairs = 0
    for i, j in combinations(range(len(vectors)), 2):
        n_pairs += 1
        if norms[i] == 0.0 or norms[j] == 0.0:
            continue
        small, big = (vectors[i], vectors[j]) if len(vectors[i]) <= len(vectors[j]) else (vectors[j], vectors[i])
        dot = sum(count * big.get(token, 0) for token, count in small.items())
        total += dot / (norms[i] * norms[j])
    return total / n_pairs


def extract_features(
    login: str, events: Sequence[Event], comment_cap: int | None = DEFAULT_COMMENT_CAP
) -> AccountFeatures:
    """Compute the four-feature vector from an account's event history.

    ``organization_owned`` is sticky: true if any event carries the flag.
    """
    if not events:
        raise EmptyHistoryError(f"account {login!r} has no events")
    ordered = sorted(events, key=lambda e: e.created_at)
    comments = [e.comment_body for e in ordered if e.comment_body is not None]
    return AccountFeatures(
        comment_similarity=comment_similarity(comments, cap=comment_cap),
        organization_owned=any(e.org_owned_actor for e in events),
        unique_event_types=len({e.event_type for e in events}),
        bot_placement=bot_name_placement(login),
    )


def extract_all_features(
    events: Iterable[Event],
    logins: Iterable[str] | None = None,
    comment_cap: int | None = DEFAULT_COMMENT_CAP,
) -> dict[str, AccountFeatures]:
    """Group a corpus by account and extract features, for ``logins`` (default:
    every bot-name candidate seen).  Keys are sorted for deterministic output."""
    by_login: dict[str, list[Event]] = {}
    for event in events:
        by_login.setdefault(event.actor_login, []).append(event)
    wanted = candidate_accounts(by_login) if logins is None else set(logins)
    out: dict[str, AccountFeatures] = {}
    for login in sorted(wanted):
        history = by_login.get(login)
        if history:
            out[login] = extract_features(login, history, comment_cap=comment_cap)
    return out


def encode_features(rows: Sequence[AccountFeatures]) -> np.ndarray:
    """Numeric design matrix: similarity, org flag, type count, one-hot placement."""
    X = np.zeros((len(rows), len(FEATURE_COLUMNS)), dtype=np.float64)
    for i, row in enumerate(rows):
        X[i, 0] = row.comment_similarity
        X[i, 1] = 1.0 if row.organization_owned else 0.0
        X[i, 2] = float(row.unique_event_types)
        X[i, 3 + _PLACEMENT_ORDER.index(row.bot_placement)] = 1.0
    return X


def labels_from_mapping(mapping: Mapping[str, Label | bool | int]) -> dict[str, Label]:
    """Normalize a login -> label mapping; truthy non-Label values mean Bot."""
    out: dict[str, Label] = {}
    for login, value in mapping.items():
        if isinstance(value, Label):
            out[login] = value
        else:
            out[login] = Label.BOT if value else Label.HUMAN
    return out
