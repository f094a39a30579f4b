"""Readers and writers for the pipeline's CSV/JSON artifacts.

Artifacts are plain text so every stage can be inspected or re-driven by
external tools.  Writers are atomic (temp file + rename) so a failing stage
never leaves a partial artifact behind.
"""
from __future__ import annotations

import csv
import io
import json
import os
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .botdetect.features import AccountFeatures, BotPlacement, Label
from .events import EventType
from .matching import MatchedPair, MedianTable
from .motifs import ContrastMotifSet, Motif
from .teams import TeamKind, TeamSequence, string_to_symbols, symbols_to_string


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def write_json(path, payload) -> None:
    atomic_write_text(path, json.dumps(payload, indent=2) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    atomic_write_text(path, buffer.getvalue())


def _read_csv(path, expected_header: Sequence[str]) -> list[list[str]]:
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != list(expected_header):
            raise ValueError(f"{path}: expected header {list(expected_header)}, got {header}")
        return [row for row in reader if row]


# -- sequences ---------------------------------------------------------------

SEQUENCES_HEADER = ("repo_id", "kind", "symbols")
PRE_REDUCTION_HEADER = ("repo_id", "kind", "events")


def write_sequences_csv(sequences: Sequence[TeamSequence], path) -> None:
    _write_csv(
        path,
        SEQUENCES_HEADER,
        ((s.repo_id, s.kind.value, symbols_to_string(s.symbols)) for s in sequences),
    )


def write_pre_reduction_csv(sequences: Sequence[TeamSequence], path) -> None:
    _write_csv(
        path,
        PRE_REDUCTION_HEADER,
        (
            (s.repo_id, s.kind.value, " ".join(t.value for t in s.pre_reduction))
            for s in sequences
        ),
    )


def read_sequences_csv(path, pre_path=None) -> list[TeamSequence]:
    """Load sequences; when ``pre_path`` is given, pre-reduction event lists
    are joined in by repo id."""
    pre_by_repo: dict[int, list[EventType]] = {}
    if pre_path is not None:
        for repo_id, _, text in _read_csv(pre_path, PRE_REDUCTION_HEADER):
            pre_by_repo[int(repo_id)] = [EventType(name) for name in text.split()] if text else []
    out: list[TeamSequence] = []
    for repo_id, kind, symbols in _read_csv(path, SEQUENCES_HEADER):
        out.append(
            TeamSequence(
                repo_id=int(repo_id),
                kind=TeamKind(kind),
                symbols=string_to_symbols(symbols),
                pre_reduction=pre_by_repo.get(int(repo_id), []),
            )
        )
    return out


# -- teams -------------------------------------------------------------------

TEAMS_HEADER = ("repo_id", "kind", "n_members", "member_ids")


def write_teams_csv(teams, path) -> None:
    _write_csv(
        path,
        TEAMS_HEADER,
        (
            (t.repo_id, t.kind.value, len(t.members), "|".join(str(m) for m in sorted(t.members)))
            for t in teams
        ),
    )


def read_teams_csv(path) -> list[tuple[int, TeamKind, frozenset[int]]]:
    return [
        (int(repo_id), TeamKind(kind), frozenset(int(m) for m in member_ids.split("|") if m))
        for repo_id, kind, _, member_ids in _read_csv(path, TEAMS_HEADER)
    ]


# -- bot detection -----------------------------------------------------------

LABELS_HEADER = ("login", "is_bot")
FEATURES_HEADER = (
    "login",
    "comment_similarity",
    "organization_owned",
    "unique_event_types",
    "bot_placement",
)
PREDICTIONS_HEADER = ("login", "probability", "label")


def write_labels_csv(labels: Mapping[str, int], path) -> None:
    _write_csv(path, LABELS_HEADER, sorted(labels.items()))


def read_labels_csv(path) -> dict[str, Label]:
    out: dict[str, Label] = {}
    for login, is_bot in _read_csv(path, LABELS_HEADER):
        if is_bot not in ("0", "1"):
            raise ValueError(f"{path}: is_bot must be 0 or 1, got {is_bot!r} for {login!r}")
        out[login] = Label.BOT if is_bot == "1" else Label.HUMAN
    return out


def write_features_csv(features: Mapping[str, AccountFeatures], path) -> None:
    _write_csv(
        path,
        FEATURES_HEADER,
        (
            (
                login,
                f.comment_similarity,
                int(f.organization_owned),
                f.unique_event_types,
                f.bot_placement.value,
            )
            for login, f in sorted(features.items())
        ),
    )


def read_features_csv(path) -> dict[str, AccountFeatures]:
    out: dict[str, AccountFeatures] = {}
    for login, similarity, org, unique_types, placement in _read_csv(path, FEATURES_HEADER):
        out[login] = AccountFeatures(
            comment_similarity=float(similarity),
            organization_owned=org == "1",
            unique_event_types=int(unique_types),
            bot_placement=BotPlacement(placement),
        )
    return out


def write_predictions_csv(predictions: Iterable[tuple[str, float, Label]], path) -> None:
    _write_csv(
        path,
        PREDICTIONS_HEADER,
        ((login, probability, label.value) for login, probability, label in predictions),
    )


def read_predictions_csv(path) -> list[tuple[str, float, Label]]:
    return [
        (login, float(probability), Label(label))
        for login, probability, label in _read_csv(path, PREDICTIONS_HEADER)
    ]


# -- matching ----------------------------------------------------------------

MATCHES_HEADER = ("minority_repo_id", "majority_repo_id", "distance")
MEDIANS_HEADER = ("event_type", "minority", "majority_before", "majority_after")


def write_matches_csv(pairs: Sequence[MatchedPair], path) -> None:
    _write_csv(
        path,
        MATCHES_HEADER,
        ((p.minority_repo_id, p.majority_repo_id, p.distance) for p in pairs),
    )


def read_matches_csv(path) -> list[MatchedPair]:
    return [
        MatchedPair(int(minority), int(majority), float(distance))
        for minority, majority, distance in _read_csv(path, MATCHES_HEADER)
    ]


def write_medians_csv(table: MedianTable, path) -> None:
    _write_csv(path, MEDIANS_HEADER, table.rows())


def read_medians_csv(path) -> list[tuple[str, float, float, float]]:
    return [
        (event_type, float(a), float(b), float(c))
        for event_type, a, b, c in _read_csv(path, MEDIANS_HEADER)
    ]


# -- motifs ------------------------------------------------------------------

MOTIFS_HEADER = ("group", "w", "symbols", "mean_own", "mean_other", "p_corrected", "support")


def write_motifs_csv(sweep: Mapping[int, ContrastMotifSet], path) -> None:
    rows = []
    for w in sorted(sweep):
        motif_set = sweep[w]
        for group in sorted(motif_set.motifs):
            for motif in motif_set.motifs[group]:
                rows.append(
                    (
                        group,
                        w,
                        symbols_to_string(motif.symbols),
                        motif.mean_dist_own,
                        motif.mean_dist_other,
                        motif.p_value,
                        motif.support,
                    )
                )
    _write_csv(path, MOTIFS_HEADER, rows)


def read_motifs_csv(path) -> list[Motif]:
    return [
        Motif(
            symbols=tuple(string_to_symbols(symbols)),
            group=group,
            mean_dist_own=float(mean_own),
            mean_dist_other=float(mean_other),
            p_value=float(p_corrected),
            support=int(support),
        )
        for group, _, symbols, mean_own, mean_other, p_corrected, support in _read_csv(
            path, MOTIFS_HEADER
        )
    ]


# -- stats -------------------------------------------------------------------

PROPORTIONS_HEADER = ("event_type", "percent")


def write_proportions_csv(rows: Sequence[tuple[EventType, float]], path) -> None:
    _write_csv(path, PROPORTIONS_HEADER, ((t.value, pct) for t, pct in rows))


def read_proportions_csv(path) -> list[tuple[EventType, float]]:
    return [(EventType(name), float(pct)) for name, pct in _read_csv(path, PROPORTIONS_HEADER)]
