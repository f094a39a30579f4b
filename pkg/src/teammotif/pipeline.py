"""End-to-end pipeline: ingest, bot detection, team building, matched
sampling, motif discovery, statistics, and the aggregate report.

Every stage reads persisted artifacts from the output directory and writes
its own, so the full run and a stage-by-stage run produce identical bytes.
All randomness flows from the config seed.
"""
from __future__ import annotations

import json
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Iterator

from . import __version__, storage
from .botdetect import (
    ClassifierKind,
    Label,
    evaluate_cv,
    predict_batch,
    save_model,
    train,
)
from .botdetect.features import extract_all_features
from .events import CONTRIBUTION_TYPES, Event, event_to_record, stream_events
from .matching import match_teams, median_table
from .motifs import motif_graph, to_dot, window_sweep
from .stats import compare_run_lengths, proportions
from .teams import (
    TeamKind,
    build_sequences,
    build_teams,
    frequency_vector,
    split_by_kind,
    symbols_to_string,
)

EVENTS_ARTIFACT = "events.norm.ndjson"
CORPUS_STATS_ARTIFACT = "corpus_stats.json"
FEATURES_ARTIFACT = "bot_features.csv"
MODEL_ARTIFACT = "bot_model.json"
CV_REPORT_ARTIFACT = "cv_report.json"
PREDICTIONS_ARTIFACT = "bot_predictions.csv"
TEAMS_ARTIFACT = "teams.csv"
SEQUENCES_ARTIFACT = "sequences.csv"
SEQUENCES_PRE_ARTIFACT = "sequences_pre.csv"
MATCHES_ARTIFACT = "matches.csv"
MEDIANS_ARTIFACT = "medians.csv"
MOTIFS_ARTIFACT = "motifs.csv"
MOTIF_SUMMARY_ARTIFACT = "motif_summary.json"
STATS_ARTIFACT = "stats.json"
PROPORTIONS_ARTIFACT = "proportions.csv"
REPORT_ARTIFACT = "report.json"

STAGE_ORDER = ("ingest", "detect-bots", "build-teams", "sample", "motifs", "stats", "report")


class ConfigError(ValueError):
    """The pipeline configuration is invalid; nothing has run."""


class DataError(ValueError):
    """The input data cannot satisfy a stage's preconditions."""


class MissingUpstreamArtifactError(FileNotFoundError):
    def __init__(self, path: Path, produced_by: str):
        super().__init__(
            f"missing artifact {path}; run the `{produced_by}` stage first (or `run` for the full pipeline)"
        )
        self.path = path
        self.produced_by = produced_by


def motif_graph_artifact(group: str) -> str:
    return f"motif_graph_{group}.dot"


@dataclass
class PipelineConfig:
    input: list[str] = field(default_factory=list)
    labels: str | None = None
    output_dir: str = "out"
    seed: int | None = None
    reproducible: bool = True
    classifier: str = "gradient_boosting"
    classifier_params: dict = field(default_factory=dict)
    threshold: float = 0.5
    comment_cap: int = 200
    k_folds: int = 5
    min_seq_len: int = 5
    w_min: int = 2
    w_max: int = 5
    highlight_w: int = 4
    candidate_k: int | None = 50
    alpha: float = 0.01
    include_review_comments: bool = False
    run_length_pooled: bool = False
    parallelism: int | None = None
    strict_ingest: bool = False

    @classmethod
    def from_file(cls, path, overrides: dict | None = None) -> "PipelineConfig":
        payload = storage.read_json(path)
        if not isinstance(payload, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(payload, overrides)

    @classmethod
    def from_dict(cls, payload: dict, overrides: dict | None = None) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(payload) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        merged = dict(payload)
        for key, value in (overrides or {}).items():
            if value is not None:
                merged[key] = value
        if isinstance(merged.get("input"), str):
            merged["input"] = [merged["input"]]
        return cls(**merged)

    def validate(self) -> None:
        checks = [
            (self.k_folds >= 2, "k_folds must be at least 2"),
            (self.min_seq_len >= 1, "min_seq_len must be at least 1"),
            (2 <= self.w_min <= self.w_max, "need 2 <= w_min <= w_max"),
            (self.w_min <= self.highlight_w <= self.w_max, "highlight_w outside window range"),
            (0.0 < self.alpha < 1.0, "alpha must lie inside (0, 1)"),
            (0.0 <= self.threshold <= 1.0, "threshold outside [0, 1]"),
            (self.candidate_k is None or self.candidate_k >= 1, "candidate_k must be >= 1 or null"),
            (self.comment_cap >= 2, "comment_cap must be at least 2"),
            (self.parallelism is None or self.parallelism >= 1, "parallelism must be >= 1 or null"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)
        try:
            ClassifierKind(self.classifier)
        except ValueError:
            raise ConfigError(f"unknown classifier {self.classifier!r}") from None
        if self.reproducible and self.seed is None:
            raise ConfigError("reproducible mode requires an explicit seed")

    @property
    def effective_seed(self) -> int:
        return 0 if self.seed is None else self.seed

    @property
    def n_jobs(self) -> int:
        return self.parallelism if self.parallelism is not None else (os.cpu_count() or 1)

    def artifact(self, name: str) -> Path:
        return Path(self.output_dir) / name

    def require_artifact(self, name: str, produced_by: str) -> Path:
        path = self.artifact(name)
        if not path.exists():
            raise MissingUpstreamArtifactError(path, produced_by)
        return path

    def summary(self) -> dict:
        return {
            "input": list(self.input),
            "labels": self.labels,
            "classifier": self.classifier,
            "seed": self.seed,
            "k_folds": self.k_folds,
            "min_seq_len": self.min_seq_len,
            "w_min": self.w_min,
            "w_max": self.w_max,
            "highlight_w": self.highlight_w,
            "candidate_k": self.candidate_k,
            "alpha": self.alpha,
            "threshold": self.threshold,
            "include_review_comments": self.include_review_comments,
            "run_length_pooled": self.run_length_pooled,
        }


def _stream_inputs(config: PipelineConfig) -> Iterator[Event]:
    for path in config.input:
        yield from stream_events(path, strict=config.strict_ingest)


def stage_ingest(config: PipelineConfig) -> dict:
    """Validate and normalize the raw input stream into ``events.norm.ndjson``."""
    if not config.input:
        raise ConfigError("no input files configured")
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    target = config.artifact(EVENTS_ARTIFACT)
    tmp = target.with_name(target.name + ".tmp")

    n_events = 0
    users: set[int] = set()
    repos: set[int] = set()
    type_counts: dict[str, int] = {}
    with open(tmp, "w", encoding="utf-8") as handle:
        for event in _stream_inputs(config):
            handle.write(json.dumps(event_to_record(event)))
            handle.write("\n")
            n_events += 1
            type_counts[event.event_type.value] = type_counts.get(event.event_type.value, 0) + 1
            if event.event_type in CONTRIBUTION_TYPES:
                users.add(event.actor_id)
                repos.add(event.repo_id)
    os.replace(tmp, target)
    stats = {
        "events": n_events,
        "active_users": len(users),
        "active_repos": len(repos),
        "type_counts": dict(sorted(type_counts.items())),
    }
    storage.write_json(config.artifact(CORPUS_STATS_ARTIFACT), stats)
    return stats


def stage_detect_bots(config: PipelineConfig) -> dict:
    """Extract candidate-account features, cross-validate, train, and predict."""
    events_path = config.require_artifact(EVENTS_ARTIFACT, "ingest")
    if not config.labels:
        raise ConfigError("bot detection requires a labels file")
    labels = storage.read_labels_csv(config.labels)

    with open(events_path, "rb") as handle:
        features = extract_all_features(
            stream_events(handle, strict=True), comment_cap=config.comment_cap
        )
    storage.write_features_csv(features, config.artifact(FEATURES_ARTIFACT))

    train_logins = sorted(login for login in labels if login in features)
    missing = sorted(login for login in labels if login not in features)
    if missing:
        print(
            f"warning: {len(missing)} labeled account(s) have no events in the corpus: "
            + ", ".join(missing[:5])
            + ("..." if len(missing) > 5 else ""),
            file=sys.stderr,
        )
    if len(train_logins) < 2:
        raise DataError("fewer than two labeled accounts present in the corpus")
    kind = ClassifierKind(config.classifier)
    train_features = [features[login] for login in train_logins]
    train_labels = [labels[login] for login in train_logins]
    report = evaluate_cv(
        kind,
        train_features,
        train_labels,
        k=config.k_folds,
        seed=config.effective_seed,
        params=config.classifier_params or None,
        threshold=config.threshold,
    )
    cv_payload = {"classifier": kind.value, "seed": config.effective_seed, **report.to_dict()}
    storage.write_json(config.artifact(CV_REPORT_ARTIFACT), cv_payload)

    model = train(
        kind,
        train_features,
        train_labels,
        params=config.classifier_params or None,
        seed=config.effective_seed,
        threshold=config.threshold,
    )
    save_model(model, config.artifact(MODEL_ARTIFACT))

    unlabeled = sorted(login for login in features if login not in labels)
    predictions = []
    if unlabeled:
        results = predict_batch(model, [features[login] for login in unlabeled])
        predictions = [
            (login, probability, label) for login, (probability, label) in zip(unlabeled, results)
        ]
    storage.write_predictions_csv(predictions, config.artifact(PREDICTIONS_ARTIFACT))
    return {
        "candidates": len(features),
        "labeled": len(train_logins),
        "predicted": len(predictions),
        "predicted_bots": sum(1 for _, _, label in predictions if label is Label.BOT),
        "cv": cv_payload,
    }


def _detected_bot_logins(config: PipelineConfig) -> set[str]:
    bots: set[str] = set()
    if config.labels:
        for login, label in storage.read_labels_csv(config.labels).items():
            if label is Label.BOT:
                bots.add(login)
    for login, _, label in storage.read_predictions_csv(
        config.require_artifact(PREDICTIONS_ARTIFACT, "detect-bots")
    ):
        if label is Label.BOT:
            bots.add(login)
    return bots


def stage_build_teams(config: PipelineConfig) -> dict:
    """Form teams from the normalized events and the detected bot set."""
    events_path = config.require_artifact(EVENTS_ARTIFACT, "ingest")
    bots = _detected_bot_logins(config)
    with open(events_path, "rb") as handle:
        teams = build_teams(stream_events(handle, strict=True), bots)
    sequences = build_sequences(teams, min_len=config.min_seq_len)
    storage.write_teams_csv(teams, config.artifact(TEAMS_ARTIFACT))
    storage.write_sequences_csv(sequences, config.artifact(SEQUENCES_ARTIFACT))
    storage.write_pre_reduction_csv(sequences, config.artifact(SEQUENCES_PRE_ARTIFACT))
    by_kind = split_by_kind(sequences)
    return {
        "teams": len(teams),
        "sequences": len(sequences),
        "human_bot": len(by_kind[TeamKind.HUMAN_BOT]),
        "human_only": len(by_kind[TeamKind.HUMAN_ONLY]),
    }


def _load_sequences(config: PipelineConfig):
    path = config.require_artifact(SEQUENCES_ARTIFACT, "build-teams")
    pre_path = config.require_artifact(SEQUENCES_PRE_ARTIFACT, "build-teams")
    return storage.read_sequences_csv(path, pre_path)


def stage_sample(config: PipelineConfig) -> dict:
    """Match-sample human-only teams to human-bot teams and tabulate medians."""
    by_kind = split_by_kind(_load_sequences(config))
    minority = by_kind[TeamKind.HUMAN_BOT]
    majority = by_kind[TeamKind.HUMAN_ONLY]
    if not minority:
        raise DataError("no human-bot sequences to match")
    if not majority:
        raise DataError("no human-only sequences to match against")

    def vec(seq):
        return frequency_vector(seq, include_review_comments=config.include_review_comments)

    pairs = match_teams(
        [(s.repo_id, vec(s)) for s in minority],
        [(s.repo_id, vec(s)) for s in majority],
    )
    storage.write_matches_csv(pairs, config.artifact(MATCHES_ARTIFACT))
    matched_ids = {pair.majority_repo_id for pair in pairs}
    table = median_table(
        [vec(s) for s in minority],
        [vec(s) for s in majority],
        [vec(s) for s in majority if s.repo_id in matched_ids],
    )
    storage.write_medians_csv(table, config.artifact(MEDIANS_ARTIFACT))
    return {
        "minority": len(minority),
        "majority_before": len(majority),
        "majority_after": len(pairs),
    }


def _matched_groups(config: PipelineConfig) -> dict[str, list]:
    sequences = _load_sequences(config)
    pairs = storage.read_matches_csv(config.require_artifact(MATCHES_ARTIFACT, "sample"))
    matched_ids = {pair.majority_repo_id for pair in pairs}
    by_kind = split_by_kind(sequences)
    groups = {
        TeamKind.HUMAN_BOT.value: by_kind[TeamKind.HUMAN_BOT],
        TeamKind.HUMAN_ONLY.value: [
            s for s in by_kind[TeamKind.HUMAN_ONLY] if s.repo_id in matched_ids
        ],
    }
    for name, seqs in groups.items():
        if not seqs:
            raise DataError(f"group {name!r} is empty after matching")
    return groups


def stage_motifs(config: PipelineConfig) -> dict:
    """Sweep window sizes, persist the motif table and per-group DOT graphs."""
    groups = _matched_groups(config)
    diagnostics: list[str] = []
    sweep = window_sweep(
        groups,
        w_range=range(config.w_min, config.w_max + 1),
        k=config.candidate_k,
        alpha=config.alpha,
        n_jobs=config.n_jobs,
        on_skip=diagnostics.append,
    )
    for line in diagnostics:
        print(f"motifs: {line}", file=sys.stderr)
    storage.write_motifs_csv(sweep, config.artifact(MOTIFS_ARTIFACT))
    summary: dict[str, dict] = {}
    for w in sorted(sweep):
        motif_set = sweep[w]
        summary[str(w)] = {
            "candidate_count": motif_set.candidate_count,
            "accepted": {g: len(motif_set.motifs[g]) for g in sorted(motif_set.motifs)},
        }
    highlight = sweep.get(config.highlight_w)
    for group in sorted(groups):
        motifs = highlight.motifs.get(group, []) if highlight is not None else []
        dot = to_dot(motif_graph(motifs), name=group)
        storage.atomic_write_text(config.artifact(motif_graph_artifact(group)), dot)
    payload = {"highlight_w": config.highlight_w, "windows": summary, "diagnostics": diagnostics}
    storage.write_json(config.artifact(MOTIF_SUMMARY_ARTIFACT), payload)
    return payload


def stage_stats(config: PipelineConfig) -> dict:
    """Run-length comparison between groups plus the corpus proportion table."""
    groups = _matched_groups(config)
    comparison = compare_run_lengths(
        [s.pre_reduction for s in groups[TeamKind.HUMAN_BOT.value]],
        [s.pre_reduction for s in groups[TeamKind.HUMAN_ONLY.value]],
        pooled=config.run_length_pooled,
    )
    events_path = config.require_artifact(EVENTS_ARTIFACT, "ingest")
    with open(events_path, "rb") as handle:
        table = proportions(stream_events(handle, strict=True))
    storage.write_proportions_csv(table, config.artifact(PROPORTIONS_ARTIFACT))
    payload = {
        "run_lengths": {
            "group_a": TeamKind.HUMAN_BOT.value,
            "group_b": TeamKind.HUMAN_ONLY.value,
            "pooled": config.run_length_pooled,
            **comparison.to_dict(),
        }
    }
    storage.write_json(config.artifact(STATS_ARTIFACT), payload)
    return payload


def stage_report(config: PipelineConfig) -> dict:
    """Aggregate persisted artifacts into ``report.json`` without recomputation."""
    corpus = storage.read_json(config.require_artifact(CORPUS_STATS_ARTIFACT, "ingest"))
    cv = storage.read_json(config.require_artifact(CV_REPORT_ARTIFACT, "detect-bots"))
    sequences = _load_sequences(config)
    pairs = storage.read_matches_csv(config.require_artifact(MATCHES_ARTIFACT, "sample"))
    medians = storage.read_medians_csv(config.require_artifact(MEDIANS_ARTIFACT, "sample"))
    motif_summary = storage.read_json(config.require_artifact(MOTIF_SUMMARY_ARTIFACT, "motifs"))
    stats_payload = storage.read_json(config.require_artifact(STATS_ARTIFACT, "stats"))
    motifs = storage.read_motifs_csv(config.require_artifact(MOTIFS_ARTIFACT, "motifs"))

    by_kind = split_by_kind(sequences)
    highlight = motif_summary["highlight_w"]
    top_motifs: dict[str, list[dict]] = {}
    for motif in motifs:
        top_motifs.setdefault(motif.group, [])
    for motif in motifs:
        row = {
            "symbols": symbols_to_string(motif.symbols),
            "w": len(motif.symbols),
            "mean_own": motif.mean_dist_own,
            "mean_other": motif.mean_dist_other,
            "p_corrected": motif.p_value,
            "support": motif.support,
        }
        if row["w"] == highlight and len(top_motifs[motif.group]) < 10:
            top_motifs[motif.group].append(row)

    report = {
        "schema_version": 1,
        "package_version": __version__,
        "seed": config.seed,
        "config": config.summary(),
        "corpus": corpus,
        "teams": {
            "sequences": len(sequences),
            "human_bot": len(by_kind[TeamKind.HUMAN_BOT]),
            "human_only_before": len(by_kind[TeamKind.HUMAN_ONLY]),
            "human_only_matched": len(pairs),
        },
        "classifier_cv": cv,
        "medians": [
            {
                "event_type": event_type,
                "minority": minority,
                "majority_before": before,
                "majority_after": after,
            }
            for event_type, minority, before, after in medians
        ],
        "motifs": {**motif_summary, "top": {g: top_motifs[g] for g in sorted(top_motifs)}},
        "stats": stats_payload,
    }
    storage.write_json(config.artifact(REPORT_ARTIFACT), report)
    return report


_STAGES = {
    "ingest": stage_ingest,
    "detect-bots": stage_detect_bots,
    "build-teams": stage_build_teams,
    "sample": stage_sample,
    "motifs": stage_motifs,
    "stats": stage_stats,
    "report": stage_report,
}


def run_stage(config: PipelineConfig, stage: str) -> dict:
    config.validate()
    if stage not in _STAGES:
        raise ConfigError(f"unknown stage {stage!r}")
    try:
        return _STAGES[stage](config)
    except Exception as exc:
        print(f"pipeline stage {stage!r} failed: {exc}", file=sys.stderr)
        raise


def run(config: PipelineConfig) -> dict:
    """Execute all stages in order; returns the final report payload."""
    config.validate()
    result: dict = {}
    for stage in STAGE_ORDER:
        try:
            result = _STAGES[stage](config)
        except Exception as exc:
            print(f"pipeline stage {stage!r} failed: {exc}", file=sys.stderr)
            raise
    return result
