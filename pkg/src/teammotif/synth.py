"""Synthetic corpora with known ground truth: bot accounts with separable
features, team event streams, planted motifs, and clustered vs. interspersed
comment runs.  Everything is deterministic for a fixed seed.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from .botdetect.features import AccountFeatures, BotPlacement, Label, LabeledAccount
from .events import Event, EventType
from .teams import ReducedSymbol, TeamKind, TeamSequence, symbols_to_string

GROUPS = ("human_bot", "human_only")

#: Share of each reduced symbol in a month of public GitHub-style events
#: (issue kinds merged); used as the background multinomial.
DEFAULT_SYMBOL_WEIGHTS = {
    ReducedSymbol.PU: 44.1,
    ReducedSymbol.PR: 15.6,
    ReducedSymbol.IS: 13.1,
    ReducedSymbol.RC: 5.6,
    ReducedSymbol.CR: 11.3,
    ReducedSymbol.DE: 4.7,
}

#: Within the merged issue symbol, the share emitted as issue comments.
ISSUE_COMMENT_SHARE = 9.1 / 13.1

_WORDS = (
    "fix", "build", "tests", "merge", "review", "update", "docs", "release",
    "refactor", "typo", "lint", "deploy", "cache", "retry", "config", "thanks",
    "looks", "good", "ready", "rebase", "squash", "version", "bump", "patch",
)

_BOT_WORDS = ("ci", "deploy", "release", "triage", "sync", "merge", "lint", "status")

_BASE_TIME = datetime(2019, 6, 1, tzinfo=timezone.utc)


class InvalidSpecError(ValueError):
    """A synthetic-corpus spec violates its invariants."""


@dataclass(frozen=True)
class PlantedMotif:
    symbols: tuple[ReducedSymbol, ...]
    rates: dict[str, float]  # group name -> per-sequence insertion probability


@dataclass
class SynthSpec:
    seed: int = 0
    # team event corpus
    n_human_bot: int = 20
    n_human_only: int = 40
    seq_len_min: int = 20
    seq_len_max: int = 60
    symbol_weights: dict[ReducedSymbol, float] = field(
        default_factory=lambda: dict(DEFAULT_SYMBOL_WEIGHTS)
    )
    planted: list[PlantedMotif] = field(default_factory=list)
    comment_mode: dict[str, str] = field(default_factory=dict)  # group -> clustered|interspersed
    comments_per_team: int = 6
    cluster_run_len: int = 3
    members_min: int = 2
    members_max: int = 4
    n_decoy_humans: int = 8  # human team members whose logins contain "bot"
    nonmember_noise_rate: float = 0.05
    bots_per_team: int = 1
    bot_events_min: int = 3
    bot_events_max: int = 8
    bot_repertoire: int = 2  # distinct event types a bot may use (1 or 2)
    bot_comment_template: str = "automated status update"
    # labeled bot-account fixture
    n_accounts: int = 600
    bot_fraction: float = 0.7
    feature_noise: float = 0.06
    label_fraction: float = 0.6

    def validate(self) -> None:
        checks = [
            (self.n_human_bot >= 1 and self.n_human_only >= 1, "need at least one team per group"),
            (self.seq_len_min >= 5, "seq_len_min must be at least 5"),
            (self.seq_len_max >= self.seq_len_min, "seq_len_max below seq_len_min"),
            (self.members_min >= 2, "teams need at least two members"),
            (self.members_max >= self.members_min, "members_max below members_min"),
            (0.0 <= self.nonmember_noise_rate <= 1.0, "nonmember_noise_rate outside [0, 1]"),
            (self.bots_per_team >= 1, "bots_per_team must be at least 1"),
            (1 <= self.bot_repertoire <= 2, "bot_repertoire must be 1 or 2"),
            (1 <= self.bot_events_min <= self.bot_events_max, "bad bot event count range"),
            (self.n_decoy_humans >= 1, "need at least one bot-named human for label diversity"),
            (self.comments_per_team >= 1, "comments_per_team must be at least 1"),
            (self.cluster_run_len >= 2, "cluster_run_len must be at least 2"),
            (self.n_accounts >= 10, "n_accounts too small"),
            (0.0 < self.bot_fraction < 1.0, "bot_fraction must be inside (0, 1)"),
            (0.0 <= self.feature_noise <= 1.0, "feature_noise outside [0, 1]"),
            (0.0 < self.label_fraction <= 1.0, "label_fraction outside (0, 1]"),
        ]
        for ok, message in checks:
            if not ok:
                raise InvalidSpecError(message)
        weights = [self.symbol_weights.get(symbol, 0.0) for symbol in ReducedSymbol]
        if any(weight < 0 for weight in weights) or sum(weights) <= 0:
            raise InvalidSpecError("symbol weights must be nonnegative and not all zero")
        for mode_group, mode in self.comment_mode.items():
            if mode_group not in GROUPS:
                raise InvalidSpecError(f"unknown group {mode_group!r} in comment_mode")
            if mode not in ("clustered", "interspersed"):
                raise InvalidSpecError(f"unknown comment mode {mode!r}")
        if self.comment_mode and self.comments_per_team > (self.seq_len_min + 1) // 2:
            raise InvalidSpecError("comments_per_team too large for seq_len_min")
        for motif in self.planted:
            if len(motif.symbols) < 2:
                raise InvalidSpecError("planted motifs need at least two symbols")
            if len(motif.symbols) > self.seq_len_min:
                raise InvalidSpecError("planted motif longer than seq_len_min")
            for group, rate in motif.rates.items():
                if group not in GROUPS:
                    raise InvalidSpecError(f"unknown group {group!r} in planted rates")
                if not 0.0 <= rate <= 1.0:
                    raise InvalidSpecError("planted rates must lie in [0, 1]")


@dataclass
class SynthManifest:
    """Ground truth for a generated corpus."""

    seed: int
    group_assignments: dict[int, str]
    bot_logins: list[str]
    decoy_logins: list[str]
    planted: dict[int, list[tuple[int, int]]]  # repo -> [(motif index, offset), ...]
    sequences: dict[int, str]  # repo -> compact symbol string
    labels: dict[str, int]  # candidate login -> 1 for bot

    def to_json(self, path) -> None:
        document = {
            "seed": self.seed,
            "group_assignments": {str(k): v for k, v in sorted(self.group_assignments.items())},
            "bot_logins": sorted(self.bot_logins),
            "decoy_logins": sorted(self.decoy_logins),
            "planted": {str(k): [list(p) for p in v] for k, v in sorted(self.planted.items())},
            "sequences": {str(k): v for k, v in sorted(self.sequences.items())},
            "labels": dict(sorted(self.labels.items())),
        }
        Path(path).write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")

    @classmethod
    def from_json(cls, path) -> "SynthManifest":
        document = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            seed=document["seed"],
            group_assignments={int(k): v for k, v in document["group_assignments"].items()},
            bot_logins=document["bot_logins"],
            decoy_logins=document["decoy_logins"],
            planted={int(k): [tuple(p) for p in v] for k, v in document["planted"].items()},
            sequences={int(k): v for k, v in document["sequences"].items()},
            labels=document["labels"],
        )


def _normalized_weights(spec: SynthSpec, exclude_issue: bool) -> tuple[list[ReducedSymbol], np.ndarray]:
    symbols = [s for s in ReducedSymbol if not (exclude_issue and s is ReducedSymbol.IS)]
    weights = np.array([spec.symbol_weights.get(s, 0.0) for s in symbols], dtype=np.float64)
    total = weights.sum()
    if total <= 0:
        raise InvalidSpecError("symbol weights collapse to zero after exclusions")
    return symbols, weights / total


def _insert_comment_runs(
    base: list[ReducedSymbol], mode: str, count: int, run_len: int, rng: np.random.Generator
) -> tuple[list[ReducedSymbol], set[int]]:
    """Insert ``count`` issue symbols into gaps of ``base``: contiguous runs
    when clustered, isolated singletons when interspersed.  Returns the new
    symbol list and the positions that must be emitted as issue comments."""
    if mode == "clustered":
        runs: list[int] = []
        remaining = count
        while remaining > 0:
            size = min(run_len, remaining)
            runs.append(size)
            remaining -= size
    else:
        runs = [1] * count
    n_gaps = len(base) + 1
    if len(runs) > n_gaps:
        raise InvalidSpecError("sequence too short for the requested comment layout")
    gaps = sorted(rng.choice(n_gaps, size=len(runs), replace=False).tolist())
    out: list[ReducedSymbol] = []
    comment_positions: set[int] = set()
    run_index = 0
    for gap in range(n_gaps):
        if run_index < len(runs) and gaps[run_index] == gap:
            for _ in range(runs[run_index]):
                comment_positions.add(len(out))
                out.append(ReducedSymbol.IS)
            run_index += 1
        if gap < len(base):
            out.append(base[gap])
    return out, comment_positions


def _emit_pre_reduction(
    symbols: list[ReducedSymbol], comment_positions: set[int], rng: np.random.Generator
) -> list[EventType]:
    reverse = {
        ReducedSymbol.PU: EventType.PUSH,
        ReducedSymbol.PR: EventType.PULL_REQUEST,
        ReducedSymbol.RC: EventType.PULL_REQUEST_REVIEW_COMMENT,
        ReducedSymbol.CR: EventType.CREATE,
        ReducedSymbol.DE: EventType.DELETE,
    }
    pre: list[EventType] = []
    for position, symbol in enumerate(symbols):
        if symbol is ReducedSymbol.IS:
            if position in comment_positions or rng.random() < ISSUE_COMMENT_SHARE:
                pre.append(EventType.ISSUE_COMMENT)
            else:
                pre.append(EventType.ISSUES)
        else:
            pre.append(reverse[symbol])
    return pre


def _generate_team_symbols(
    spec: SynthSpec, group: str, rng: np.random.Generator
) -> tuple[list[ReducedSymbol], set[int], list[tuple[int, int]]]:
    length = int(rng.integers(spec.seq_len_min, spec.seq_len_max + 1))
    mode = spec.comment_mode.get(group)
    if mode:
        alphabet, weights = _normalized_weights(spec, exclude_issue=True)
        base_len = max(length - spec.comments_per_team, 1)
        base = [alphabet[i] for i in rng.choice(len(alphabet), size=base_len, p=weights)]
        symbols, comment_positions = _insert_comment_runs(
            base, mode, spec.comments_per_team, spec.cluster_run_len, rng
        )
    else:
        alphabet, weights = _normalized_weights(spec, exclude_issue=False)
        symbols = [alphabet[i] for i in rng.choice(len(alphabet), size=length, p=weights)]
        comment_positions = set()

    # Plant motifs last so recorded offsets describe the final sequence;
    # offsets are chosen non-overlapping within one sequence.
    placements: list[tuple[int, int]] = []
    occupied: set[int] = set()
    for motif_index, motif in enumerate(spec.planted):
        rate = motif.rates.get(group, 0.0)
        if rng.random() >= rate:
            continue
        w = len(motif.symbols)
        if len(symbols) < w:
            continue
        for _ in range(20):  # rejection-sample a free slot
            offset = int(rng.integers(0, len(symbols) - w + 1))
            span = set(range(offset, offset + w))
            if span & occupied:
                continue
            for k, symbol in enumerate(motif.symbols):
                symbols[offset + k] = symbol
                comment_positions.discard(offset + k)
            occupied |= span
            placements.append((motif_index, offset))
            break

    # Guarantee enough contribution symbols for every member to push or PR.
    n_contrib = sum(1 for s in symbols if s in (ReducedSymbol.PU, ReducedSymbol.PR))
    while n_contrib < spec.members_max:
        symbols.append(ReducedSymbol.PU)
        n_contrib += 1
    return symbols, comment_positions, placements


def generate_sequences(spec: SynthSpec) -> tuple[dict[str, list[TeamSequence]], SynthManifest]:
    """Generate reduced-symbol team sequences per group, without event emission.

    Useful for motif-discovery experiments; :func:`generate` builds on the
    same sequence law and additionally emits the event stream.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    groups: dict[str, list[TeamSequence]] = {name: [] for name in GROUPS}
    manifest = SynthManifest(
        seed=spec.seed,
        group_assignments={},
        bot_logins=[],
        decoy_logins=[],
        planted={},
        sequences={},
        labels={},
    )
    repo_id = 0
    for group, count in (("human_bot", spec.n_human_bot), ("human_only", spec.n_human_only)):
        for _ in range(count):
            repo_id += 1
            symbols, comment_positions, placements = _generate_team_symbols(spec, group, rng)
            pre = _emit_pre_reduction(symbols, comment_positions, rng)
            groups[group].append(
                TeamSequence(repo_id=repo_id, kind=TeamKind(group), symbols=symbols, pre_reduction=pre)
            )
            manifest.group_assignments[repo_id] = group
            manifest.sequences[repo_id] = symbols_to_string(symbols)
            if placements:
                manifest.planted[repo_id] = placements
    return groups, manifest


def _bot_login(rng: np.random.Generator, uid: int) -> str:
    word = _BOT_WORDS[int(rng.integers(len(_BOT_WORDS)))]
    style = int(rng.integers(3))
    if style == 0:
        return f"{word}{uid}bot"  # ends with bot
    if style == 1:
        return f"bot-{word}-{uid}"  # starts with bot
    return f"{word}bot{uid}x"  # bot in the middle


def _decoy_login(rng: np.random.Generator, uid: int) -> str:
    stems = ("abbot", "talbot", "botan", "cabot")
    stem = stems[int(rng.integers(len(stems)))]
    return f"{stem}_{uid}"


def _human_comment(rng: np.random.Generator) -> str:
    n_words = int(rng.integers(3, 8))
    picks = rng.choice(len(_WORDS), size=n_words, replace=True)
    return " ".join(_WORDS[int(i)] for i in picks)


def generate(spec: SynthSpec) -> tuple[list[Event], SynthManifest]:
    """Generate a normalized event corpus plus its ground-truth manifest.

    Human-bot teams get templated bot accounts whose events are interleaved
    with the members'; a few human members carry bot-like names so the label
    file contains both classes.  Outsider watch/fork noise exercises the
    membership filters.
    """
    sequences, manifest = generate_sequences(spec)
    rng = np.random.default_rng(spec.seed + 0x5EED)
    uid = 0
    events: list[tuple[datetime, int, Event]] = []
    emit_counter = 0
    decoys_left = spec.n_decoy_humans
    n_teams = spec.n_human_bot + spec.n_human_only
    decoy_every = max(1, n_teams // spec.n_decoy_humans)

    team_index = 0
    for group in GROUPS:
        for seq in sequences[group]:
            team_index += 1
            t0 = _BASE_TIME + timedelta(days=team_index - 1)
            n_members = int(rng.integers(spec.members_min, spec.members_max + 1))
            members: list[tuple[int, str, bool]] = []
            for m in range(n_members):
                uid += 1
                if decoys_left > 0 and m == 0 and team_index % decoy_every == 0:
                    login = _decoy_login(rng, uid)
                    decoys_left -= 1
                    manifest.decoy_logins.append(login)
                    manifest.labels[login] = 0
                else:
                    login = f"user{uid:05d}"
                members.append((uid, login, bool(rng.random() < 0.25)))

            pre = seq.pre_reduction
            contribution_slots = [
                i for i, t in enumerate(pre) if t in (EventType.PUSH, EventType.PULL_REQUEST)
            ]
            # first contribution events go one to each member, the rest are random
            slot_owner = {slot: members[m] for m, slot in enumerate(contribution_slots[:n_members])}
            for position, event_type in enumerate(pre):
                actor = slot_owner.get(position)
                if actor is None:
                    actor = members[int(rng.integers(n_members))]
                actor_id, actor_login, org = actor
                body = None
                if event_type in (EventType.ISSUE_COMMENT, EventType.PULL_REQUEST_REVIEW_COMMENT):
                    body = _human_comment(rng)
                emit_counter += 1
                events.append(
                    (
                        t0 + timedelta(seconds=60 * position),
                        emit_counter,
                        Event(
                            event_type=event_type,
                            actor_id=actor_id,
                            actor_login=actor_login,
                            repo_id=seq.repo_id,
                            created_at=t0 + timedelta(seconds=60 * position),
                            org_owned_actor=org,
                            comment_body=body,
                        ),
                    )
                )

            if group == "human_bot":
                for _ in range(spec.bots_per_team):
                    uid += 1
                    login = _bot_login(rng, uid)
                    manifest.bot_logins.append(login)
                    manifest.labels[login] = 1
                    org = bool(rng.random() < 0.9)
                    repertoire = [EventType.ISSUE_COMMENT]
                    if spec.bot_repertoire == 2 and rng.random() < 0.7:
                        extra = (EventType.PUSH, EventType.CREATE, EventType.PULL_REQUEST)
                        repertoire.append(extra[int(rng.integers(len(extra)))])
                    n_bot_events = int(rng.integers(spec.bot_events_min, spec.bot_events_max + 1))
                    slots = rng.choice(len(pre), size=min(n_bot_events, len(pre)), replace=False)
                    for slot in sorted(int(s) for s in slots):
                        event_type = repertoire[int(rng.integers(len(repertoire)))]
                        body = None
                        if event_type is EventType.ISSUE_COMMENT:
                            body = spec.bot_comment_template
                            if rng.random() < 0.3:
                                body = f"{body} {int(rng.integers(100))}"
                        emit_counter += 1
                        events.append(
                            (
                                t0 + timedelta(seconds=60 * slot + 30),
                                emit_counter,
                                Event(
                                    event_type=event_type,
                                    actor_id=uid,
                                    actor_login=login,
                                    repo_id=seq.repo_id,
                                    created_at=t0 + timedelta(seconds=60 * slot + 30),
                                    org_owned_actor=org,
                                    comment_body=body,
                                ),
                            )
                        )

            n_noise = int(round(spec.nonmember_noise_rate * len(pre)))
            if n_noise:
                slots = rng.choice(len(pre), size=min(n_noise, len(pre)), replace=False)
                for slot in sorted(int(s) for s in slots):
                    uid += 1
                    emit_counter += 1
                    noise_type = EventType.WATCH if rng.random() < 0.7 else EventType.FORK
                    events.append(
                        (
                            t0 + timedelta(seconds=60 * slot + 45),
                            emit_counter,
                            Event(
                                event_type=noise_type,
                                actor_id=uid,
                                actor_login=f"visitor{uid:05d}",
                                repo_id=seq.repo_id,
                                created_at=t0 + timedelta(seconds=60 * slot + 45),
                                org_owned_actor=False,
                                comment_body=None,
                            ),
                        )
                    )

    events.sort(key=lambda item: (item[0], item[1]))
    return [event for _, _, event in events], manifest


# ---------------------------------------------------------------------------
# labeled bot-account fixture

def _bot_feature_draw(rng: np.random.Generator) -> tuple[float, int, bool]:
    # bimodal similarity: templated commenters vs. silent bots at the -1 sentinel
    similarity = -1.0 if rng.random() < 0.35 else 0.8 + 0.2 * rng.random()
    r = rng.random()
    unique_types = 1 if r < 0.45 else 2 if r < 0.8 else 3
    org = bool(rng.random() < 0.85)
    return similarity, unique_types, org


def _human_feature_draw(rng: np.random.Generator) -> tuple[float, int, bool]:
    if rng.random() < 0.45:  # chatty persona: templated pleasantries, many event kinds
        similarity = 0.45 + 0.35 * rng.random()
        unique_types = int(rng.integers(4, 10))
    else:  # quiet persona
        similarity = -1.0 if rng.random() < 0.2 else 0.45 * rng.random()
        unique_types = int(rng.integers(2, 6))
    org = bool(rng.random() < 0.3)
    return similarity, unique_types, org


def _fixture_login(rng: np.random.Generator, placement: BotPlacement, index: int) -> str:
    word = _BOT_WORDS[int(rng.integers(len(_BOT_WORDS)))]
    if placement is BotPlacement.BEGINNING:
        return f"bot-{word}-{index}"
    if placement is BotPlacement.END:
        return f"{word}{index}bot"
    return f"{word}bot{word}{index}"


def generate_bot_accounts(spec: SynthSpec) -> list[LabeledAccount]:
    """Labeled candidate accounts with class-separated feature distributions.

    All logins contain "bot" (they model the candidate pool).  With
    probability ``feature_noise`` an account's numeric features are drawn
    from the opposite class, which bounds the achievable F1 below 1.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    n_bots = int(round(spec.n_accounts * spec.bot_fraction))
    accounts: list[LabeledAccount] = []
    for index in range(spec.n_accounts):
        is_bot = index < n_bots
        if is_bot:
            r = rng.random()
            placement = (
                BotPlacement.END if r < 0.55 else BotPlacement.BEGINNING if r < 0.9 else BotPlacement.MIDDLE
            )
        else:
            r = rng.random()
            placement = (
                BotPlacement.MIDDLE if r < 0.5 else BotPlacement.END if r < 0.8 else BotPlacement.BEGINNING
            )
        noisy = rng.random() < spec.feature_noise
        draw_as_bot = is_bot ^ noisy
        similarity, unique_types, org = (
            _bot_feature_draw(rng) if draw_as_bot else _human_feature_draw(rng)
        )
        accounts.append(
            LabeledAccount(
                login=_fixture_login(rng, placement, index),
                features=AccountFeatures(
                    comment_similarity=similarity,
                    organization_owned=org,
                    unique_event_types=unique_types,
                    bot_placement=placement,
                ),
                label=Label.BOT if is_bot else Label.HUMAN,
            )
        )
    return accounts


def training_split(
    accounts_or_labels: Sequence[LabeledAccount] | dict[str, int],
    fraction: float,
    seed: int,
) -> dict[str, int]:
    """A seeded labeled subset containing both classes, for training files."""
    if isinstance(accounts_or_labels, dict):
        items = sorted(accounts_or_labels.items())
    else:
        items = sorted((a.login, 1 if a.label is Label.BOT else 0) for a in accounts_or_labels)
    rng = np.random.default_rng(seed)
    keep = {login: flag for login, flag in items if rng.random() < fraction}
    for wanted in (1, 0):
        if wanted not in keep.values():
            for login, flag in items:
                if flag == wanted:
                    keep[login] = flag
                    break
    return dict(sorted(keep.items()))
