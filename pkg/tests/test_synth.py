import numpy as np
import pytest

from teammotif.botdetect import Label, candidate_accounts
from teammotif.events import write_events
from teammotif.stats import run_length_means
from teammotif.synth import (
    InvalidSpecError,
    PlantedMotif,
    SynthSpec,
    generate,
    generate_bot_accounts,
    generate_sequences,
    training_split,
)
from teammotif.teams import ReducedSymbol, build_teams, reduce_alphabet, symbols_to_string

PU, PR, IS, RC, CR, DE = ReducedSymbol


def test_spec_validation():
    with pytest.raises(InvalidSpecError):
        SynthSpec(seq_len_min=3).validate()
    with pytest.raises(InvalidSpecError):
        SynthSpec(symbol_weights={s: 0.0 for s in ReducedSymbol}).validate()
    with pytest.raises(InvalidSpecError):
        SynthSpec(comment_mode={"nope": "clustered"}).validate()
    with pytest.raises(InvalidSpecError):
        SynthSpec(planted=[PlantedMotif((PU,), {"human_bot": 1.0})]).validate()
    with pytest.raises(InvalidSpecError):
        SynthSpec(planted=[PlantedMotif((PU, PR), {"human_bot": 2.0})]).validate()
    SynthSpec().validate()


def test_same_seed_byte_identical(tmp_path):
    spec = SynthSpec(seed=12, n_human_bot=4, n_human_only=6)
    events_a, manifest_a = generate(spec)
    events_b, manifest_b = generate(SynthSpec(seed=12, n_human_bot=4, n_human_only=6))
    path_a, path_b = tmp_path / "a.ndjson", tmp_path / "b.ndjson"
    write_events(events_a, path_a)
    write_events(events_b, path_b)
    assert path_a.read_bytes() == path_b.read_bytes()
    manifest_a.to_json(tmp_path / "ma.json")
    manifest_b.to_json(tmp_path / "mb.json")
    assert (tmp_path / "ma.json").read_bytes() == (tmp_path / "mb.json").read_bytes()


def test_different_seed_differs():
    events_a, _ = generate(SynthSpec(seed=1, n_human_bot=3, n_human_only=3))
    events_b, _ = generate(SynthSpec(seed=2, n_human_bot=3, n_human_only=3))
    assert events_a != events_b


def test_generated_events_pass_validation(tmp_path):
    from teammotif.events import stream_events

    events, _ = generate(SynthSpec(seed=3, n_human_bot=3, n_human_only=4))
    path = tmp_path / "events.ndjson"
    write_events(events, path)
    parsed = list(stream_events(path, strict=True))
    assert parsed == events
    assert all(a.created_at <= b.created_at for a, b in zip(events, events[1:]))


def test_manifest_matches_pipeline_reconstruction():
    spec = SynthSpec(seed=4, n_human_bot=5, n_human_only=7)
    events, manifest = generate(spec)
    teams = build_teams(events, set(manifest.bot_logins))
    assert {t.repo_id for t in teams} == set(manifest.group_assignments)
    for team in teams:
        assert team.kind.value == manifest.group_assignments[team.repo_id]
        seq = reduce_alphabet([e.event_type for e in team.events])
        assert symbols_to_string(seq) == manifest.sequences[team.repo_id]


def test_planted_occurrences_match_manifest():
    motif = (PU, PR, IS, PU)
    spec = SynthSpec(
        seed=5,
        n_human_bot=40,
        n_human_only=40,
        planted=[PlantedMotif(motif, {"human_bot": 0.9, "human_only": 0.1})],
    )
    groups, manifest = generate_sequences(spec)
    by_repo = {s.repo_id: s for seqs in groups.values() for s in seqs}
    for repo_id, placements in manifest.planted.items():
        for motif_index, offset in placements:
            assert motif_index == 0
            window = tuple(by_repo[repo_id].symbols[offset : offset + len(motif)])
            assert window == motif
    planted_bot = sum(1 for rid in manifest.planted if manifest.group_assignments[rid] == "human_bot")
    assert planted_bot >= 25  # ~90% of 40


def test_symbol_frequencies_converge_to_weights():
    spec = SynthSpec(seed=6, n_human_bot=60, n_human_only=60, seq_len_min=400, seq_len_max=420,
                     members_min=2, members_max=2)
    groups, _ = generate_sequences(spec)
    counts = {s: 0 for s in ReducedSymbol}
    total = 0
    for seqs in groups.values():
        for seq in seqs:
            for symbol in seq.symbols:
                counts[symbol] += 1
                total += 1
    assert total >= 48_000
    weight_total = sum(spec.symbol_weights.values())
    for symbol in ReducedSymbol:
        expected = spec.symbol_weights[symbol] / weight_total
        observed = counts[symbol] / total
        assert abs(observed - expected) < 0.01, symbol


def test_comment_modes_shape_run_lengths():
    spec = SynthSpec(
        seed=7,
        n_human_bot=30,
        n_human_only=30,
        comment_mode={"human_bot": "interspersed", "human_only": "clustered"},
        comments_per_team=6,
        cluster_run_len=3,
    )
    groups, _ = generate_sequences(spec)
    means = {
        name: np.mean([run_length_means(s.pre_reduction) for s in seqs])
        for name, seqs in groups.items()
    }
    assert means["human_only"] > 2.0
    assert means["human_bot"] < 1.5
    # equal total comment counts by construction
    from teammotif.events import EventType

    totals = {
        name: sum(s.pre_reduction.count(EventType.ISSUE_COMMENT) for s in seqs)
        for name, seqs in groups.items()
    }
    assert totals["human_bot"] == totals["human_only"]


def test_bot_logins_are_candidates_and_labels_cover_both_classes():
    events, manifest = generate(SynthSpec(seed=8, n_human_bot=6, n_human_only=6))
    logins = {e.actor_login for e in events}
    assert set(manifest.bot_logins) <= candidate_accounts(logins)
    assert set(manifest.decoy_logins) <= candidate_accounts(logins)
    assert set(manifest.labels.values()) == {0, 1}
    split = training_split(manifest.labels, fraction=0.5, seed=8)
    assert set(split.values()) == {0, 1}
    assert set(split) <= set(manifest.labels)


def test_bot_accounts_fixture_shape():
    accounts = generate_bot_accounts(SynthSpec(seed=9, n_accounts=600, bot_fraction=0.7))
    assert len(accounts) == 600
    n_bots = sum(a.label is Label.BOT for a in accounts)
    assert n_bots == 420
    assert all("bot" in a.login.lower() for a in accounts)
    sims = [a.features.comment_similarity for a in accounts]
    assert all(s == -1.0 or 0.0 <= s <= 1.0 for s in sims)


def test_zero_noise_fixture_is_separable():
    from teammotif.botdetect import ClassifierKind, evaluate_cv

    accounts = generate_bot_accounts(SynthSpec(seed=10, n_accounts=200, feature_noise=0.0))
    report = evaluate_cv(
        ClassifierKind.GRADIENT_BOOSTING,
        [a.features for a in accounts],
        [a.label for a in accounts],
        k=5,
        seed=10,
    )
    assert report.mean_f1 >= 0.97
