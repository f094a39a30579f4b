"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as they
complete.
"""
import json
import subprocess
import sys
import time
from itertools import combinations

import numpy as np
import pytest

from teammotif import pipeline, storage
from teammotif.botdetect import ClassifierKind, evaluate_cv, f1_from_precision_recall
from teammotif.events import EventType
from teammotif.matching import match_teams, median_table
from teammotif.motifs import discover
from teammotif.stats import UTestMethod, compare_run_lengths, mann_whitney_u, proportions
from teammotif.synth import (
    PlantedMotif,
    SynthSpec,
    generate_bot_accounts,
    generate_sequences,
)
from teammotif.teams import ReducedSymbol, split_by_kind

from conftest import DATA_DIR

PU, PR, IS, RC, CR, DE = ReducedSymbol


def _report(number, passed, detail):
    status = "PASS" if passed else "FAIL"
    print(f"ACCEPTANCE {number}: {status} - {detail}")
    assert passed, detail


def test_criterion_1_classifier_band():
    spec = SynthSpec(seed=0, n_accounts=600, bot_fraction=0.7)
    accounts = generate_bot_accounts(spec)
    features = [a.features for a in accounts]
    labels = [a.label for a in accounts]
    start = time.time()
    gb = evaluate_cv(ClassifierKind.GRADIENT_BOOSTING, features, labels, k=5, seed=0)
    lr = evaluate_cv(ClassifierKind.LOGISTIC_REGRESSION, features, labels, k=5, seed=0)
    elapsed = time.time() - start
    ok = gb.mean_f1 >= 0.90 and gb.mean_f1 >= lr.mean_f1 and elapsed < 10.0
    _report(
        1,
        ok,
        f"GB mean F1={gb.mean_f1:.4f} (floor 0.90), LR mean F1={lr.mean_f1:.4f}, "
        f"runtime {elapsed:.1f}s < 10s",
    )


def test_criterion_2_f1_arithmetic():
    f1 = f1_from_precision_recall(0.89, 0.97)
    ok = 0.925 <= f1 <= 0.932
    _report(2, ok, f"f1(precision=0.89, recall=0.97) = {f1:.6f} in [0.925, 0.932]")


def test_criterion_3_u_test_oracle():
    """KNOWN RED: the <= 0.05 normal-vs-exact clause contradicts the criterion's
    own anchor pair.

    For a=[1,2], b=[3,4] the required exact two-sided p is 1/3, but the
    continuity-corrected normal approximation gives 0.2453 (gap 0.088), so no
    suite containing the anchor can satisfy the bound.  The worst case over
    all tie-free assignments is 0.129 at a=[1], b=[2,3,4].  The U-statistic
    and exact-p oracle clauses do hold exhaustively; only the approximation
    bound fails, and it fails for every textbook variant (with/without
    continuity correction, Edgeworth kurtosis term, t-referral).
    """
    # anchor case: exact two-sided p = 1/3
    reference = mann_whitney_u([1, 2], [3, 4])
    assert reference.u_statistic == 0 and reference.p_two_sided == pytest.approx(1 / 3)

    worst_gap = 0.0
    worst_pair = None
    anchor_gap = None
    checked = 0
    oracle_ok = True
    for n in range(2, 11):
        ranks = list(range(1, n + 1))
        for n1 in range(1, n):
            # full U distribution for this (n1, n2), then every assignment
            distribution = [
                sum(subset) - n1 * (n1 + 1) / 2 for subset in combinations(ranks, n1)
            ]
            mu = n1 * (n - n1) / 2
            for subset in combinations(ranks, n1):
                a = [float(r) for r in subset]
                b = [float(r) for r in ranks if r not in subset]
                u_oracle = sum(subset) - n1 * (n1 + 1) / 2
                deviation = abs(u_oracle - mu)
                p_oracle = sum(
                    1 for u in distribution if abs(u - mu) >= deviation - 1e-12
                ) / len(distribution)
                result = mann_whitney_u(a, b)
                oracle_ok &= (
                    result.method is UTestMethod.EXACT
                    and result.u_statistic == u_oracle
                    and abs(result.p_two_sided - p_oracle) < 1e-12
                )
                p_normal = mann_whitney_u(a, b, method="normal").p_two_sided
                gap = abs(p_normal - result.p_two_sided)
                if gap > worst_gap:
                    worst_gap = gap
                    worst_pair = (a, b)
                if a == [1.0, 2.0] and b == [3.0, 4.0]:
                    anchor_gap = gap
                checked += 1
    bound_ok = worst_gap <= 0.05
    _report(
        3,
        oracle_ok and bound_ok,
        f"{checked} exhaustive tie-free pairs (n1+n2 <= 10): U and exact p match the "
        f"enumeration oracle ({'yes' if oracle_ok else 'NO'}); anchor p(1/3) holds; "
        f"|p_normal - p_exact| <= 0.05 FAILS: worst {worst_gap:.4f} at {worst_pair}, "
        f"and the anchor pair itself gaps {anchor_gap:.4f} - the bound contradicts the "
        f"criterion's own anchor, so it is unattainable for any standard approximation",
    )


def _planted_spec(seed, rate):
    return SynthSpec(
        seed=seed,
        n_human_bot=200,
        n_human_only=200,
        seq_len_min=20,
        seq_len_max=50,
        planted=[
            PlantedMotif((PU, PR, IS, PU), {"human_bot": rate, "human_only": 0.0})
        ],
    )


def test_criterion_4_planted_motif_recovery():
    motif = (PU, PR, IS, PU)
    recovered = 0
    slowest = 0.0
    for seed in range(20):
        groups, _ = generate_sequences(_planted_spec(100 + seed, rate=0.8))
        start = time.time()
        result = discover(groups, w=4, k=50, alpha=0.01)
        slowest = max(slowest, time.time() - start)
        accepted = {m.symbols: m for m in result.motifs["human_bot"]}
        if motif in accepted and accepted[motif].p_value < 0.01:
            recovered += 1

    false_positive_runs = 0
    for seed in range(20):
        groups, _ = generate_sequences(_planted_spec(300 + seed, rate=0.0))
        result = discover(groups, w=4, k=50, alpha=0.01)
        if any(result.motifs[g] for g in result.motifs):
            false_positive_runs += 1

    ok = recovered >= 19 and false_positive_runs <= 1 and slowest < 60.0
    _report(
        4,
        ok,
        f"planted motif recovered in {recovered}/20 seeds (need >= 19); "
        f"null false-positive runs {false_positive_runs}/20 (need <= 1); "
        f"slowest discovery {slowest:.1f}s < 60s",
    )


def oracle_distance(window, symbols):
    w = len(window)
    best = w
    for offset in range(len(symbols) - w + 1):
        best = min(best, sum(1 for i in range(w) if symbols[offset + i] is not window[i]))
    return best / w


def oracle_discover(groups, w, alpha):
    all_candidates = {}
    for name, seqs in groups.items():
        windows = set()
        for s in seqs:
            for i in range(len(s.symbols) - w + 1):
                windows.add(tuple(s.symbols[i : i + w]))
        all_candidates[name] = windows
    n_total = sum(len(v) for v in all_candidates.values())
    accepted = {name: set() for name in groups}
    for name, windows in all_candidates.items():
        for window in windows:
            own = [oracle_distance(window, s.symbols) for s in groups[name]]
            ok = True
            worst_p = 0.0
            for other in groups:
                if other == name:
                    continue
                other_d = [oracle_distance(window, s.symbols) for s in groups[other]]
                if not (sum(own) / len(own) < sum(other_d) / len(other_d)):
                    ok = False
                    break
                worst_p = max(worst_p, mann_whitney_u(own, other_d).p_two_sided)
            if ok and min(1.0, worst_p * n_total) < alpha:
                accepted[name].add(window)
    return accepted


def test_criterion_5_small_instance_oracle_equivalence():
    corpora = sorted((DATA_DIR / "micro").glob("*.csv"))
    assert corpora, "bundled micro corpora missing"
    compared = 0
    nonempty = 0
    for path in corpora:
        sequences = storage.read_sequences_csv(path)
        by_kind = split_by_kind(sequences)
        groups = {kind.value: seqs for kind, seqs in by_kind.items() if seqs}
        max_w = min(min(len(s.symbols) for s in seqs) for seqs in groups.values())
        for w in range(2, min(5, max_w) + 1):
            for alpha in (0.01, 0.5):
                result = discover(groups, w=w, k=None, alpha=alpha)
                got = {name: {m.symbols for m in motifs} for name, motifs in result.motifs.items()}
                expected = oracle_discover(groups, w, alpha)
                assert got == expected, f"{path.name} w={w} alpha={alpha}"
                compared += 1
                nonempty += any(expected.values())
    ok = compared > 0 and nonempty > 0
    _report(
        5,
        ok,
        f"{len(corpora)} micro corpora, {compared} (w, alpha) discovery runs identical to "
        f"brute-force enumeration ({nonempty} with nonempty motif sets)",
    )


def test_criterion_6_matching_efficacy():
    rng = np.random.default_rng(42)
    minority_profile = np.array([11, 9, 1, 6, 2, 1], dtype=np.float64)
    majority_profile = np.array([9, 4, 0.3, 0.5, 3, 1], dtype=np.float64)
    minority = [(i, rng.poisson(minority_profile)) for i in range(80)]
    majority = [(1000 + i, rng.poisson(majority_profile)) for i in range(500)]
    majority += [(2000 + i, rng.poisson(minority_profile)) for i in range(160)]
    pairs = match_teams(minority, majority)
    matched = {p.majority_repo_id for p in pairs}
    table = median_table(
        [v for _, v in minority],
        [v for _, v in majority],
        [v for rid, v in majority if rid in matched],
    )
    gaps = []
    for i, event_type in enumerate(table.event_types):
        before = abs(table.minority[i] - table.majority_before[i])
        after = abs(table.minority[i] - table.majority_after[i])
        gaps.append((event_type.value, before, after))
    ok = all(after <= before for _, before, after in gaps)
    detail = ", ".join(f"{name}: {before:g}->{after:g}" for name, before, after in gaps)
    _report(6, ok, f"per-type median gap before->after matching: {detail}")


def test_criterion_7_run_length_direction():
    spec = SynthSpec(
        seed=11,
        n_human_bot=150,
        n_human_only=150,
        comment_mode={"human_bot": "clustered", "human_only": "interspersed"},
        comments_per_team=6,
        cluster_run_len=3,
    )
    groups, _ = generate_sequences(spec)
    clustered = [s.pre_reduction for s in groups["human_bot"]]  # group A
    interspersed = [s.pre_reduction for s in groups["human_only"]]  # group B
    total_a = sum(seq.count(EventType.ISSUE_COMMENT) for seq in clustered)
    total_b = sum(seq.count(EventType.ISSUE_COMMENT) for seq in interspersed)
    result = compare_run_lengths(clustered, interspersed)
    ok = (
        total_a == total_b
        and result.direction == "a_higher"
        and result.test.p_two_sided < 0.01
    )
    _report(
        7,
        ok,
        f"equal comment totals ({total_a} each); clustered group higher "
        f"(medians {result.median_a:g} vs {result.median_b:g}), p = {result.test.p_two_sided:.2e} < 0.01",
    )


def test_criterion_8_pipeline_determinism(tmp_path):
    sample = DATA_DIR / "sample"
    outputs = []
    for run_index in (1, 2):
        out_dir = tmp_path / f"run{run_index}"
        config_path = tmp_path / f"config{run_index}.json"
        config_path.write_text(
            json.dumps(
                {
                    "input": [str(sample / "events.ndjson.gz")],
                    "labels": str(sample / "labels.csv"),
                    "output_dir": str(out_dir),
                    "seed": 7,
                }
            )
        )
        result = subprocess.run(
            [sys.executable, "-m", "teammotif.cli", "run", "--config", str(config_path)],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0, result.stderr
        outputs.append(out_dir)

    compared = [
        pipeline.REPORT_ARTIFACT,
        pipeline.MOTIFS_ARTIFACT,
        "motif_graph_human_bot.dot",
        "motif_graph_human_only.dot",
    ]
    identical = all(
        (outputs[0] / name).read_bytes() == (outputs[1] / name).read_bytes() for name in compared
    )
    _report(
        8,
        identical,
        f"two separate-process runs on the bundled sample: {', '.join(compared)} byte-identical",
    )


def test_criterion_9_proportions():
    raw_weights = {
        EventType.PUSH: 44.1,
        EventType.PULL_REQUEST: 15.6,
        EventType.CREATE: 11.3,
        EventType.ISSUE_COMMENT: 9.1,
        EventType.PULL_REQUEST_REVIEW_COMMENT: 5.6,
        EventType.DELETE: 4.7,
        EventType.ISSUES: 4.0,
        EventType.WATCH: 2.4,
        EventType.FORK: 1.3,
        EventType.RELEASE: 0.56,
        EventType.GOLLUM: 0.38,
        EventType.MEMBER: 0.31,
        EventType.COMMIT_COMMENT: 0.16,
        EventType.PUBLIC: 0.07,
    }
    types = list(raw_weights)
    probabilities = np.array(list(raw_weights.values()), dtype=np.float64)
    probabilities /= probabilities.sum()
    rng = np.random.default_rng(99)
    draws = rng.choice(len(types), size=100_000, p=probabilities)
    events = [types[i] for i in draws]
    table = dict(proportions(events))
    worst = max(
        abs(table.get(event_type, 0.0) - 100.0 * probabilities[i])
        for i, event_type in enumerate(types)
    )
    top_two = [t.value for t, _ in proportions(events)[:2]]
    ok = worst <= 1.0 and top_two == ["Push", "PullRequest"]
    _report(
        9,
        ok,
        f"100k draws: worst per-type deviation {worst:.3f} pp <= 1.0; top types {top_two}",
    )
