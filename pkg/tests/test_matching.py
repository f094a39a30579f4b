from itertools import permutations

import numpy as np
import pytest

from teammotif.matching import MajorityExhaustedError, MatchedPair, match_teams, median_table


def vec(*counts):
    return np.array(counts, dtype=np.int64)


def test_exact_match_taken_at_distance_zero():
    minority = [(1, vec(2, 0, 0, 0, 0, 0))]
    majority = [(10, vec(2, 0, 0, 0, 0, 0)), (11, vec(9, 9, 9, 9, 9, 9))]
    pairs = match_teams(minority, majority)
    assert pairs == [MatchedPair(1, 10, 0.0)]


def brute_force_min_total(minority, majority):
    """Oracle: try every injective assignment, return the minimum total distance."""
    best = None
    for perm in permutations(range(len(majority)), len(minority)):
        total = 0.0
        for (_, m_vec), j in zip(minority, perm):
            total += float(np.linalg.norm(m_vec - majority[j][1]))
        if best is None or total < best:
            best = total
    return best


def test_axis_aligned_neighbors_match_brute_force():
    minority = [(1, vec(4, 0, 0, 0, 0, 0)), (2, vec(0, 4, 0, 0, 0, 0))]
    majority = [
        (10, vec(3, 0, 0, 0, 0, 0)),
        (11, vec(0, 3, 0, 0, 0, 0)),
        (12, vec(10, 10, 10, 10, 10, 10)),
    ]
    pairs = match_teams(minority, majority)
    assert {(p.minority_repo_id, p.majority_repo_id) for p in pairs} == {(1, 10), (2, 11)}
    assert all(p.distance == pytest.approx(1.0) for p in pairs)
    assert sum(p.distance for p in pairs) == pytest.approx(brute_force_min_total(minority, majority))


def test_majority_exhausted():
    minority = [(1, vec(1, 0, 0, 0, 0, 0)), (2, vec(2, 0, 0, 0, 0, 0))]
    with pytest.raises(MajorityExhaustedError):
        match_teams(minority, minority[:1])


def test_without_replacement_and_sizes():
    rng = np.random.default_rng(3)
    minority = [(i, rng.integers(0, 20, size=6)) for i in range(30)]
    majority = [(100 + i, rng.integers(0, 20, size=6)) for i in range(80)]
    pairs = match_teams(minority, majority)
    assert len(pairs) == len(minority)
    majors = [p.majority_repo_id for p in pairs]
    assert len(set(majors)) == len(majors)
    assert {p.minority_repo_id for p in pairs} == set(range(30))


def test_copies_in_majority_give_zero_distances():
    rng = np.random.default_rng(4)
    minority = [(i, rng.integers(0, 9, size=6)) for i in range(12)]
    majority = [(100 + i, v.copy()) for i, (_, v) in enumerate(minority)]
    majority += [(900 + i, rng.integers(30, 40, size=6)) for i in range(12)]
    pairs = match_teams(minority, majority)
    assert all(p.distance == 0.0 for p in pairs)


def test_matching_deterministic_with_tie_rule():
    minority = [(1, vec(5, 0, 0, 0, 0, 0))]
    majority = [(12, vec(4, 0, 0, 0, 0, 0)), (11, vec(6, 0, 0, 0, 0, 0))]
    first = match_teams(minority, majority)
    second = match_teams(minority, list(majority))
    assert first == second
    assert first[0].majority_repo_id == 11  # equidistant: smaller repo id wins


def test_greedy_processes_largest_first():
    # the large team grabs the only good candidate; the small one takes what is left
    minority = [(1, vec(1, 0, 0, 0, 0, 0)), (2, vec(50, 0, 0, 0, 0, 0))]
    majority = [(10, vec(49, 0, 0, 0, 0, 0)), (11, vec(0, 0, 0, 0, 0, 0))]
    pairs = {p.minority_repo_id: p.majority_repo_id for p in match_teams(minority, majority)}
    assert pairs == {2: 10, 1: 11}


def test_median_table_single_vector():
    table = median_table([vec(1, 2, 3, 4, 5, 6)], [vec(7, 7, 7, 7, 7, 7)], [vec(2, 2, 2, 2, 2, 2)])
    assert table.minority == (1, 2, 3, 4, 5, 6)


def test_median_table_even_count_rule():
    table = median_table(
        [vec(1, 0, 0, 0, 0, 0), vec(3, 0, 0, 0, 0, 0)],
        [vec(5, 0, 0, 0, 0, 0)],
        [vec(5, 0, 0, 0, 0, 0)],
    )
    assert table.minority[0] == pytest.approx(2.0)


def test_median_table_reference_row():
    reference = vec(11, 9, 1, 6, 2, 1)
    table = median_table(
        [reference - 1, reference, reference + 1],
        [vec(9, 4, 0, 0, 3, 1)],
        [vec(12, 9, 1, 5, 2, 1)],
    )
    assert table.minority == (11.0, 9.0, 1.0, 6.0, 2.0, 1.0)
    assert table.rows()[0] == ("Push", 11.0, 9.0, 12.0)


def shifted_groups(seed):
    """Two groups with deliberately different event-frequency profiles plus a
    majority subpopulation near the minority profile."""
    rng = np.random.default_rng(seed)
    minority_profile = np.array([11, 9, 1, 6, 2, 1], dtype=np.float64)
    majority_profile = np.array([9, 4, 0.3, 0.5, 3, 1], dtype=np.float64)
    minority = [(i, rng.poisson(minority_profile)) for i in range(60)]
    majority = [(1000 + i, rng.poisson(majority_profile)) for i in range(400)]
    majority += [(2000 + i, rng.poisson(minority_profile)) for i in range(120)]
    return minority, majority


def test_matching_shrinks_median_gaps():
    minority, majority = shifted_groups(seed=8)
    pairs = match_teams(minority, majority)
    matched_ids = {p.majority_repo_id for p in pairs}
    table = median_table(
        [v for _, v in minority],
        [v for _, v in majority],
        [v for rid, v in majority if rid in matched_ids],
    )
    for i in range(6):
        gap_before = abs(table.minority[i] - table.majority_before[i])
        gap_after = abs(table.minority[i] - table.majority_after[i])
        assert gap_after <= gap_before
