"""Contrast motif discovery over groups of reduced-symbol sequences.

A candidate window is accepted as a motif of its group when its mean distance
to that group's sequences is lower than to every other group AND the
difference is significant under a Bonferroni-corrected two-sided
Mann-Whitney U-test.  Distance between a window and a sequence is the
minimum normalized Hamming distance over all alignments.
"""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .stats import mann_whitney_u
from .teams import SYMBOL_INDEX, ReducedSymbol, TeamSequence

logger = logging.getLogger(__name__)

Window = tuple[ReducedSymbol, ...]

DEFAULT_CANDIDATE_K = 50
DEFAULT_ALPHA = 0.01
DEFAULT_WINDOW_RANGE = range(2, 6)


class WindowTooLongError(ValueError):
    """Window length exceeds every sequence in the group."""


class SequenceTooShortError(ValueError):
    """A sequence is shorter than the window it is compared against."""


@dataclass(frozen=True)
class Motif:
    symbols: Window
    group: str
    mean_dist_own: float
    mean_dist_other: float  # closest competing group's mean
    p_value: float  # Bonferroni-corrected
    support: int  # own-group sequences containing an exact occurrence


@dataclass
class ContrastMotifSet:
    w: int
    motifs: dict[str, list[Motif]]
    candidate_count: int  # across all groups, the Bonferroni denominator


@dataclass(frozen=True)
class MotifGraph:
    """Directed graph of adjacent symbol pairs aggregated over a motif list."""

    nodes: frozenset[ReducedSymbol]
    edges: dict[tuple[ReducedSymbol, ReducedSymbol], int]


def _window_key(window: Window) -> tuple[int, ...]:
    return tuple(SYMBOL_INDEX[symbol] for symbol in window)


def encode_symbols(symbols: Sequence[ReducedSymbol]) -> np.ndarray:
    return np.fromiter((SYMBOL_INDEX[s] for s in symbols), dtype=np.int8, count=len(symbols))


def candidates(group: Sequence[TeamSequence], w: int, k: int | None = DEFAULT_CANDIDATE_K) -> list[Window]:
    """The k distinct length-w windows with highest document frequency.

    Document frequency counts sequences containing at least one exact
    occurrence.  Ties rank lexicographically; ``k=None`` returns every
    distinct window.  Sequences shorter than w contribute nothing; if all
    are shorter, raises :class:`WindowTooLongError`.
    """
    if w < 2:
        raise ValueError("window length must be at least 2")
    doc_freq: Counter[Window] = Counter()
    any_long_enough = False
    for seq in group:
        symbols = seq.symbols
        if len(symbols) < w:
            continue
        any_long_enough = True
        seen = {tuple(symbols[i : i + w]) for i in range(len(symbols) - w + 1)}
        for window in seen:
            doc_freq[window] += 1
    if not any_long_enough:
        raise WindowTooLongError(f"window length {w} exceeds every sequence length")
    ranked = sorted(doc_freq.items(), key=lambda item: (-item[1], _window_key(item[0])))
    if k is not None:
        ranked = ranked[:k]
    return [window for window, _ in ranked]


def motif_distance(window: Sequence[ReducedSymbol], seq: TeamSequence | Sequence[ReducedSymbol]) -> float:
    """Minimum over all alignments of HammingDistance(window, ...) / w, in [0, 1]."""
    symbols = seq.symbols if isinstance(seq, TeamSequence) else seq
    w = len(window)
    if len(symbols) < w:
        raise SequenceTooShortError(f"sequence of length {len(symbols)} shorter than window {w}")
    mismatches = kernels.min_hamming(encode_symbols(tuple(window)), encode_symbols(symbols))
    return mismatches / w


def discover(
    groups: Mapping[str, Sequence[TeamSequence]],
    w: int,
    k: int | None = DEFAULT_CANDIDATE_K,
    alpha: float = DEFAULT_ALPHA,
    n_jobs: int = 1,
) -> ContrastMotifSet:
    """Find contrast motifs for every group at window length w.

    For each candidate of group g, the own-group and other-group distance
    vectors are compared: accepted iff mean own < mean other for every other
    group and the worst-case two-sided Mann-Whitney p, Bonferroni-corrected
    by the total candidate count, is below alpha.  Motifs are sorted by
    ascending own-group mean distance.
    """
    if not groups:
        raise ValueError("no groups given")
    for name, seqs in groups.items():
        if not seqs:
            raise ValueError(f"group {name!r} is empty")
        for seq in seqs:
            if len(seq.symbols) < w:
                raise SequenceTooShortError(
                    f"group {name!r} has a sequence shorter than window {w}"
                )

    group_candidates = {name: candidates(seqs, w, k) for name, seqs in groups.items()}
    total_candidates = sum(len(c) for c in group_candidates.values())

    # One distance matrix over the deduplicated window set covers all groups.
    all_windows = list(dict.fromkeys(window for cand in group_candidates.values() for window in cand))
    window_row = {window: i for i, window in enumerate(all_windows)}
    window_matrix = np.array([encode_symbols(window) for window in all_windows], dtype=np.int8)
    distances = {
        name: kernels.distance_matrix(
            window_matrix, [encode_symbols(seq.symbols) for seq in seqs], n_jobs=n_jobs
        )
        for name, seqs in groups.items()
    }

    accepted: dict[str, list[Motif]] = {name: [] for name in groups}
    for name in groups:
        for window in group_candidates[name]:
            own = distances[name][window_row[window]]
            mean_own = float(own.mean())
            closest_other = np.inf
            worst_p = 0.0
            dominates = True
            for other_name in groups:
                if other_name == name:
                    continue
                other = distances[other_name][window_row[window]]
                mean_other = float(other.mean())
                closest_other = min(closest_other, mean_other)
                if not mean_own < mean_other:
                    dominates = False
                    break
                worst_p = max(worst_p, mann_whitney_u(own, other).p_two_sided)
            if not dominates:
                continue
            p_corrected = min(1.0, worst_p * total_candidates)
            if p_corrected < alpha:
                accepted[name].append(
                    Motif(
                        symbols=window,
                        group=name,
                        mean_dist_own=mean_own,
                        mean_dist_other=float(closest_other),
                        p_value=p_corrected,
                        support=int(np.count_nonzero(own == 0.0)),
                    )
                )
        accepted[name].sort(key=lambda m: (m.mean_dist_own, _window_key(m.symbols)))
    return ContrastMotifSet(w=w, motifs=accepted, candidate_count=total_candidates)


def window_sweep(
    groups: Mapping[str, Sequence[TeamSequence]],
    w_range: Iterable[int] = DEFAULT_WINDOW_RANGE,
    k: int | None = DEFAULT_CANDIDATE_K,
    alpha: float = DEFAULT_ALPHA,
    n_jobs: int = 1,
    on_skip: Callable[[str], None] | None = None,
) -> dict[int, ContrastMotifSet]:
    """Run discovery per window length; sequences shorter than a given w are
    excluded at that w with a diagnostic, and a w exceeding every sequence is
    skipped without affecting the others."""
    diagnose = on_skip if on_skip is not None else logger.warning
    results: dict[int, ContrastMotifSet] = {}
    for w in w_range:
        eligible: dict[str, list[TeamSequence]] = {}
        usable = True
        for name, seqs in groups.items():
            kept = [seq for seq in seqs if len(seq.symbols) >= w]
            dropped = len(seqs) - len(kept)
            if dropped:
                diagnose(f"w={w}: excluded {dropped} sequence(s) shorter than {w} from group {name!r}")
            if not kept:
                diagnose(f"w={w}: group {name!r} has no sequence of length >= {w}; skipping this window")
                usable = False
        if not usable:
            continue
        for name, seqs in groups.items():
            eligible[name] = [seq for seq in seqs if len(seq.symbols) >= w]
        results[w] = discover(eligible, w, k=k, alpha=alpha, n_jobs=n_jobs)
    return results


def motif_graph(motifs: Iterable[Motif]) -> MotifGraph:
    """Aggregate adjacent symbol pairs of the given motifs into a weighted digraph."""
    edges: Counter[tuple[ReducedSymbol, ReducedSymbol]] = Counter()
    nodes: set[ReducedSymbol] = set()
    for motif in motifs:
        nodes.update(motif.symbols)
        for a, b in zip(motif.symbols, motif.symbols[1:]):
            edges[(a, b)] += 1
    return MotifGraph(nodes=frozenset(nodes), edges=dict(edges))


def to_dot(graph: MotifGraph, name: str = "motifs") -> str:
    """Render a motif graph as DOT text, one edge per adjacent symbol pair."""
    lines = [f"digraph {name} {{"]
    for symbol in sorted(graph.nodes, key=lambda s: SYMBOL_INDEX[s]):
        lines.append(f"  {symbol.name};")
    for (a, b), weight in sorted(
        graph.edges.items(), key=lambda item: (SYMBOL_INDEX[item[0][0]], SYMBOL_INDEX[item[0][1]])
    ):
        lines.append(f"  {a.name} -> {b.name} [label={weight}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
