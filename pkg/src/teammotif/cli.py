"""Command-line interface.

Subcommands run one pipeline stage each from persisted artifacts; ``run``
executes the whole pipeline.  Configuration comes from a JSON file, with
command-line flags overriding individual fields.

Exit codes: 0 success, 2 validation error, 3 data error, 4 internal error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, pipeline, storage
from .botdetect import DegenerateLabelsError, EmptyHistoryError, KTooLargeError
from .events import IngestError, write_events
from .matching import MajorityExhaustedError
from .motifs import SequenceTooShortError, WindowTooLongError
from .stats import EmptyCorpusError, EmptySampleError
from .synth import GROUPS, InvalidSpecError, PlantedMotif, SynthSpec, generate, training_split
from .teams import string_to_symbols

_VALIDATION_ERRORS = (pipeline.ConfigError, InvalidSpecError)
_DATA_ERRORS = (
    pipeline.DataError,
    pipeline.MissingUpstreamArtifactError,
    IngestError,
    DegenerateLabelsError,
    EmptyHistoryError,
    KTooLargeError,
    MajorityExhaustedError,
    EmptyCorpusError,
    EmptySampleError,
    WindowTooLongError,
    SequenceTooShortError,
    FileNotFoundError,
)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--input", action="append", help="input NDJSON file (repeatable)")
    parser.add_argument("--labels", help="training labels CSV (login,is_bot)")
    parser.add_argument("--out", dest="output_dir", help="output directory")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--classifier", choices=["gradient_boosting", "logistic_regression"])
    parser.add_argument("--threshold", type=float)
    parser.add_argument("--k-folds", dest="k_folds", type=int)
    parser.add_argument("--min-seq-len", dest="min_seq_len", type=int)
    parser.add_argument("--w-min", dest="w_min", type=int)
    parser.add_argument("--w-max", dest="w_max", type=int)
    parser.add_argument("--highlight-w", dest="highlight_w", type=int)
    parser.add_argument("--candidate-k", dest="candidate_k", type=int)
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--parallelism", type=int)
    parser.add_argument(
        "--strict-ingest", dest="strict_ingest", action="store_const", const=True, default=None
    )
    parser.add_argument(
        "--pooled-run-lengths",
        dest="run_length_pooled",
        action="store_const",
        const=True,
        default=None,
    )
    parser.add_argument(
        "--not-reproducible",
        dest="reproducible",
        action="store_const",
        const=False,
        default=None,
        help="allow running without a seed",
    )


_CONFIG_KEYS = (
    "input",
    "labels",
    "output_dir",
    "seed",
    "classifier",
    "threshold",
    "k_folds",
    "min_seq_len",
    "w_min",
    "w_max",
    "highlight_w",
    "candidate_k",
    "alpha",
    "parallelism",
    "strict_ingest",
    "run_length_pooled",
    "reproducible",
)


def _build_config(args: argparse.Namespace) -> pipeline.PipelineConfig:
    overrides = {key: getattr(args, key, None) for key in _CONFIG_KEYS}
    if getattr(args, "w", None) is not None:
        overrides["w_min"] = overrides["w_max"] = overrides["highlight_w"] = args.w
    if args.config:
        return pipeline.PipelineConfig.from_file(args.config, overrides)
    return pipeline.PipelineConfig.from_dict({}, overrides)


def _synth_spec_from_file(path: str | None, seed: int | None) -> SynthSpec:
    payload = {}
    if path:
        payload = storage.read_json(path)
        if not isinstance(payload, dict):
            raise pipeline.ConfigError(f"{path}: synth spec must be a JSON object")
    if seed is not None:
        payload["seed"] = seed
    planted = [
        PlantedMotif(symbols=tuple(string_to_symbols(p["symbols"])), rates=dict(p.get("rates", {})))
        for p in payload.pop("planted", [])
    ]
    if "symbol_weights" in payload:
        payload["symbol_weights"] = {
            string_to_symbols(code)[0]: float(weight)
            for code, weight in payload["symbol_weights"].items()
        }
    try:
        spec = SynthSpec(planted=planted, **payload)
    except TypeError as exc:
        raise pipeline.ConfigError(f"bad synth spec: {exc}") from None
    spec.validate()
    return spec


def _cmd_synth(args: argparse.Namespace) -> int:
    spec = _synth_spec_from_file(args.spec, args.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    events, manifest = generate(spec)
    events_path = out_dir / ("events.ndjson.gz" if args.gzip else "events.ndjson")
    n = write_events(events, events_path)
    manifest.to_json(out_dir / "manifest.json")
    storage.write_labels_csv(manifest.labels, out_dir / "labels_full.csv")
    storage.write_labels_csv(
        training_split(manifest.labels, spec.label_fraction, spec.seed),
        out_dir / "labels_train.csv",
    )
    print(f"wrote {n} events for {len(manifest.group_assignments)} teams to {events_path}")
    counts = ", ".join(
        f"{g}={sum(1 for v in manifest.group_assignments.values() if v == g)}" for g in GROUPS
    )
    print(f"groups: {counts}")
    return 0


def _make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="teammotif",
        description="Mine bot-vs-human team workflow differences from event streams.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    stage_help = {
        "run": "execute the full pipeline",
        "ingest": "normalize and validate raw event input",
        "detect-bots": "extract features, cross-validate, train, and predict",
        "build-teams": "form teams and reduced event sequences",
        "sample": "match-sample human-only teams and tabulate medians",
        "motifs": "discover contrast motifs over the window sweep",
        "stats": "run-length comparison and proportion table",
        "report": "aggregate persisted artifacts into report.json",
    }
    for name in ("run",) + pipeline.STAGE_ORDER:
        stage_parser = sub.add_parser(name, help=stage_help[name])
        _add_config_flags(stage_parser)
        if name == "motifs":
            stage_parser.add_argument("--w", type=int, help="restrict the sweep to one window size")
        if name == "stats":
            stage_parser.add_argument(
                "--run-lengths",
                action="store_true",
                help="accepted for symmetry; run-length analysis always runs",
            )

    synth_parser = sub.add_parser("synth", help="generate a synthetic corpus with ground truth")
    synth_parser.add_argument("--spec", help="synth spec JSON (defaults used when omitted)")
    synth_parser.add_argument("--seed", type=int, help="override the spec seed")
    synth_parser.add_argument("--out", required=True, help="output directory")
    synth_parser.add_argument("--gzip", action="store_true", help="gzip the event file")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _make_parser().parse_args(argv)
    try:
        if args.command == "synth":
            return _cmd_synth(args)
        config = _build_config(args)
        if args.command == "run":
            pipeline.run(config)
            print(f"report written to {config.artifact(pipeline.REPORT_ARTIFACT)}")
        else:
            summary = pipeline.run_stage(config, args.command)
            print(json.dumps(summary, indent=2, default=str))
        return 0
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
