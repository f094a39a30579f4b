"""Event data model and streaming NDJSON ingestion for GitHub-style event streams.

Input is one JSON object per line in a fixed normalized schema (see
``parse_event_line``); gzip-compressed files are detected by magic bytes.
Parsing is single-pass and constant-memory so multi-gigabyte archives can be
consumed without staging.
"""
from __future__ import annotations

import gzip
import io
import json
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Iterator


class EventType(Enum):
    """The 14 raw event kinds accepted by the normalized record format."""

    PUSH = "Push"
    PULL_REQUEST = "PullRequest"
    CREATE = "Create"
    ISSUE_COMMENT = "IssueComment"
    PULL_REQUEST_REVIEW_COMMENT = "PullRequestReviewComment"
    DELETE = "Delete"
    ISSUES = "Issues"
    WATCH = "Watch"
    FORK = "Fork"
    RELEASE = "Release"
    GOLLUM = "Gollum"
    MEMBER = "Member"
    COMMIT_COMMENT = "CommitComment"
    PUBLIC = "Public"


#: Event kinds that may carry a ``comment_body``.
COMMENT_TYPES = frozenset(
    {EventType.ISSUE_COMMENT, EventType.PULL_REQUEST_REVIEW_COMMENT, EventType.COMMIT_COMMENT}
)

#: Contribution kinds that make an actor/repo "active" and define team membership.
CONTRIBUTION_TYPES = frozenset({EventType.PUSH, EventType.PULL_REQUEST})

_REQUIRED_KEYS = frozenset(
    {"event_type", "actor_id", "actor_login", "repo_id", "created_at", "org_owned_actor"}
)


class IngestError(Exception):
    """A record-level ingestion failure; carries the 1-based line number when known."""

    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class MalformedRecordError(IngestError):
    """Record is not valid JSON or violates the normalized schema."""


class UnknownEventTypeError(IngestError):
    """``event_type`` is not one of the 14 raw kinds."""


class InvalidTimestampError(IngestError):
    """``created_at`` does not parse as a timestamp."""


@dataclass(frozen=True, slots=True)
class Event:
    """One timestamped actor action on a repository."""

    event_type: EventType
    actor_id: int
    actor_login: str
    repo_id: int
    created_at: datetime
    org_owned_actor: bool
    comment_body: str | None = None


@dataclass
class ActivitySummary:
    """Actors and repos with at least one push or pull request in the window."""

    active_users: set[int]
    active_repos: set[int]


def _parse_timestamp(raw: object, line_number: int | None) -> datetime:
    if not isinstance(raw, str):
        raise InvalidTimestampError(f"created_at must be a string, got {type(raw).__name__}", line_number)
    text = raw[:-1] + "+00:00" if raw.endswith("Z") else raw
    try:
        ts = datetime.fromisoformat(text)
    except ValueError as exc:
        raise InvalidTimestampError(f"bad created_at {raw!r}: {exc}", line_number) from None
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    # Normalize to UTC at second resolution; ordering ties are broken by file order.
    return ts.astimezone(timezone.utc).replace(microsecond=0)


def _require_id(obj: dict, key: str, line_number: int | None) -> int:
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise MalformedRecordError(f"{key} must be an integer, got {value!r}", line_number)
    if value < 0:
        raise MalformedRecordError(f"{key} must be nonnegative, got {value}", line_number)
    return value


def parse_event_line(line: str, line_number: int | None = None) -> Event:
    """Parse one normalized NDJSON record into a validated :class:`Event`.

    Unknown optional keys are ignored.  Raises :class:`MalformedRecordError`,
    :class:`UnknownEventTypeError`, or :class:`InvalidTimestampError`, each
    tagged with ``line_number`` when provided.
    """
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedRecordError(f"invalid JSON: {exc}", line_number) from None
    if not isinstance(obj, dict):
        raise MalformedRecordError("record is not a JSON object", line_number)

    missing = _REQUIRED_KEYS - obj.keys()
    if missing:
        raise MalformedRecordError(f"missing keys: {', '.join(sorted(missing))}", line_number)

    raw_type = obj["event_type"]
    if not isinstance(raw_type, str):
        raise MalformedRecordError(f"event_type must be a string, got {raw_type!r}", line_number)
    try:
        event_type = EventType(raw_type)
    except ValueError:
        raise UnknownEventTypeError(f"unknown event_type {raw_type!r}", line_number) from None

    login = obj["actor_login"]
    if not isinstance(login, str) or not login:
        raise MalformedRecordError(f"actor_login must be a nonempty string, got {login!r}", line_number)

    flag = obj["org_owned_actor"]
    if not isinstance(flag, bool):
        raise MalformedRecordError(f"org_owned_actor must be a boolean, got {flag!r}", line_number)

    comment_body = obj.get("comment_body")
    if comment_body is not None:
        if not isinstance(comment_body, str):
            raise MalformedRecordError(f"comment_body must be a string, got {comment_body!r}", line_number)
        if event_type not in COMMENT_TYPES:
            raise MalformedRecordError(
                f"comment_body not allowed on {event_type.value} events", line_number
            )

    return Event(
        event_type=event_type,
        actor_id=_require_id(obj, "actor_id", line_number),
        actor_login=login,
        repo_id=_require_id(obj, "repo_id", line_number),
        created_at=_parse_timestamp(obj["created_at"], line_number),
        org_owned_actor=flag,
        comment_body=comment_body,
    )


def event_to_record(event: Event) -> dict:
    """Inverse of :func:`parse_event_line`: a JSON-serializable dict in canonical key order."""
    record = {
        "event_type": event.event_type.value,
        "actor_id": event.actor_id,
        "actor_login": event.actor_login,
        "repo_id": event.repo_id,
        "created_at": event.created_at.strftime("%Y-%m-%dT%H:%M:%SZ"),
        "org_owned_actor": event.org_owned_actor,
    }
    if event.comment_body is not None:
        record["comment_body"] = event.comment_body
    return record


def _default_diagnostic(exc: IngestError) -> None:
    print(f"skipping malformed record: {exc}", file=sys.stderr)


def _open_binary(source) -> tuple[io.BufferedIOBase, bool]:
    if isinstance(source, (str, Path)):
        return open(source, "rb"), True
    if isinstance(source, io.BufferedIOBase) and hasattr(source, "peek"):
        return source, False
    return io.BufferedReader(source), False


def stream_events(
    source,
    strict: bool = False,
    on_error: Callable[[IngestError], None] | None = None,
) -> Iterator[Event]:
    """Stream events from a path or binary file object, in file order.

    Gzip input is detected by magic bytes.  In lenient mode (default) each
    malformed line is reported through ``on_error`` (standard error by
    default) and skipped; in strict mode the first parse error aborts.
    """
    if on_error is None:
        on_error = _default_diagnostic
    raw, owns = _open_binary(source)
    base = raw
    try:
        if raw.peek(2)[:2] == b"\x1f\x8b":
            raw = gzip.GzipFile(fileobj=raw)  # type: ignore[assignment]
        text = io.TextIOWrapper(raw, encoding="utf-8")
        for line_number, line in enumerate(text, start=1):
            if not line.strip():
                continue
            try:
                yield parse_event_line(line, line_number)
            except IngestError as exc:
                if strict:
                    raise
                on_error(exc)
    finally:
        if owns:
            base.close()


def parse_events(text: str, strict: bool = True) -> list[Event]:
    """Parse a whole in-memory NDJSON document; equivalent to streaming it."""
    return list(stream_events(io.BytesIO(text.encode("utf-8")), strict=strict))


def write_events(events: Iterable[Event], path) -> int:
    """Write events as normalized NDJSON; ``.gz`` paths are gzip-compressed
    with a zeroed mtime so identical inputs produce identical bytes.  Returns
    the number of records written."""
    path = Path(path)
    count = 0
    with open(path, "wb") as raw:
        # fileobj keeps the filename out of the gzip header; mtime=0 drops the clock
        handle = (
            gzip.GzipFile(filename="", fileobj=raw, mode="wb", mtime=0)
            if path.suffix == ".gz"
            else raw
        )
        try:
            for event in events:
                handle.write(json.dumps(event_to_record(event)).encode("utf-8"))
                handle.write(b"\n")
                count += 1
        finally:
            if handle is not raw:
                handle.close()
    return count


def filter_active(events: Iterable[Event]) -> ActivitySummary:
    """Collect actors and repos with at least one push or pull request."""
    users: set[int] = set()
    repos: set[int] = set()
    for event in events:
        if event.event_type in CONTRIBUTION_TYPES:
            users.add(event.actor_id)
            repos.add(event.repo_id)
    return ActivitySummary(active_users=users, active_repos=repos)
