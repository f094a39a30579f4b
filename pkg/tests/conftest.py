from __future__ import annotations

from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest

from teammotif.events import Event, EventType

DATA_DIR = Path(__file__).resolve().parents[1] / "data"

_T0 = datetime(2019, 6, 1, tzinfo=timezone.utc)


def make_event(
    event_type: EventType | str = EventType.PUSH,
    actor_id: int = 1,
    actor_login: str = "alice",
    repo_id: int = 9,
    minutes: int = 0,
    org: bool = False,
    comment: str | None = None,
) -> Event:
    """Shorthand event for fixtures; timestamps advance by ``minutes``."""
    if isinstance(event_type, str):
        event_type = EventType(event_type)
    return Event(
        event_type=event_type,
        actor_id=actor_id,
        actor_login=actor_login,
        repo_id=repo_id,
        created_at=_T0 + timedelta(minutes=minutes),
        org_owned_actor=org,
        comment_body=comment,
    )


@pytest.fixture
def sample_dir() -> Path:
    path = DATA_DIR / "sample"
    if not path.exists():
        pytest.skip("bundled sample corpus not present")
    return path


@pytest.fixture
def micro_dir() -> Path:
    path = DATA_DIR / "micro"
    if not path.exists():
        pytest.skip("bundled micro corpora not present")
    return path
