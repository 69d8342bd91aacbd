"""Sessionisation, session-level bot heuristics and click/view counting."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, NamedTuple, Optional


class Visit(NamedTuple):
    timestamp: float
    page: str
    referrer: Optional[str]


@dataclass
class Session:
    session_key: str
    visits: list = field(default_factory=list)

    def __len__(self):
        return len(self.visits)

    @property
    def pages(self):
        return [v.page for v in self.visits]

    def missing_referrer_fraction(self) -> float:
        if not self.visits:
            return 0.0
        return sum(v.referrer is None for v in self.visits) / len(self.visits)

    def to_json(self) -> str:
        return json.dumps(
            {"session_key": self.session_key, "visits": [list(v) for v in self.visits]},
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, line: str) -> "Session":
        obj = json.loads(line)
        return cls(obj["session_key"], [Visit(float(t), p, r) for t, p, r in obj["visits"]])


@dataclass
class SessionConfig:
    delta: float = 1800.0
    midnight_cut: bool = True
    min_clicks_for_referrer_check: int = 4
    max_missing_referrer_fraction: float = 0.5

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if not 0.0 <= self.max_missing_referrer_fraction <= 1.0:
            raise ValueError("max_missing_referrer_fraction must lie in [0, 1]")


@dataclass
class TransitionCounts:
    """Link-following click counts keyed by ``(from_url, to_url)``."""

    counts: Counter = field(default_factory=Counter)
    teleportations: int = 0

    def __getitem__(self, key):
        return self.counts[key]

    def __len__(self):
        return len(self.counts)

    def total(self) -> int:
        return sum(self.counts.values())

    def items(self):
        return self.counts.items()


def _utc_day(ts: float):
    return datetime.fromtimestamp(ts, tz=timezone.utc).date()


def split_sessions(records: Iterable, config: SessionConfig = None) -> list:
    """Split each session key's request stream on gaps > delta and at UTC midnight.

    Records are grouped by ``session_key`` in first-seen order and stably
    sorted by timestamp inside each group.
    """
    config = config or SessionConfig()
    groups: dict = {}
    for rec in records:
        groups.setdefault(rec.session_key, []).append(rec)

    out = []
    for key, recs in groups.items():
        recs.sort(key=lambda r: r.timestamp)
        current = None
        prev_ts = None
        for rec in recs:
            split = current is None or rec.timestamp - prev_ts > config.delta
            if not split and config.midnight_cut:
                split = _utc_day(rec.timestamp) != _utc_day(prev_ts)
            if split:
                current = Session(key)
                out.append(current)
            current.visits.append(Visit(rec.timestamp, rec.target, rec.referrer))
            prev_ts = rec.timestamp
    return out


def is_bot_session(session: Session, config: SessionConfig) -> bool:
    return (
        len(session) >= config.min_clicks_for_referrer_check
        and session.missing_referrer_fraction() > config.max_missing_referrer_fraction
    )


def filter_bot_sessions(sessions: Iterable, config: SessionConfig = None) -> list:
    config = config or SessionConfig()
    return [s for s in sessions if not is_bot_session(s, config)]


def count_transitions(sessions: Iterable, graph) -> TransitionCounts:
    """Count consecutive page pairs that follow an existing link in ``graph``.

    Every other pair (including pages missing from the graph) is tallied as
    a teleportation.
    """
    tc = TransitionCounts()
    for s in sessions:
        pages = s.pages
        for a, b in zip(pages, pages[1:]):
            if graph.has_edge_url(a, b):
                tc.counts[(a, b)] += 1
            else:
                tc.teleportations += 1
    return tc


def count_pageviews(records: Iterable) -> Counter:
    return Counter(r.target for r in records)


def visited_pages(sessions: Iterable) -> set:
    return {v.page for s in sessions for v in s.visits}


# --- file formats ----------------------------------------------------------


def write_sessions(path, sessions) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in sessions:
            fh.write(s.to_json() + "\n")


def read_sessions(path) -> list:
    with open(path, encoding="utf-8") as fh:
        return [Session.from_json(line) for line in fh if line.strip()]


def write_transitions(path, tc: TransitionCounts) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for (a, b), c in tc.counts.items():
            fh.write(f"{a}\t{b}\t{c}\n")


def read_transitions(path) -> TransitionCounts:
    tc = TransitionCounts()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            cols = line.rstrip("\r\n").split("\t")
            if len(cols) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 columns")
            tc.counts[(cols[0], cols[1])] += int(cols[2])
    return tc


def write_pageviews(path, views) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for url, c in views.items():
            fh.write(f"{url}\t{c}\n")


def read_pageviews(path) -> Counter:
    views = Counter()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            cols = line.rstrip("\r\n").split("\t")
            if len(cols) != 2:
                raise ValueError(f"{path}:{lineno}: expected 2 columns")
            views[cols[0]] += int(cols[1])
    return views
