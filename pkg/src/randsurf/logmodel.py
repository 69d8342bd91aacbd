"""Access-log parsing, URL normalisation and record-level filtering."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Iterable, Iterator, Optional
from urllib.parse import urlsplit

FIELDS = (
    "remote_ip",
    "session_key",
    "timestamp",
    "method",
    "target",
    "response_code",
    "content_type",
    "referrer",
    "user_agent",
)

DROP_REASONS = (
    "parse_error",
    "wrong_content_type",
    "bad_response_code",
    "admin_path",
    "bot_user_agent",
    "self_referrer",
)

# Approximate: edit previews, attachment uploads and RSS feeds of a wiki
# engine. Matched case-insensitively as substrings of target and referrer.
DEFAULT_ADMIN_PATTERNS = (
    "action=preview",
    "action=edit",
    "action=upload",
    "edit.jsp",
    "preview.jsp",
    "upload.jsp",
    "attach.jsp",
    "rss.jsp",
    "/rss",
    "feed=rss",
)


class LogParseError(ValueError):
    def __init__(self, message, line_number=None):
        self.line_number = line_number
        where = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{where}{message}")


@dataclass(frozen=True)
class LogRecord:
    remote_ip: str
    session_key: str
    timestamp: float
    method: str
    target: str
    response_code: int
    content_type: str
    referrer: Optional[str]
    user_agent: str

    def to_tsv(self) -> str:
        cols = [
            self.remote_ip,
            self.session_key,
            format_timestamp(self.timestamp),
            self.method,
            self.target,
            str(self.response_code),
            self.content_type,
            self.referrer or "-",
            self.user_agent,
        ]
        return "\t".join(cols)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=False)


@dataclass
class FilterRules:
    allowed_content_type_prefix: str = "text/html"
    required_response_code: int = 200
    bot_ua_substrings: list = field(default_factory=lambda: ["crawl", "slurp", "spider", "bot"])
    admin_path_patterns: list = field(default_factory=lambda: list(DEFAULT_ADMIN_PATTERNS))
    drop_self_referrer: bool = True
    filter_bots: bool = True

    def __post_init__(self):
        if self.filter_bots and not self.bot_ua_substrings:
            raise ValueError("bot_ua_substrings must be non-empty when bot filtering is enabled")
        self.bot_ua_substrings = [s.lower() for s in self.bot_ua_substrings]
        self.admin_path_patterns = [s.lower() for s in self.admin_path_patterns]


@dataclass
class DropAccounting:
    total: int = 0
    kept: int = 0
    dropped: Counter = field(default_factory=Counter)

    def record(self, reason: Optional[str]) -> None:
        self.total += 1
        if reason is None:
            self.kept += 1
        else:
            self.dropped[reason] += 1

    def merge(self, other: "DropAccounting") -> "DropAccounting":
        out = DropAccounting(self.total + other.total, self.kept + other.kept)
        out.dropped = self.dropped + other.dropped
        return out

    def reconciles(self) -> bool:
        return self.kept + sum(self.dropped.values()) == self.total

    def as_dict(self) -> dict:
        return {
            "total": self.total,
            "kept": self.kept,
            "dropped": {r: self.dropped.get(r, 0) for r in DROP_REASONS},
        }


def format_timestamp(ts: float) -> str:
    return str(int(ts)) if float(ts).is_integer() else repr(float(ts))


def normalize_url(url: str) -> str:
    """Canonical page URL: lowercase scheme/host, no ``www.``, no fragment,
    no trailing slash. The query is kept as is.

    A site root ``http://host/`` becomes ``http://host``; a bare relative
    ``/`` stays ``/``.
    """
    if url is None or not url.strip():
        raise ValueError("cannot normalize an empty URL")
    url = url.strip()
    parts = urlsplit(url)
    scheme = parts.scheme.lower()
    netloc = parts.netloc.lower()
    if netloc.startswith("www."):
        netloc = netloc[4:]
    path = parts.path.rstrip("/")
    if not path and not netloc and parts.path:
        path = "/"
    head = path
    if scheme or netloc:
        head = (f"{scheme}:" if scheme else "") + f"//{netloc}{path}"
    query = parts.query
    # urlsplit drops a bare "?"; keep it when there was one
    if query or ("?" in url.split("#", 1)[0]):
        head += "?" + query
    return head


def _parse_timestamp(value: str) -> float:
    ts = float(value)
    if not math.isfinite(ts) or ts < 0:
        raise ValueError(f"bad timestamp {value!r}")
    return ts


def _from_fields(values: dict, line_number=None) -> LogRecord:
    try:
        ts = _parse_timestamp(str(values["timestamp"]))
    except (ValueError, TypeError) as exc:
        raise LogParseError(f"unparseable timestamp {values.get('timestamp')!r}", line_number) from exc
    try:
        code = int(values["response_code"])
    except (ValueError, TypeError) as exc:
        raise LogParseError(f"unparseable response code {values.get('response_code')!r}", line_number) from exc
    try:
        target = normalize_url(values["target"])
    except ValueError as exc:
        raise LogParseError("empty target", line_number) from exc
    ref = values.get("referrer")
    ref = None if ref in (None, "", "-") else normalize_url(ref)
    method = str(values["method"]).upper()
    return LogRecord(
        remote_ip=str(values["remote_ip"]),
        session_key=str(values["session_key"]),
        timestamp=ts,
        method=method,
        target=target,
        response_code=code,
        content_type=str(values["content_type"]),
        referrer=ref,
        user_agent=str(values["user_agent"]),
    )


def parse_log_line(line: str, fmt: str = "tsv", line_number: Optional[int] = None) -> LogRecord:
    """Parse one line of the canonical 9-column TSV (or its JSON-lines twin)."""
    line = line.rstrip("\r\n")
    if fmt == "tsv":
        cols = line.split("\t")
        if len(cols) != len(FIELDS):
            raise LogParseError(f"expected {len(FIELDS)} columns, got {len(cols)}", line_number)
        return _from_fields(dict(zip(FIELDS, cols)), line_number)
    if fmt == "jsonl":
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise LogParseError(f"invalid JSON: {exc.msg}", line_number) from exc
        if not isinstance(obj, dict) or any(k not in obj for k in FIELDS if k != "referrer"):
            raise LogParseError("missing fields", line_number)
        return _from_fields(obj, line_number)
    raise ValueError(f"unknown log format {fmt!r}")


def filter_record(record: LogRecord, rules: FilterRules) -> Optional[str]:
    """Return the drop reason for ``record``, or None to keep it."""
    if not record.content_type.lower().startswith(rules.allowed_content_type_prefix.lower()):
        return "wrong_content_type"
    if record.response_code != rules.required_response_code:
        return "bad_response_code"
    target = record.target.lower()
    ref = (record.referrer or "").lower()
    for pat in rules.admin_path_patterns:
        if pat in target or (ref and pat in ref):
            return "admin_path"
    if rules.filter_bots:
        ua = record.user_agent.lower()
        if any(s in ua for s in rules.bot_ua_substrings):
            return "bot_user_agent"
    if rules.drop_self_referrer and record.referrer is not None and record.referrer == record.target:
        return "self_referrer"
    return None


def ingest_lines(
    lines: Iterable[str], rules: FilterRules, fmt: str = "tsv", accounting: Optional[DropAccounting] = None
) -> Iterator[LogRecord]:
    """Yield kept records; every line is tallied in ``accounting``.

    Blank lines are skipped without being counted.
    """
    acct = accounting if accounting is not None else DropAccounting()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = parse_log_line(line, fmt, lineno)
        except LogParseError:
            acct.record("parse_error")
            continue
        reason = filter_record(rec, rules)
        acct.record(reason)
        if reason is None:
            yield rec


def read_records(path, fmt: str = "tsv") -> list:
    """Read an already-clean record file (no filtering, parse errors raise)."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.strip():
                out.append(parse_log_line(line, fmt, lineno))
    return out
