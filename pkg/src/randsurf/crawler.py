"""Breadth-first crawl of one site's internal link structure."""

from __future__ import annotations

import logging
import threading
import time
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from html.parser import HTMLParser
from pathlib import Path
from typing import Callable, Optional
from urllib.parse import parse_qsl, unquote, urljoin, urlsplit

from .logmodel import normalize_url

log = logging.getLogger(__name__)

DEFAULT_SKIP_EXTENSIONS = [".mp3", ".mp4", ".jpg", ".jpeg", ".png", ".gif", ".pdf", ".zip"]


class FetchError(Exception):
    pass


class CrawlError(RuntimeError):
    pass


@dataclass
class CrawlConfig:
    seed_url: str
    allowed_host: Optional[str] = None
    skip_query_params: list = field(default_factory=lambda: ["skin=raw"])
    skip_extensions: list = field(default_factory=lambda: list(DEFAULT_SKIP_EXTENSIONS))
    max_pages: int = 100000
    politeness_delay: float = 0.0  # milliseconds
    max_concurrent_fetches: int = 1
    timeout: float = 10000.0  # milliseconds
    retries: int = 1

    def __post_init__(self):
        self.seed_url = normalize_url(self.seed_url)
        if self.allowed_host is None:
            self.allowed_host = urlsplit(self.seed_url).hostname or ""
        self.allowed_host = self.allowed_host.lower().removeprefix("www.")
        if self.max_pages <= 0:
            raise ValueError("max_pages must be positive")
        if self.politeness_delay < 0:
            raise ValueError("politeness_delay must be >= 0")
        if self.max_concurrent_fetches < 1:
            raise ValueError("max_concurrent_fetches must be >= 1")


@dataclass
class CrawlResult:
    nodes: list
    edges: list
    errors: list  # (url, message)

    def write(self, edges_path, nodes_path, errors_path=None) -> None:
        with open(edges_path, "w", encoding="utf-8") as fh:
            for s, t in self.edges:
                fh.write(f"{s}\t{t}\n")
        with open(nodes_path, "w", encoding="utf-8") as fh:
            for i, u in enumerate(self.nodes):
                fh.write(f"{i}\t{u}\n")
        if errors_path is not None:
            with open(errors_path, "w", encoding="utf-8") as fh:
                for u, msg in self.errors:
                    fh.write(f"{u}\t{msg}\n")


class _AnchorParser(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.hrefs = []
        self.base = None

    def handle_starttag(self, tag, attrs):
        if tag == "a":
            for k, v in attrs:
                if k == "href" and v:
                    self.hrefs.append(v.strip())
        elif tag == "base" and self.base is None:
            for k, v in attrs:
                if k == "href" and v:
                    self.base = v.strip()


def extract_links(html: str, base_url: str) -> list:
    """Absolute, normalised http(s) link targets in document order, deduplicated."""
    p = _AnchorParser()
    try:
        p.feed(html)
        p.close()
    except Exception:  # html.parser is lenient; keep whatever was collected
        log.debug("html parse aborted for %s", base_url)
    base = urljoin(base_url, p.base) if p.base else base_url
    seen = set()
    out = []
    for href in p.hrefs:
        try:
            absolute = urljoin(base, href)
            if urlsplit(absolute).scheme not in ("http", "https"):
                continue
            url = normalize_url(absolute)
        except ValueError:
            continue
        if url not in seen:
            seen.add(url)
            out.append(url)
    return out


def is_skipped(url: str, config: CrawlConfig) -> bool:
    parts = urlsplit(url)
    if parts.query:
        pairs = {f"{k}={v}" for k, v in parse_qsl(parts.query, keep_blank_values=True)}
        if any(m in pairs for m in config.skip_query_params):
            return True
    path = unquote(parts.path).lower()
    return any(path.endswith(ext.lower()) for ext in config.skip_extensions)


def is_internal(url: str, config: CrawlConfig) -> bool:
    host = (urlsplit(url).hostname or "").removeprefix("www.")
    return host == config.allowed_host


class HttpFetcher:
    """Plain GET over HTTP(S) with a minimum delay between request starts."""

    user_agent = "randsurf-crawler/0.1"

    def __init__(self, timeout_ms: float = 10000.0, delay_ms: float = 0.0):
        self.timeout = timeout_ms / 1000.0
        self.delay = delay_ms / 1000.0
        self._lock = threading.Lock()
        self._next = 0.0

    def _wait(self):
        with self._lock:
            now = time.monotonic()
            start = max(now, self._next)
            self._next = start + self.delay
        if start > now:
            time.sleep(start - now)

    def __call__(self, url: str) -> str:
        self._wait()
        req = urllib.request.Request(url, headers={"User-Agent": self.user_agent})
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                ctype = resp.headers.get_content_type()
                if ctype != "text/html":
                    raise FetchError(f"not html: {ctype}")
                charset = resp.headers.get_content_charset() or "utf-8"
                return resp.read().decode(charset, errors="replace")
        except (urllib.error.URLError, OSError) as exc:
            raise FetchError(str(exc)) from exc


class DirectoryFetcher:
    """Serve a site from a local directory: ``/a/b`` maps to ``a/b.html``,
    ``a/b/index.html`` or ``a/b``; the query string is ignored."""

    def __init__(self, root):
        self.root = Path(root)

    def __call__(self, url: str) -> str:
        path = unquote(urlsplit(url).path).strip("/")
        candidates = [self.root / "index.html"] if not path else [
            self.root / f"{path}.html",
            self.root / path / "index.html",
            self.root / path,
        ]
        for c in candidates:
            if c.is_file():
                return c.read_text(encoding="utf-8")
        raise FetchError("not found")


def _fetch_with_retry(fetcher: Callable, url: str, retries: int):
    last = None
    for _ in range(retries + 1):
        try:
            return fetcher(url), None
        except Exception as exc:  # fetchers may raise anything; record and move on
            last = f"{type(exc).__name__}: {exc}"
    return None, last


def crawl(config: CrawlConfig, fetcher: Callable[[str], str]) -> CrawlResult:
    """BFS from the seed, level by level.

    Nodes are the successfully fetched pages in fetch order; edges are the
    kept links between fetched pages. Concurrent fetching stays inside one
    frontier level and results are processed in frontier order.
    """
    seed = config.seed_url
    fetched: list = []
    fetched_set: set = set()
    links: dict = {}
    errors: list = []
    seen = {seed}
    level = [seed]
    pool = ThreadPoolExecutor(config.max_concurrent_fetches) if config.max_concurrent_fetches > 1 else None
    try:
        while level and len(fetched) < config.max_pages:
            next_level = []
            pos = 0
            while pos < len(level) and len(fetched) < config.max_pages:
                width = min(config.max_concurrent_fetches, config.max_pages - len(fetched))
                batch = level[pos : pos + width]
                pos += len(batch)
                if pool is None:
                    results = [_fetch_with_retry(fetcher, u, config.retries) for u in batch]
                else:
                    results = list(pool.map(lambda u: _fetch_with_retry(fetcher, u, config.retries), batch))
                for url, (body, err) in zip(batch, results):
                    if err is not None:
                        if url == seed:
                            raise CrawlError(f"seed {seed} could not be fetched: {err}")
                        errors.append((url, err))
                        continue
                    fetched.append(url)
                    fetched_set.add(url)
                    targets = []
                    for t in extract_links(body, url):
                        if not is_internal(t, config) or is_skipped(t, config):
                            continue
                        targets.append(t)
                        if t not in seen:
                            seen.add(t)
                            next_level.append(t)
                    links[url] = targets
            level = next_level
    finally:
        if pool is not None:
            pool.shutdown()

    edges = [(s, t) for s in fetched for t in links[s] if t in fetched_set]
    return CrawlResult(fetched, edges, errors)
