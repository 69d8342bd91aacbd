"""Single flat configuration shared by every pipeline stage.

The file is YAML (JSON works too). Relative paths are resolved against the
directory of the config file.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

import yaml

from .logmodel import DEFAULT_ADMIN_PATTERNS


@dataclass
class PipelineConfig:
    # paths
    log_file: Optional[str] = None
    log_format: str = "tsv"
    edge_list: Optional[str] = None
    node_table: Optional[str] = None
    output_dir: str = "out"
    # log filtering
    allowed_content_type_prefix: str = "text/html"
    required_response_code: int = 200
    bot_ua_substrings: list = field(default_factory=lambda: ["crawl", "slurp", "spider", "bot"])
    admin_path_patterns: list = field(default_factory=lambda: list(DEFAULT_ADMIN_PATTERNS))
    drop_self_referrer: bool = True
    # sessions
    delta: float = 1800.0
    midnight_cut: bool = True
    min_clicks_for_referrer_check: int = 4
    max_missing_referrer_fraction: float = 0.5
    # solver
    alpha: float = 0.85
    tolerance: float = 1e-12
    max_iterations: int = 10000
    backend: str = "auto"
    # crawl
    seed_url: Optional[str] = None
    site_dir: Optional[str] = None
    allowed_host: Optional[str] = None
    skip_query_params: list = field(default_factory=lambda: ["skin=raw"])
    skip_extensions: Optional[list] = None
    max_pages: int = 100000
    politeness_delay: float = 0.0
    max_concurrent_fetches: int = 1
    timeout: float = 10000.0
    # analysis
    sweep_alphas: list = field(default_factory=lambda: [0.0, 0.2, 0.4, 0.6, 0.85, 0.95])
    heatmap_bins: int = 50
    random_seed: int = 0
    threads: int = 1

    PATH_KEYS = ("log_file", "edge_list", "node_table", "output_dir", "site_dir")

    @classmethod
    def keys(cls):
        return [f.name for f in fields(cls)]

    @classmethod
    def load(cls, path=None, **overrides) -> "PipelineConfig":
        data = {}
        base = Path.cwd()
        if path is not None:
            path = Path(path)
            with open(path, encoding="utf-8") as fh:
                data = yaml.safe_load(fh) or {}
            if not isinstance(data, dict):
                raise ValueError(f"{path}: config must be a mapping")
            base = path.resolve().parent
            unknown = set(data) - set(cls.keys())
            if unknown:
                raise ValueError(f"{path}: unknown config keys {sorted(unknown)}")
            for k in cls.PATH_KEYS:
                if data.get(k) is not None:
                    data[k] = str(base / data[k])
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)

    @property
    def out(self) -> Path:
        return Path(self.output_dir)
