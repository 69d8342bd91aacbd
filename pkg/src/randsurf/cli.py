"""``randsurf`` command line: crawl, ingest, sessions, rank, compare, sweep.

Exit codes: 0 success, 1 usage error, 2 input error, 3 solver
non-convergence.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import crawler, graph as graphmod, logmodel, metrics, sessions, surfer
from .config import PipelineConfig

log = logging.getLogger("randsurf")

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3
PAIRS = (("uniform", "pragmatic"), ("uniform", "lateral"), ("pragmatic", "lateral"))


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _need(path, what) -> Path:
    if path is None:
        raise InputError(f"no {what} configured")
    p = Path(path)
    if not p.is_file():
        raise InputError(f"{what} not found: {p}")
    return p


def _load_graph(cfg):
    return graphmod.load_edge_list(_need(cfg.edge_list, "edge list"), cfg.node_table)


def _solver(cfg, alpha=None):
    return surfer.SolverConfig(cfg.alpha if alpha is None else alpha, cfg.tolerance, cfg.max_iterations)


# --- commands --------------------------------------------------------------


def cmd_crawl(cfg, args):
    if not cfg.seed_url:
        raise InputError("no seed_url configured")
    ccfg = crawler.CrawlConfig(
        seed_url=cfg.seed_url,
        allowed_host=cfg.allowed_host,
        skip_query_params=cfg.skip_query_params,
        skip_extensions=cfg.skip_extensions or list(crawler.DEFAULT_SKIP_EXTENSIONS),
        max_pages=cfg.max_pages,
        politeness_delay=cfg.politeness_delay,
        max_concurrent_fetches=max(cfg.max_concurrent_fetches, 1),
        timeout=cfg.timeout,
    )
    if cfg.site_dir:
        fetcher = crawler.DirectoryFetcher(cfg.site_dir)
    else:
        fetcher = crawler.HttpFetcher(cfg.timeout, cfg.politeness_delay)
    try:
        result = crawler.crawl(ccfg, fetcher)
    except crawler.CrawlError as exc:
        raise InputError(str(exc)) from exc
    out = cfg.out
    result.write(out / "edges.tsv", out / "nodes.tsv", out / "fetch_errors.tsv")
    log.info("crawled %d pages, %d edges, %d fetch errors", len(result.nodes), len(result.edges), len(result.errors))
    return EXIT_OK


def cmd_ingest(cfg, args):
    path = _need(cfg.log_file, "log file")
    rules = logmodel.FilterRules(
        cfg.allowed_content_type_prefix,
        cfg.required_response_code,
        list(cfg.bot_ua_substrings),
        list(cfg.admin_path_patterns),
        cfg.drop_self_referrer,
    )
    acct = logmodel.DropAccounting()
    out = cfg.out
    with open(path, encoding="utf-8") as src, open(out / "kept.tsv", "w", encoding="utf-8") as dst:
        for rec in logmodel.ingest_lines(src, rules, cfg.log_format, acct):
            dst.write(rec.to_tsv() + "\n")
    summary = acct.as_dict()
    (out / "drops.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    print(json.dumps(summary))
    return EXIT_OK


def cmd_sessions(cfg, args):
    records = logmodel.read_records(_need(cfg.out / "kept.tsv", "kept records (run ingest first)"))
    g = _load_graph(cfg)
    scfg = sessions.SessionConfig(
        cfg.delta, cfg.midnight_cut, cfg.min_clicks_for_referrer_check, cfg.max_missing_referrer_fraction
    )
    split = sessions.split_sessions(records, scfg)
    kept = sessions.filter_bot_sessions(split, scfg)
    tc = sessions.count_transitions(kept, g)
    views = sessions.count_pageviews(records)
    out = cfg.out
    sessions.write_sessions(out / "sessions.jsonl", kept)
    sessions.write_transitions(out / "transitions.tsv", tc)
    sessions.write_pageviews(out / "pageviews.tsv", views)
    summary = {
        "records": len(records),
        "sessions": len(split),
        "bot_sessions_removed": len(split) - len(kept),
        "transitions": tc.total(),
        "teleportations": tc.teleportations,
        "visited_pages": len(sessions.visited_pages(kept)),
    }
    (out / "sessions_summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    print(json.dumps(summary))
    return EXIT_OK


def _pragmatic_inputs(cfg, g):
    sess = sessions.read_sessions(_need(cfg.out / "sessions.jsonl", "sessions file (run sessions first)"))
    tc = sessions.read_transitions(_need(cfg.out / "transitions.tsv", "transitions file"))
    visits = graphmod.visit_vector(g, sessions.visited_pages(sess))
    return tc, visits


def _views(cfg):
    return sessions.read_pageviews(_need(cfg.out / "pageviews.tsv", "page views file"))


def build_model(cfg, model, alpha=None):
    if model == "lateral":
        views = _views(cfg)
        g = _load_graph(cfg) if cfg.edge_list else None
        return surfer.lateral_distribution(views, g)
    g = _load_graph(cfg)
    scfg = _solver(cfg, alpha)
    if model == "uniform":
        return surfer.uniform_distribution(g, scfg, backend=cfg.backend)
    tc, visits = _pragmatic_inputs(cfg, g)
    return surfer.pragmatic_distribution(g, tc, visits, scfg, backend=cfg.backend)


def cmd_rank(cfg, args):
    dist = build_model(cfg, args.model)
    dist.to_csv(cfg.out / f"dist_{args.model}.csv")
    if dist.iterations is not None:
        print(f"{args.model}: {len(dist)} pages, {dist.iterations} iterations, residual {dist.residual:.3e}")
    else:
        print(f"{args.model}: {len(dist)} pages")
    return EXIT_OK


def cmd_compare(cfg, args):
    dists = []
    for model in surfer.MODELS:
        path = cfg.out / f"dist_{model}.csv"
        if not path.is_file():
            raise InputError(f"missing distribution file: {path}")
        dists.append(surfer.StationaryDistribution.from_csv(path, model=model))
    report = metrics.compare(dists, cfg.heatmap_bins)
    out = cfg.out
    for model, pts in report.lorenz.items():
        metrics.write_lorenz_csv(out / f"lorenz_{model}.csv", pts)
    for p in report.pairs:
        metrics.write_ratios_csv(out / f"ratios_{p.model_a}_{p.model_b}.csv", p.ratios)
        metrics.write_heatmap_csv(out / f"heatmap_{p.model_a}_{p.model_b}.csv", p.heatmap)
    doc = report.as_json()
    (out / "report.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    print(json.dumps(doc))
    return EXIT_OK


def cmd_sweep(cfg, args):
    g = _load_graph(cfg)
    tc, visits = _pragmatic_inputs(cfg, g)
    rows = metrics.damping_sweep(g, tc, visits, _views(cfg), cfg.sweep_alphas, _solver(cfg), backend=cfg.backend)
    metrics.write_sweep_csv(cfg.out / "sweep.csv", rows)
    for r in rows:
        if not r.ok:
            log.warning("alpha=%s failed: %s", r.alpha, r.error)
    if not any(r.ok for r in rows):
        log.error("every sweep row failed")
        return EXIT_SOLVER
    return EXIT_OK


COMMANDS = {
    "crawl": cmd_crawl,
    "ingest": cmd_ingest,
    "sessions": cmd_sessions,
    "rank": cmd_rank,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
}


def _float_list(text):
    return [float(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="YAML/JSON config file")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    common.add_argument("--output", default=argparse.SUPPRESS, help="output directory")
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    p = _Parser(prog="randsurf", parents=[common], description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    c = sub.add_parser("crawl", parents=[common])
    c.add_argument("--seed-url")
    c.add_argument("--site-dir", help="serve the site from a local directory instead of HTTP")
    c.add_argument("--allowed-host")
    c.add_argument("--max-pages", type=int)
    c.add_argument("--politeness-delay", type=float, help="milliseconds")
    c.add_argument("--max-concurrent-fetches", type=int)
    c.add_argument("--timeout", type=float, help="milliseconds")

    i = sub.add_parser("ingest", parents=[common])
    i.add_argument("--log-file")
    i.add_argument("--log-format", choices=["tsv", "jsonl"])

    s = sub.add_parser("sessions", parents=[common])
    s.add_argument("--edge-list")
    s.add_argument("--delta", type=float)

    r = sub.add_parser("rank", parents=[common])
    r.add_argument("--model", required=True, choices=surfer.MODELS)
    r.add_argument("--edge-list")
    r.add_argument("--alpha", type=float)
    r.add_argument("--backend", choices=["auto", "numba", "numpy"])

    sub.add_parser("compare", parents=[common]).add_argument("--heatmap-bins", type=int)

    w = sub.add_parser("sweep", parents=[common])
    w.add_argument("--edge-list")
    w.add_argument("--alphas", type=_float_list, dest="sweep_alphas", help="comma separated")
    w.add_argument("--backend", choices=["auto", "numba", "numpy"])
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if getattr(args, "verbose", False) else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    overrides = {
        k: v for k, v in vars(args).items()
        if k in PipelineConfig.keys() and k not in ("threads",)
    }
    if getattr(args, "output", None) is not None:
        overrides["output_dir"] = args.output
    if getattr(args, "threads", None) is not None:
        overrides["threads"] = args.threads
    try:
        cfg = PipelineConfig.load(getattr(args, "config", None), **overrides)
        if cfg.threads > 1 and args.cmd == "crawl" and cfg.max_concurrent_fetches == 1:
            cfg.max_concurrent_fetches = cfg.threads
        cfg.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.cmd](cfg, args)
    except surfer.ConvergenceError as exc:
        print(f"randsurf: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (InputError, OSError, ValueError, logmodel.LogParseError, surfer.SolverError, metrics.MetricError) as exc:
        print(f"randsurf: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
