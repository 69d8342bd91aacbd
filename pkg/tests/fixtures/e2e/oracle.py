"""Brute-force reference for the e2e fixture.

Deliberately shares no code with ``randsurf``: its own parsing, filtering,
sessionisation, dense linear solves, Lorenz-area Gini and numpy Pearson.

    python oracle.py            # print expected values as JSON
    python oracle.py --write    # refresh expected.json
"""

import json
import math
import sys
import time
from pathlib import Path

import numpy as np

HERE = Path(__file__).resolve().parent
ALPHA = 0.85
SWEEP = [0.0, 0.2, 0.85]


def norm(u):
    u = u.split("#")[0]
    scheme, rest = u.split("://", 1)
    host, _, path = rest.partition("/")
    host = host.lower()
    if host.startswith("www."):
        host = host[4:]
    path = "/" + path if path or rest.endswith("/") else ""
    q = ""
    if "?" in path:
        path, q = path.split("?", 1)
        q = "?" + q
    while path.endswith("/"):
        path = path[:-1]
    return scheme.lower() + "://" + host + path + q


def load_records():
    drops = dict.fromkeys(
        ["parse_error", "wrong_content_type", "bad_response_code", "admin_path", "bot_user_agent", "self_referrer"], 0
    )
    kept = []
    for line in (HERE / "access.log").read_text().splitlines():
        c = line.split("\t")
        if len(c) != 9 or not c[2].isdigit():
            drops["parse_error"] += 1
            continue
        ip, key, ts, method, target, code, ctype, ref, ua = c
        target = norm(target)
        ref = None if ref == "-" else norm(ref)
        if not ctype.startswith("text/html"):
            drops["wrong_content_type"] += 1
        elif code != "200":
            drops["bad_response_code"] += 1
        elif "edit.jsp" in target.lower() or "rss" in target.lower():
            drops["admin_path"] += 1
        elif any(s in ua.lower() for s in ("crawl", "slurp", "spider", "bot")):
            drops["bot_user_agent"] += 1
        elif ref == target:
            drops["self_referrer"] += 1
        else:
            kept.append((key, int(ts), target, ref))
    return kept, drops


def sessionize(kept):
    by_key = {}
    for rec in kept:
        by_key.setdefault(rec[0], []).append(rec)
    out = []
    for key in by_key:
        recs = sorted(by_key[key], key=lambda r: r[1])
        cur = [recs[0]]
        for prev, r in zip(recs, recs[1:]):
            same_day = time.gmtime(prev[1])[:3] == time.gmtime(r[1])[:3]
            if r[1] - prev[1] > 1800 or not same_day:
                out.append(cur)
                cur = []
            cur.append(r)
        out.append(cur)
    good = []
    for s in out:
        missing = sum(r[3] is None for r in s)
        if len(s) >= 4 and 2 * missing > len(s):
            continue
        good.append(s)
    return out, good


def load_graph():
    urls, edges = [], []
    for line in (HERE / "edges.tsv").read_text().splitlines():
        a, b = line.split("\t")
        for u in (a, b):
            if u not in urls:
                urls.append(u)
        if (a, b) not in edges:
            edges.append((a, b))
    return urls, edges


def solve(urls, weights, alpha):
    """pi = D (D - alpha A)^-1 1 by Gaussian elimination via numpy.linalg.solve."""
    n = len(urls)
    idx = {u: i for i, u in enumerate(urls)}
    A = np.zeros((n, n))
    for (a, b), w in weights.items():
        A[idx[b], idx[a]] = w
    k = A.sum(axis=0)
    D = np.diag([x if x > 0 else 1.0 for x in k])
    pi = D @ np.linalg.solve(D - alpha * A, np.ones(n))
    return dict(zip(urls, (pi / pi.sum()).tolist()))


def gini_lorenz(values):
    x = sorted(values)
    n, s = len(x), sum(x)
    area, cum_prev = 0.0, 0.0
    for v in x:
        cum = cum_prev + v / s
        area += (cum_prev + cum) / (2 * n)
        cum_prev = cum
    return 1.0 - 2.0 * area


def rho(p, q):
    common = [u for u in p if u in q and p[u] > 0 and q[u] > 0]
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.corrcoef([p[u] for u in common], [q[u] for u in common])[0, 1]
    return float(r), len(common)


def compute():
    kept, drops = load_records()
    all_sessions, sessions = sessionize(kept)
    urls, edges = load_graph()
    edge_set = set(edges)

    t = {}
    tele = 0
    for s in sessions:
        for a, b in zip(s, s[1:]):
            if (a[2], b[2]) in edge_set:
                t[(a[2], b[2])] = t.get((a[2], b[2]), 0) + 1
            else:
                tele += 1
    visited = {r[2] for s in sessions for r in s}
    views = {}
    for r in kept:
        views[r[2]] = views.get(r[2], 0) + 1

    def models(alpha):
        uni = solve(urls, {e: 1.0 for e in edges}, alpha)
        sub_w = {}
        for a, b in edges:
            if a in visited and b in visited:
                c = t.get((a, b), 0)
                sub_w[(a, b)] = 1.0 + (1.0 + math.log(c) if c > 0 else 0.0)
        sub_urls = [u for u in urls if any(u in e for e in sub_w)]
        prag = solve(sub_urls, sub_w, alpha)
        return uni, prag

    total = sum(views.values())
    lat = {u: c / total for u, c in views.items()}
    uni, prag = models(ALPHA)
    dists = {"uniform": uni, "pragmatic": prag, "lateral": lat}
    pairs = {}
    for a, b in (("uniform", "pragmatic"), ("uniform", "lateral"), ("pragmatic", "lateral")):
        r, size = rho(dists[a], dists[b])
        pairs[f"{a}_{b}"] = {"pearson": r, "common_support_size": size}
    sweep = []
    for alpha in SWEEP:
        u, p = models(alpha)
        sweep.append({
            "alpha": alpha,
            "rho_uniform_pragmatic": rho(u, p)[0],
            "rho_uniform_lateral": rho(u, lat)[0],
            "rho_pragmatic_lateral": rho(p, lat)[0],
            "gini_uniform": gini_lorenz(u.values()),
            "gini_pragmatic": gini_lorenz(p.values()),
            "gini_lateral": gini_lorenz(lat.values()),
        })
    return {
        "drops": drops,
        "kept": len(kept),
        "sessions_before_bot_filter": len(all_sessions),
        "sessions": len(sessions),
        "transitions": {f"{a}\t{b}": c for (a, b), c in t.items()},
        "teleportations": tele,
        "pageviews": views,
        "distributions": dists,
        "gini": {m: gini_lorenz(d.values()) for m, d in dists.items()},
        "pairs": pairs,
        "sweep": sweep,
    }


if __name__ == "__main__":
    result = compute()
    text = json.dumps(result, indent=2, sort_keys=True)
    if "--write" in sys.argv:
        (HERE / "expected.json").write_text(text + "\n")
    else:
        print(text)
