"""Report bundle: the plot-ready CSV/JSON files a run emits.

Every artifact is recomputable from the corpus cache, the edge lists,
and the confidence table; the bundle manifest records a sha256 for each
file plus the digest of the run configuration. Output is byte-identical
for identical inputs and seed, at any thread count.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from coordnet import graph as graphmod
from coordnet import sociolinguistics as sl
from coordnet import stats
from coordnet.corpus import (
    DEFAULT_NORMALIZE,
    Corpus,
    NormalizeOptions,
    day_of_timestamp,
    daily_volume,
)
from coordnet.detectors import CoordinationEdge
from coordnet.formats import fmt
from coordnet.graph import CoordinationGraph
from coordnet.manifest import RunManifest

BASELINE_SCOPE = "non_coordinated"
ALL_COORDINATED_SCOPE = "all_coordinated"


def _write_csv(path: Path, header, rows) -> int:
    with open(path, "w", encoding="utf-8", newline="") as fp:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(header)
        count = 0
        for row in rows:
            writer.writerow([fmt(v) for v in row])
            count += 1
    return count


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fp:
        json.dump(payload, fp, sort_keys=True, indent=2)
        fp.write("\n")


def write_daily_volume(corpus: Corpus, path: Path) -> int:
    rows = (
        (day, counts["original"], counts["reply"], counts["retweet"])
        for day, counts in daily_volume(corpus)
    )
    return _write_csv(path, ("day", "original", "reply", "retweet"), rows)


def write_activity_shares(corpus: Corpus, coordinated: set[str], path: Path) -> int:
    rows = (
        (day, shares["original"], shares["reply"], shares["retweet"])
        for day, shares in graphmod.activity_shares(corpus, coordinated)
    )
    return _write_csv(path, ("day", "original", "reply", "retweet"), rows)


def write_duplicate_shares(
    corpus: Corpus, path: Path, options: NormalizeOptions, scope: str
) -> dict[str, tuple[float | None, int]]:
    shares = graphmod.duplicate_shares(corpus, None, options, scope)
    _write_csv(
        path,
        ("account_id", "share", "n_originals"),
        ((acct, share, n) for acct, (share, n) in shares.items()),
    )
    return shares


def write_clusters(clusters, path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fp:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(("cluster_id", "size", "label", "member_ids"))
        for c in clusters:
            writer.writerow([c.id, c.size, c.label] + sorted(c.members))


def correlation_matrices(table: sl.CharacteristicTable):
    """Spearman rho and p for every characteristic pair over per-tweet
    confidences; None where undefined (constant column or < 3 rows).

    Columns are ranked once and correlated as a matrix product, which is
    the same rank-Pearson definition stats.spearman uses pairwise.
    """
    from scipy.special import stdtr

    n = sl.N_CHARACTERISTICS
    rho = [[None] * n for _ in range(n)]
    pval = [[None] * n for _ in range(n)]
    for i in range(n):
        rho[i][i] = 1.0
        pval[i][i] = 0.0
    m = len(table)
    if m < 3:
        return rho, pval
    ranks = np.column_stack(
        [stats.rankdata(table.matrix[:, j].tolist()) for j in range(n)]
    )
    centered = ranks - ranks.mean(axis=0)
    sq = (centered**2).sum(axis=0)
    cov = centered.T @ centered
    for i in range(n):
        for j in range(i + 1, n):
            if sq[i] == 0.0 or sq[j] == 0.0:
                continue
            r = max(-1.0, min(1.0, cov[i, j] / math.sqrt(sq[i] * sq[j])))
            if abs(r) >= 1.0:
                p = 0.0
            else:
                t = r * math.sqrt((m - 2) / (1.0 - r * r))
                p = min(1.0, 2.0 * float(stdtr(m - 2, -abs(t))))
            rho[i][j] = rho[j][i] = r
            pval[i][j] = pval[j][i] = p
    return rho, pval


def write_matrix(matrix, path: Path) -> None:
    header = ("characteristic",) + sl.CHARACTERISTICS
    rows = (
        (sl.CHARACTERISTICS[i],) + tuple(matrix[i]) for i in range(sl.N_CHARACTERISTICS)
    )
    _write_csv(path, header, rows)


def _tweet_ids_of(corpus: Corpus, accounts: set[str], member: bool) -> list[str]:
    seen = set()
    out = []
    for rec in corpus.records:
        if (rec.account_id in accounts) is member and rec.tweet_id not in seen:
            seen.add(rec.tweet_id)
            out.append(rec.tweet_id)
    return out


def write_cluster_deltas(
    corpus: Corpus,
    table: sl.CharacteristicTable,
    clusters,
    coordinated: set[str],
    path: Path,
    bootstrap_b: int,
    seed: int,
    top_clusters: int,
) -> None:
    baseline_ids = _tweet_ids_of(corpus, coordinated, member=False)
    baseline = table.rows_for(baseline_ids) if baseline_ids else None
    rows = []
    scopes = [(ALL_COORDINATED_SCOPE, coordinated)]
    scopes += [(str(c.id), c.members) for c in clusters[:top_clusters]]
    for scope_name, members in scopes:
        ids = _tweet_ids_of(corpus, set(members), member=True)
        if not ids or baseline is None or not len(baseline):
            continue
        deltas = stats.column_deltas(
            table.rows_for(ids), baseline, b=bootstrap_b, seed=seed
        )
        for name, d in zip(sl.CHARACTERISTICS, deltas):
            rows.append((scope_name, name, d["delta"], d["se"], d["p"]))
    _write_csv(path, ("cluster", "characteristic", "delta", "se", "p"), rows)


def write_binarized_rates(
    corpus: Corpus,
    table: sl.CharacteristicTable,
    coordinated: set[str],
    path: Path,
    threshold: float,
) -> dict:
    labels = sl.binarize(table, threshold)
    coord_ids = _tweet_ids_of(corpus, coordinated, member=True)
    base_ids = _tweet_ids_of(corpus, coordinated, member=False)
    rows = []
    rates = {}
    coord = labels.rows_for(coord_ids) if coord_ids else None
    base = labels.rows_for(base_ids) if base_ids else None
    for j, name in enumerate(sl.CHARACTERISTICS):
        c = float(coord[:, j].mean()) if coord is not None and len(coord) else None
        b = float(base[:, j].mean()) if base is not None and len(base) else None
        delta = (c - b) if c is not None and b is not None else None
        rows.append((name, c, b, delta))
        rates[name] = {"coordinated": c, "baseline": b, "delta": delta}
    _write_csv(path, ("characteristic", "coordinated_rate", "baseline_rate", "delta"), rows)
    return rates


def write_daily_confidence(
    corpus: Corpus,
    table: sl.CharacteristicTable,
    clusters,
    coordinated: set[str],
    path: Path,
    top_clusters: int,
) -> None:
    scopes = [(ALL_COORDINATED_SCOPE, coordinated), (BASELINE_SCOPE, None)]
    scopes += [(str(c.id), c.members) for c in clusters[:top_clusters]]
    rows = []
    for scope_name, members in scopes:
        if members is None:
            tweets = [r for r in corpus.records if r.account_id not in coordinated]
        else:
            members = set(members)
            tweets = [r for r in corpus.records if r.account_id in members]
        for name in sl.CHARACTERISTICS:
            for day, mean in stats.daily_mean_confidence(table, tweets, name):
                rows.append((day, scope_name, name, mean))
    _write_csv(path, ("day", "scope", "characteristic", "mean_confidence"), rows)


def write_language_mix(
    corpus: Corpus, clusters, coordinated: set[str], path: Path
) -> None:
    cluster_of = {}
    for c in clusters:
        for member in c.members:
            cluster_of[member] = c.id
    mix = stats.language_mix(corpus, coordinated)
    rows = []
    for account in sorted(mix):
        for lang, frac in mix[account].items():
            rows.append((account, cluster_of.get(account, 0), lang, frac))
    _write_csv(path, ("account_id", "cluster_id", "language", "fraction"), rows)


def story_share(corpus: Corpus, coordinated: set[str], story_hashtags) -> dict:
    """Share of story-hashtag tweets authored by coordinated accounts."""
    tags = {t.lower().lstrip("#") for t in story_hashtags if t}
    if not tags:
        return {"hashtags": [], "coordinated": None, "total": None, "share": None}
    total = 0
    coord = 0
    for rec in corpus.records:
        if tags.isdisjoint(rec.hashtags):
            continue
        total += 1
        if rec.account_id in coordinated:
            coord += 1
    return {
        "hashtags": sorted(tags),
        "coordinated": coord,
        "total": total,
        "share": (coord / total) if total else None,
    }


def confidence_vs_binarized(
    corpus: Corpus, table: sl.CharacteristicTable, threshold: float
) -> dict:
    """Spearman of daily mean confidence vs daily mean binarized label,
    per characteristic, with the median over defined values."""
    labels = sl.binarize(table, threshold)
    by_char = {}
    values = []
    for name in sl.CHARACTERISTICS:
        conf = stats.daily_mean_confidence(table, corpus.records, name)
        binr = stats.daily_mean_confidence(labels, corpus.records, name)
        xs = []
        ys = []
        for (day, c), (_, b) in zip(conf, binr):
            if c is not None and b is not None:
                xs.append(c)
                ys.append(b)
        if len(xs) >= 3:
            rho = stats.spearman(xs, ys).statistic
        else:
            rho = None
        by_char[name] = rho
        if rho is not None:
            values.append(rho)
    median = float(np.median(values)) if values else None
    return {"per_characteristic": by_char, "median": median}


def write_report_bundle(
    corpus: Corpus,
    edges: list[CoordinationEdge],
    table: sl.CharacteristicTable | None,
    outdir,
    *,
    story_hashtags=(),
    seed: int = 0,
    bootstrap_b: int = 1000,
    binarize_threshold: float = 0.5,
    duplicate_scope: str = "account",
    normalize_options: NormalizeOptions = DEFAULT_NORMALIZE,
    top_clusters: int = 5,
    run_manifest: RunManifest | None = None,
) -> dict:
    """Emit the full analysis bundle into outdir; returns the summary."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    manifest = run_manifest or RunManifest("report", seed=seed)
    written: list[Path] = []

    def emit(name: str) -> Path:
        path = outdir / name
        written.append(path)
        return path

    coord_graph = CoordinationGraph.from_edges(edges)
    clusters = graphmod.label_clusters(
        graphmod.connected_components(coord_graph), corpus
    )
    coordinated = set(coord_graph.nodes)

    manifest.counts["records"] = len(corpus)
    manifest.counts["accounts"] = len(corpus.account_index)
    manifest.counts["edges"] = len(edges)
    manifest.counts["coordinated_accounts"] = len(coordinated)
    manifest.counts["clusters"] = len(clusters)
    rng_range = corpus.time_range()
    if rng_range:
        manifest.set_time_range(
            day_of_timestamp(rng_range[0]), day_of_timestamp(rng_range[1])
        )

    write_daily_volume(corpus, emit("daily_volume.csv"))
    write_activity_shares(corpus, coordinated, emit("activity_shares.csv"))
    dup_shares = write_duplicate_shares(
        corpus, emit("duplicate_shares.csv"), normalize_options, duplicate_scope
    )
    write_clusters(clusters, emit("clusters.csv"))

    interactions = graphmod.retweet_interactions(corpus, coordinated)
    story = story_share(corpus, coordinated, story_hashtags)

    n_accounts = len(corpus.account_index)
    user_share = (len(coordinated) / n_accounts) if n_accounts else None

    dup_coord = [s for a, (s, _) in dup_shares.items() if s is not None and a in coordinated]
    dup_base = [s for a, (s, _) in dup_shares.items() if s is not None and a not in coordinated]
    if dup_coord and dup_base:
        dup_test = stats.mann_whitney_u(dup_coord, dup_base, method="normal")
        duplicate_comparison = {
            "coordinated_mean": sum(dup_coord) / len(dup_coord),
            "baseline_mean": sum(dup_base) / len(dup_base),
            "p": dup_test.p_value,
            "n": [len(dup_coord), len(dup_base)],
        }
    else:
        duplicate_comparison = None

    summary = {
        "seed": seed,
        "manifest_digest": None,  # filled below
        "user_share": user_share,
        "coordinated_accounts": len(coordinated),
        "total_accounts": n_accounts,
        "story_share": story,
        "interactions": interactions.as_dict(),
        "duplicate_scope": duplicate_scope,
        "duplicate_comparison": duplicate_comparison,
        "quantile_base": "retweet similarity quantile computed over candidate pairs with nonzero similarity",
        "binarize_threshold": binarize_threshold,
        "clusters": [
            {"id": c.id, "size": c.size, "label": c.label} for c in clusters[:top_clusters]
        ],
        "sociolinguistics": None,
    }

    if table is not None and len(table):
        rho, pval = correlation_matrices(table)
        write_matrix(rho, emit("correlations.csv"))
        write_matrix(pval, emit("correlation_pvalues.csv"))
        write_cluster_deltas(
            corpus,
            table,
            clusters,
            coordinated,
            emit("deltas.csv"),
            bootstrap_b,
            seed,
            top_clusters,
        )
        rates = write_binarized_rates(
            corpus, table, coordinated, emit("binarized_rates.csv"), binarize_threshold
        )
        write_daily_confidence(
            corpus, table, clusters, coordinated, emit("daily_confidence.csv"), top_clusters
        )
        summary["sociolinguistics"] = {
            "provenance": table.provenance,
            "rows": len(table),
            "missing_lookups": table.missing_lookups,
            "binarized_rates": rates,
            "confidence_vs_binarized": confidence_vs_binarized(
                corpus, table, binarize_threshold
            ),
        }
    else:
        summary["notice"] = "socio-linguistic sections omitted: no confidence table provided"

    write_language_mix(corpus, clusters, coordinated, emit("language_mix.csv"))

    summary["manifest_digest"] = manifest.digest
    _write_json(emit("summary.json"), summary)

    for path in sorted(written, key=lambda p: p.name):
        manifest.add_artifact(path)
    manifest.write(outdir / "manifest.json")
    return summary
