"""Coordination graph: clustering and activity analyses.

Connected components of the evidence graph are the coordinated account
clusters; the rest of the module characterizes how those accounts
behave (retweet interactions, activity shares, duplicate tweeting).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from coordnet.corpus import (
    DEFAULT_NORMALIZE,
    KINDS,
    Corpus,
    NormalizeOptions,
    normalize_text,
)
from coordnet.detectors import CoordinationEdge


class UnionFind:
    """Disjoint sets over hashable items, union by size + path compression."""

    def __init__(self):
        self._parent: dict = {}
        self._size: dict = {}

    def add(self, item) -> None:
        if item not in self._parent:
            self._parent[item] = item
            self._size[item] = 1

    def find(self, item):
        root = item
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[item] != root:
            self._parent[item], item = root, self._parent[item]
        return root

    def union(self, a, b) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self._size[ra] < self._size[rb]:
            ra, rb = rb, ra
        self._parent[rb] = ra
        self._size[ra] += self._size[rb]

    def groups(self) -> list[set]:
        by_root: dict = {}
        for item in self._parent:
            by_root.setdefault(self.find(item), set()).add(item)
        return list(by_root.values())


@dataclass
class CoordinationGraph:
    """Undirected evidence graph; every edge endpoint is a node."""

    nodes: set[str] = field(default_factory=set)
    edges: list[CoordinationEdge] = field(default_factory=list)

    @classmethod
    def from_edges(
        cls, edges: Iterable[CoordinationEdge], extra_nodes: Iterable[str] = ()
    ) -> "CoordinationGraph":
        edges = sorted(set(edges), key=CoordinationEdge.sort_key)
        nodes = set(extra_nodes)
        for edge in edges:
            nodes.add(edge.a)
            nodes.add(edge.b)
        return cls(nodes=nodes, edges=edges)


@dataclass
class Cluster:
    """A connected component; labeled by its dominant hashtag."""

    id: int
    members: set[str]
    label: str = ""

    @property
    def size(self) -> int:
        return len(self.members)


def connected_components(graph: CoordinationGraph) -> list[Cluster]:
    """Components sorted by size descending, ties by smallest member id;
    cluster ids are assigned in that order starting at 1."""
    uf = UnionFind()
    for node in graph.nodes:
        uf.add(node)
    for edge in graph.edges:
        uf.union(edge.a, edge.b)
    groups = uf.groups()
    groups.sort(key=lambda g: (-len(g), min(g)))
    return [Cluster(id=i, members=g) for i, g in enumerate(groups, start=1)]


def label_cluster(cluster: Cluster, corpus: Corpus) -> str:
    """Most frequent hashtag in members' original tweets; lexicographic
    tie-break; empty string when members have no hashtags."""
    counts: Counter[str] = Counter()
    for account in cluster.members:
        for rec in corpus.records_for_account(account):
            if rec.kind == "original":
                counts.update(rec.hashtags)
    if not counts:
        return ""
    return min(counts, key=lambda tag: (-counts[tag], tag))


def label_clusters(clusters: list[Cluster], corpus: Corpus) -> list[Cluster]:
    for cluster in clusters:
        cluster.label = label_cluster(cluster, corpus)
    return clusters


# ---------------------------------------------------------------------------
# Interaction and activity analyses
# ---------------------------------------------------------------------------


@dataclass
class InteractionCounts:
    intra_retweets: int
    retweets_from_outside: int
    replies_from_outside: int
    intra_share: float | None
    intra_share_of_actions: float | None

    def as_dict(self) -> dict:
        return {
            "intra_retweets": self.intra_retweets,
            "retweets_from_outside": self.retweets_from_outside,
            "replies_from_outside": self.replies_from_outside,
            "intra_share": self.intra_share,
            "intra_share_of_actions": self.intra_share_of_actions,
        }


def retweet_interactions(corpus: Corpus, coordinated: set[str]) -> InteractionCounts:
    """Retweet/reply flows between the coordinated set and everyone else.

    intra_share divides intra-coordinated retweets by all retweets of
    coordinated-account content; intra_share_of_actions divides by all
    retweets that coordinated accounts performed. A reply counts as
    "from outside" when a non-coordinated author mentions a coordinated
    account (records carry no explicit reply target).
    """
    intra = 0
    outside_retweets = 0
    outside_replies = 0
    coordinated_actions = 0
    for rec in corpus.records:
        author_in = rec.account_id in coordinated
        if rec.kind == "retweet":
            if author_in:
                coordinated_actions += 1
            if rec.retweeted_account_id is not None and rec.retweeted_account_id in coordinated:
                if author_in:
                    intra += 1
                else:
                    outside_retweets += 1
        elif rec.kind == "reply" and not author_in:
            if any(m in coordinated for m in rec.mentions):
                outside_replies += 1
    of_content = intra + outside_retweets
    return InteractionCounts(
        intra_retweets=intra,
        retweets_from_outside=outside_retweets,
        replies_from_outside=outside_replies,
        intra_share=(intra / of_content) if of_content else None,
        intra_share_of_actions=(intra / coordinated_actions) if coordinated_actions else None,
    )


def activity_shares(
    corpus: Corpus, coordinated: set[str]
) -> list[tuple[str, dict[str, float | None]]]:
    """Per day and kind: coordinated-authored count / total count.

    Days with no records of a kind yield None for that kind.
    """
    out = []
    for day in corpus.days():
        totals = {kind: 0 for kind in KINDS}
        coord = {kind: 0 for kind in KINDS}
        for rec in corpus.records_for_day(day):
            totals[rec.kind] += 1
            if rec.account_id in coordinated:
                coord[rec.kind] += 1
        shares = {
            kind: (coord[kind] / totals[kind]) if totals[kind] else None for kind in KINDS
        }
        out.append((day, shares))
    return out


def duplicate_shares(
    corpus: Corpus,
    accounts: Iterable[str] | None = None,
    options: NormalizeOptions = DEFAULT_NORMALIZE,
    scope: str = "account",
) -> dict[str, tuple[float | None, int]]:
    """Fraction of each account's original tweets that are duplicates.

    scope="account": a tweet is a duplicate when the same account posted
    the same normalized text at least twice. scope="corpus": the
    normalized text appears at least twice among all original tweets.
    Accounts with no originals report None.
    """
    if scope not in ("account", "corpus"):
        raise ValueError(f"unknown duplicate scope: {scope!r}")
    wanted = corpus.accounts() if accounts is None else sorted(set(accounts))

    corpus_counts: Counter[str] = Counter()
    if scope == "corpus":
        for rec in corpus.records:
            if rec.kind == "original":
                corpus_counts[normalize_text(rec.text, options)] += 1

    out: dict[str, tuple[float | None, int]] = {}
    for account in wanted:
        texts = [
            normalize_text(rec.text, options)
            for rec in corpus.records_for_account(account)
            if rec.kind == "original"
        ]
        if not texts:
            out[account] = (None, 0)
            continue
        counts = corpus_counts if scope == "corpus" else Counter(texts)
        dup = sum(1 for t in texts if counts[t] >= 2)
        out[account] = (dup / len(texts), len(texts))
    return out
