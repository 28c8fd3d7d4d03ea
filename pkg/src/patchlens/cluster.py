"""Hierarchical patch clustering, representative sampling, and similarity ranking.

Agglomerative clustering with average linkage over token-level Levenshtein
distances. Every tie is broken on original APR rank, so results are fully
deterministic and invariant under permutation of the input patch list.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .patchmodel import BuggyContext, PatchSet, token_distance


@dataclass
class ClusterNode:
    members: frozenset[str]  # patch ids
    children: tuple["ClusterNode", ...] = ()
    merge_height: float = 0.0
    representative: str | None = None

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def leaves(self) -> list["ClusterNode"]:
        if self.is_leaf:
            return [self]
        return [leaf for c in self.children for leaf in c.leaves()]


@dataclass
class Dendrogram:
    root: ClusterNode
    leaf_count: int
    merge_heights: list[float] = field(default_factory=list)  # ascending


@dataclass(frozen=True)
class RankedPatches:
    """Patch ids with their distance to the buggy statement, ascending."""

    entries: tuple[tuple[str, int], ...]

    def ids(self) -> list[str]:
        return [pid for pid, _ in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class ClusterPath:
    """Cluster counts along an exploration path plus the in-cluster position."""

    level_widths: tuple[int, ...]
    within_position: int


def distance_matrix(patches: PatchSet) -> dict[tuple[str, str], int]:
    """Pairwise token-level Levenshtein distances between patch replacements."""
    items = list(patches)
    dist: dict[tuple[str, str], int] = {}
    for i, a in enumerate(items):
        for b in items[i + 1:]:
            d = token_distance(a.replacement_text, b.replacement_text)
            dist[(a.id, b.id)] = d
            dist[(b.id, a.id)] = d
    return dist


def build_dendrogram(patches: PatchSet) -> Dendrogram:
    """Agglomerative average-linkage clustering of the patch set.

    Merge ties are broken by the best original rank found in each candidate
    cluster, which makes the dendrogram independent of input order.
    """
    if len(patches) < 1:
        raise ValueError("need at least one patch")
    rank_of = {p.id: p.original_rank for p in patches}
    pair = distance_matrix(patches)

    nodes: list[ClusterNode] = [
        ClusterNode(frozenset([p.id])) for p in sorted(patches, key=lambda p: p.original_rank)
    ]
    # average-linkage distance between current clusters
    dist: dict[tuple[int, int], float] = {}
    for i in range(len(nodes)):
        for j in range(i + 1, len(nodes)):
            a = next(iter(nodes[i].members))
            b = next(iter(nodes[j].members))
            dist[(i, j)] = float(pair[(a, b)])

    def best_rank(node: ClusterNode) -> int:
        return min(rank_of[pid] for pid in node.members)

    active = list(range(len(nodes)))
    heights: list[float] = []
    next_id = len(nodes)
    store: dict[int, ClusterNode] = {i: n for i, n in enumerate(nodes)}
    sizes: dict[int, int] = {i: 1 for i in range(len(nodes))}

    while len(active) > 1:
        best = None
        for ii in range(len(active)):
            for jj in range(ii + 1, len(active)):
                i, j = active[ii], active[jj]
                d = dist[(min(i, j), max(i, j))]
                ri, rj = best_rank(store[i]), best_rank(store[j])
                key = (d, min(ri, rj), max(ri, rj))
                if best is None or key < best[0]:
                    best = (key, i, j)
        (d, _, _), i, j = best
        merged = ClusterNode(
            store[i].members | store[j].members,
            children=tuple(sorted((store[i], store[j]), key=best_rank)),
            merge_height=d,
        )
        heights.append(d)
        store[next_id] = merged
        sizes[next_id] = sizes[i] + sizes[j]
        active = [k for k in active if k not in (i, j)]
        for k in active:
            di = dist[(min(i, k), max(i, k))]
            dj = dist[(min(j, k), max(j, k))]
            dist[(min(next_id, k), max(next_id, k))] = (
                sizes[i] * di + sizes[j] * dj
            ) / (sizes[i] + sizes[j])
        active.append(next_id)
        next_id += 1

    return Dendrogram(store[active[0]], len(patches), heights)


def cut_to_clusters(d: Dendrogram, max_k: int = 5) -> list[ClusterNode]:
    """Cut the dendrogram into at most max_k clusters.

    Among the horizontal cuts producing k clusters for k in [1, min(max_k, n)],
    picks the k whose merge-height gap to the next-coarser level is largest;
    ties go to the smaller k. The returned clusters partition the leaves.
    """
    if max_k < 1:
        raise ValueError("max_k must be >= 1")
    n = d.leaf_count
    heights = d.merge_heights  # ascending, length n-1

    def gap(k: int) -> float:
        # the k-cluster level spans [heights[n-k-1], heights[n-k])
        if k == 1:
            return 0.0
        upper = heights[n - k]  # merge that reduces k clusters to k-1
        lower = heights[n - k - 1] if n - k - 1 >= 0 else 0.0
        return upper - lower

    k_best = 1
    g_best = gap(1)
    for k in range(2, min(max_k, n) + 1):
        g = gap(k)
        if g > g_best:
            k_best, g_best = k, g

    clusters = [d.root]
    # repeatedly split the cluster with the highest merge height
    while len(clusters) < k_best:
        top = max(clusters, key=lambda c: c.merge_height)
        clusters.remove(top)
        clusters.extend(top.children)
    clusters.sort(key=lambda c: min(sorted(c.members)))
    return clusters


def select_representative(c: ClusterNode, patches: PatchSet) -> str:
    """The cluster's medoid: minimal summed distance to the other members.

    Ties are broken by the best original rank.
    """
    if not c.members:
        raise ValueError("empty cluster")
    members = sorted(c.members)
    if len(members) == 1:
        return members[0]
    rank_of = {p.id: p.original_rank for p in patches}
    text_of = {p.id: p.replacement_text for p in patches}
    best_id = None
    best_key = None
    for pid in members:
        total = sum(
            token_distance(text_of[pid], text_of[other])
            for other in members
            if other != pid
        )
        key = (total, rank_of[pid])
        if best_key is None or key < best_key:
            best_id, best_key = pid, key
    return best_id


def rank_representatives(
    reps: list[str], buggy: BuggyContext, patches: PatchSet
) -> RankedPatches:
    """Sort representatives by distance to the buggy statement, ascending.

    Equal distances preserve the original APR ranking.
    """
    if not reps:
        raise ValueError("no representatives to rank")
    rank_of = {p.id: p.original_rank for p in patches}
    scored = [
        (token_distance(patches.by_id(pid).replacement_text, buggy.buggy_statement_text), pid)
        for pid in reps
    ]
    scored.sort(key=lambda t: (t[0], rank_of[t[1]]))
    return RankedPatches(tuple((pid, dist) for dist, pid in scored))


def sample(
    patches: PatchSet, buggy: BuggyContext, max_k: int = 5
) -> tuple[RankedPatches, list[ClusterNode]]:
    """Cluster, pick one representative per cluster, rank them by similarity.

    The returned cluster list is aligned with the ranking: clusters[i] is the
    cluster represented by the i-th ranked patch.
    """
    dendrogram = build_dendrogram(patches)
    clusters = cut_to_clusters(dendrogram, max_k)
    for c in clusters:
        c.representative = select_representative(c, patches)
    ranked = rank_representatives([c.representative for c in clusters], buggy, patches)
    by_rep = {c.representative: c for c in clusters}
    ordered = [by_rep[pid] for pid in ranked.ids()]
    return ranked, ordered


def hierarchical_rank(path: ClusterPath) -> int:
    """Final rank of a patch: cluster counts along its path plus its position."""
    if path.within_position < 1 or any(w < 1 for w in path.level_widths):
        raise ValueError("cluster path entries must be positive")
    return sum(path.level_widths) + path.within_position


def within_cluster_order(c: ClusterNode, buggy: BuggyContext, patches: PatchSet) -> list[str]:
    """Members ordered for exploration: distance to buggy, then original rank."""
    rank_of = {p.id: p.original_rank for p in patches}
    return sorted(
        c.members,
        key=lambda pid: (
            token_distance(patches.by_id(pid).replacement_text, buggy.buggy_statement_text),
            rank_of[pid],
        ),
    )
