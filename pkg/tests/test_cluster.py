import itertools
import random

import pytest

from patchlens.cluster import (
    ClusterPath, build_dendrogram, cut_to_clusters, hierarchical_rank,
    rank_representatives, sample, select_representative, within_cluster_order,
)
from patchlens.minilang import parse
from patchlens.patchmodel import BuggyContext, Patch, PatchSet, tokenize

from helpers import reference_levenshtein

PROGRAM = parse("fn f(b: int, c: int) -> int {\n    let a: int = b * c;\n    return a;\n}\nfn test_f() {\n    assert(f(2, 3) == 6, \"x\");\n}\n")


def pset(texts, ranks=None):
    ranks = ranks or list(range(1, len(texts) + 1))
    return PatchSet(tuple(
        Patch(f"p{i+1}", 2, t, None, r) for i, (t, r) in enumerate(zip(texts, ranks))
    ))


def buggy_ctx(text="a = b * c ;"):
    return BuggyContext(PROGRAM, 2, text)


def test_single_patch_dendrogram():
    d = build_dendrogram(pset(["x = 1;"]))
    assert d.leaf_count == 1
    assert d.root.is_leaf
    assert cut_to_clusters(d) == [d.root]


def test_three_patch_merge_order():
    # pairwise distances: d(p1,p2)=1, d(p1,p3)=10=d(p2,p3)
    texts = [
        "a b c d e f g h i j",
        "a b c d e f g h i k",
        "0 1 2 3 4 5 6 7 8 9",
    ]
    d = build_dendrogram(pset(texts))
    assert d.merge_heights == [1.0, 10.0]
    first_merge = min(
        (c for c in [d.root] + list(d.root.children) if len(c.members) == 2),
        key=lambda c: c.merge_height,
    )
    assert first_merge.members == frozenset({"p1", "p2"})


def test_dendrogram_permutation_invariance():
    rng = random.Random(4)
    texts = ["a + b", "a + c", "a * b", "q - r", "q - s", "z"]
    base = pset(texts)
    base_tree = build_dendrogram(base)

    def member_sets(node, acc):
        acc.add(tuple(sorted(node.members)))
        for c in node.children:
            member_sets(c, acc)
        return acc

    want = member_sets(base_tree.root, set())
    for _ in range(5):
        order = list(enumerate(texts, start=1))
        rng.shuffle(order)
        shuffled = PatchSet(tuple(
            Patch(f"p{i}", 2, t, None, i) for i, t in order
        ))
        got = member_sets(build_dendrogram(shuffled).root, set())
        assert got == want


def test_cut_two_separated_groups_of_nine():
    group_a = [f"a b {x}" for x in "cdef"]
    group_b = [f"q r s t u v {x}" for x in "wxyzq"]
    d = build_dendrogram(pset(group_a + group_b))
    clusters = cut_to_clusters(d)
    assert len(clusters) == 2
    assert {frozenset(c.members) for c in clusters} == {
        frozenset({"p1", "p2", "p3", "p4"}),
        frozenset({"p5", "p6", "p7", "p8", "p9"}),
    }


def test_cut_bound_and_partition_random_sets():
    rng = random.Random(77)
    pool = ["a", "b", "c", "+", "*", "0", "1", ";", "(", ")"]
    for _ in range(100):
        n = rng.randint(1, 20)
        texts = []
        while len(texts) < n:
            t = " ".join(rng.choice(pool) for _ in range(rng.randint(1, 9)))
            if t not in texts:
                texts.append(t)
        patches = pset(texts)
        clusters = cut_to_clusters(build_dendrogram(patches), 5)
        assert 1 <= len(clusters) <= 5
        union = set()
        total = 0
        for c in clusters:
            union |= c.members
            total += len(c.members)
        assert union == {p.id for p in patches}
        assert total == len(patches)


def test_dendrogram_structure_invariants():
    rng = random.Random(31)
    pool = ["a", "b", "+", "*", "1", "2", "(", ")"]
    for _ in range(40):
        n = rng.randint(1, 15)
        texts = []
        while len(texts) < n:
            t = " ".join(rng.choice(pool) for _ in range(rng.randint(1, 8)))
            if t not in texts:
                texts.append(t)
        d = build_dendrogram(pset(texts))
        assert d.leaf_count == n
        assert len(d.merge_heights) == n - 1
        assert d.merge_heights == sorted(d.merge_heights)  # no inversions

        leaves = 0
        internals = 0
        stack = [d.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                leaves += 1
                assert len(node.members) == 1
            else:
                internals += 1
                assert node.members == node.children[0].members | node.children[1].members
                stack.extend(node.children)
        assert leaves == n
        assert internals == n - 1


def test_medoid_examples():
    clusters = cut_to_clusters(build_dendrogram(pset(["only x y z;"])))
    assert select_representative(clusters[0], pset(["only x y z;"])) == "p1"

    # d(p1,p2)=1, d(p1,p3)=4, d(p2,p3)=3 -> sums p1=5, p2=4, p3=7 -> p2
    patches = pset(["a b c d e", "a b c d x", "q b y z x"])
    from patchlens.cluster import ClusterNode

    node = ClusterNode(frozenset({"p1", "p2", "p3"}))
    assert select_representative(node, patches) == "p2"


def test_medoid_tie_breaks_on_original_rank():
    from patchlens.cluster import ClusterNode

    patches = pset(["a b", "a c"], ranks=[2, 1])
    node = ClusterNode(frozenset({"p1", "p2"}))
    assert select_representative(node, patches) == "p2"  # p2 carries rank 1


def test_medoid_brute_force_small_clusters():
    rng = random.Random(5)
    pool = ["m", "n", "+", "-", "1", "2", "(", ")"]
    from patchlens.cluster import ClusterNode

    for _ in range(60):
        n = rng.randint(1, 8)
        texts = []
        while len(texts) < n:
            t = " ".join(rng.choice(pool) for _ in range(rng.randint(1, 7)))
            if t not in texts:
                texts.append(t)
        patches = pset(texts)
        node = ClusterNode(frozenset(p.id for p in patches))
        medoid = select_representative(node, patches)
        token_seqs = {p.id: tokenize(p.replacement_text).tokens for p in patches}

        def brute_sum(pid):
            return sum(
                reference_levenshtein(token_seqs[pid], token_seqs[other])
                for other in token_seqs if other != pid
            )

        best = min(brute_sum(p.id) for p in patches)
        assert brute_sum(medoid) == best


def test_rank_representatives_examples():
    patches = pset(["a = b + c ;", "a = b * c * 2 ;"])
    ranked = rank_representatives(["p1", "p2"], buggy_ctx(), patches)
    assert ranked.entries == (("p1", 1), ("p2", 2))

    identical = pset(["a = b * c ;", "a = b + c ;"])
    ranked = rank_representatives(["p1", "p2"], buggy_ctx(), identical)
    assert ranked.entries[0] == ("p1", 0)


def test_rank_ties_preserve_original_rank():
    patches = pset(["a = b - c ;", "a = b + c ;"], ranks=[2, 1])
    ranked = rank_representatives(["p1", "p2"], buggy_ctx(), patches)
    assert ranked.ids() == ["p2", "p1"]  # equal distance 1, rank order wins


def test_sample_bounds_and_order_invariance():
    rng = random.Random(13)
    texts = [
        "a = b * c ;", "a = b * c * 1 ;", "a = c * b ;",
        "a = b + c ;", "a = b + c + 0 ;", "x y z w",
        "x y z v", "0 1 2 3 4 5",
    ]
    patches = pset(texts)
    ranked, clusters = sample(patches, buggy_ctx())
    assert 1 <= len(ranked) == len(clusters) <= 5
    assert [c.representative for c in clusters] == ranked.ids()
    dists = [d for _, d in ranked.entries]
    assert dists == sorted(dists)

    for _ in range(4):
        order = list(enumerate(texts, start=1))
        rng.shuffle(order)
        shuffled = PatchSet(tuple(Patch(f"p{i}", 2, t, None, i) for i, t in order))
        ranked2, clusters2 = sample(shuffled, buggy_ctx())
        assert ranked2.entries == ranked.entries
        assert [frozenset(c.members) for c in clusters2] == [
            frozenset(c.members) for c in clusters
        ]


def test_hierarchical_rank_formula():
    assert hierarchical_rank(ClusterPath((5,), 3)) == 8
    assert hierarchical_rank(ClusterPath((), 2)) == 2
    assert hierarchical_rank(ClusterPath((5, 4), 1)) == 10
    with pytest.raises(ValueError):
        hierarchical_rank(ClusterPath((0,), 1))


def test_within_cluster_order():
    from patchlens.cluster import ClusterNode

    patches = pset(["a = b * c ;", "a = b * d ;", "zz zz zz"], ranks=[3, 1, 2])
    node = ClusterNode(frozenset({"p1", "p2", "p3"}))
    order = within_cluster_order(node, buggy_ctx(), patches)
    assert order == ["p1", "p2", "p3"]  # distances 0, 1, big


def test_average_linkage_matches_scipy_on_distinct_distances():
    scipy = pytest.importorskip("scipy.cluster.hierarchy")
    import numpy as np
    from scipy.spatial.distance import squareform

    rng = random.Random(21)
    pool = ["a", "b", "c", "d", "+", "*", "(", ")", "1", "2", "3"]
    for _ in range(20):
        n = rng.randint(3, 10)
        texts = []
        while len(texts) < n:
            t = " ".join(rng.choice(pool) for _ in range(rng.randint(1, 10)))
            if t not in texts:
                texts.append(t)
        patches = pset(texts)
        from patchlens.cluster import distance_matrix

        dist = distance_matrix(patches)
        ids = [p.id for p in patches]
        mat = np.zeros((n, n))
        for i, a in enumerate(ids):
            for j, b in enumerate(ids):
                if i != j:
                    mat[i, j] = dist[(a, b)]
        condensed = squareform(mat, checks=False)
        if len(set(condensed)) != len(condensed):
            continue  # scipy breaks ties arbitrarily; only compare distinct cases
        link = scipy.linkage(condensed, method="average")
        ours = build_dendrogram(patches).merge_heights
        assert np.allclose(sorted(ours), sorted(link[:, 2]))
