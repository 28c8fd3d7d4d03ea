"""Interactive triage sessions over a loaded bug corpus.

A session tracks which patches are still active, which clusters the user has
explored or excluded, and serves color-coded comparison tables for the current
representatives. The pipeline is deterministic, so replaying a session's
history against a fresh session reproduces identical views.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

from ..bench import BugCase
from ..cluster import ClusterNode, RankedPatches, sample
from ..patchmodel import token_distance
from ..pipeline import compare_versions
from ..tracealign import table_to_dict


class UnknownBug(Exception):
    pass


class UnknownSession(Exception):
    pass


class UnknownCluster(Exception):
    pass


class UnknownPatch(Exception):
    pass


class EmptyActiveSet(Exception):
    """Refused: excluding this cluster would leave no active patches."""


@dataclass
class View:
    representatives: RankedPatches
    clusters: list[ClusterNode]
    cluster_ids: list[str]  # aligned with clusters
    scope_ids: frozenset[str]  # patch ids the view was clustered from

    def cluster_by_id(self, cluster_id: str) -> ClusterNode:
        try:
            return self.clusters[self.cluster_ids.index(cluster_id)]
        except ValueError:
            raise UnknownCluster(cluster_id) from None


@dataclass
class Session:
    id: str
    bug: BugCase
    active_ids: set[str]
    excluded_ids: set[str] = field(default_factory=set)
    view: View | None = None
    history: list[dict] = field(default_factory=list)
    selection: str | None = None
    breadcrumb: list[str] = field(default_factory=list)
    table_cache: dict[tuple[str, ...], list[dict]] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


def _make_view(session: Session, scope_ids: set[str]) -> View:
    subset = session.bug.patches.subset(scope_ids)
    ranked, clusters = sample(subset, session.bug.buggy_context())
    cluster_ids = [f"c{i + 1}" for i in range(len(clusters))]
    return View(ranked, clusters, cluster_ids, frozenset(scope_ids))


def _ordered_ids(bug: BugCase, ids) -> list[str]:
    """Buggy-first table column order: distance to buggy, then original rank."""
    buggy = bug.buggy_context()
    return sorted(
        ids,
        key=lambda pid: (
            token_distance(bug.patches.by_id(pid).replacement_text,
                           buggy.buggy_statement_text),
            bug.patches.by_id(pid).original_rank,
        ),
    )


class SessionStore:
    """In-memory session registry; one lock per session serializes its requests."""

    def __init__(self, corpus: list[BugCase]):
        self.bugs = {bug.id: bug for bug in corpus}
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self._counter = 0
        # tables are pure functions of (bug, patch subset): share across sessions
        self._table_cache: dict[tuple[str, tuple[str, ...]], list[dict]] = {}

    def compute_tables(self, session: Session, patch_ids) -> list[dict]:
        """Comparison tables for buggy + the given patches, cache-served."""
        ordered = _ordered_ids(session.bug, patch_ids)
        key = tuple(ordered)
        cached = session.table_cache.get(key)
        if cached is not None:
            return cached
        bug = session.bug
        shared_key = (bug.id, key)
        payload = self._table_cache.get(shared_key)
        if payload is None:
            tables = compare_versions(
                bug.program,
                bug.tests,
                bug.buggy_line,
                [bug.patches.by_id(pid) for pid in ordered],
                source_file=f"{bug.id}/program.mini",
            )
            payload = [table_to_dict(t) for t in tables]
            self._table_cache[shared_key] = payload
        session.table_cache[key] = payload
        return payload

    def bug_list(self) -> list[BugCase]:
        return [self.bugs[k] for k in sorted(self.bugs)]

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise UnknownSession(session_id)
        return session

    def create(self, bug_id: str) -> Session:
        bug = self.bugs.get(bug_id)
        if bug is None:
            raise UnknownBug(bug_id)
        with self._lock:
            self._counter += 1
            session_id = f"s{self._counter}"
        session = Session(session_id, bug, {p.id for p in bug.patches})
        session.view = _make_view(session, session.active_ids)
        session.breadcrumb = ["all"]
        with self._lock:
            self._sessions[session_id] = session
        return session

    def explore(self, session: Session, cluster_id: str) -> Session:
        with session.lock:
            cluster = session.view.cluster_by_id(cluster_id)
            members = set(cluster.members)
            session.view = _make_view(session, members)
            session.breadcrumb.append(cluster_id)
            session.history.append({"action": "explore", "cluster_id": cluster_id})
        return session

    def exclude(self, session: Session, cluster_id: str) -> Session:
        with session.lock:
            cluster = session.view.cluster_by_id(cluster_id)
            members = set(cluster.members)
            remaining = session.active_ids - members
            if not remaining:
                raise EmptyActiveSet("excluding the last cluster is refused")
            session.excluded_ids |= members
            session.active_ids = remaining
            if session.selection in members:
                session.selection = None  # a selection must stay active
            # the view rebuilds over everything still active
            session.view = _make_view(session, remaining)
            session.breadcrumb = ["all"]
            session.history.append({"action": "exclude", "cluster_id": cluster_id})
        return session

    def select(self, session: Session, patch_id: str) -> dict:
        with session.lock:
            if patch_id not in session.active_ids:
                raise UnknownPatch(patch_id)
            session.selection = patch_id
            session.history.append({"action": "select", "patch_id": patch_id})
            bug = session.bug
            patch = bug.patches.by_id(patch_id)
            from ..patchmodel import apply_patch

            patched = apply_patch(bug.program, patch)
            return {
                "session_id": session.id,
                "patch_id": patch_id,
                "matches_correct": patch_id == bug.correct_patch_id,
                "patched_source": patched.source_text,
            }

    def tables_for(self, session: Session, patch_ids: list[str]) -> list[dict]:
        with session.lock:
            unknown = [pid for pid in patch_ids if pid not in session.active_ids]
            if unknown:
                raise UnknownPatch(", ".join(unknown))
            return self.compute_tables(session, patch_ids)

    def view_payload(self, session: Session) -> dict:
        with session.lock:
            return _view_payload(self, session)


def _view_payload(store: "SessionStore", session: Session) -> dict:
    bug = session.bug
    view = session.view
    buggy = bug.buggy_context()
    reps = []
    for (pid, distance), cluster, cluster_id in zip(
        view.representatives.entries, view.clusters, view.cluster_ids
    ):
        patch = bug.patches.by_id(pid)
        reps.append({
            "patch_id": pid,
            "replacement": patch.replacement_text,
            "distance_to_buggy": distance,
            "original_rank": patch.original_rank,
            "apr_score": patch.apr_score,
            "cluster_id": cluster_id,
            "cluster_size": len(cluster.members),
        })
    clusters = [
        {
            "cluster_id": cid,
            "representative": c.representative,
            "size": len(c.members),
            "member_ids": sorted(c.members),
        }
        for cid, c in zip(view.cluster_ids, view.clusters)
    ]
    tables = store.compute_tables(session, view.representatives.ids())
    return {
        "session_id": session.id,
        "bug_id": bug.id,
        "source": bug.program.source_text,
        "buggy_line": bug.buggy_line,
        "buggy_statement": buggy.buggy_statement_text,
        "representatives": reps,
        "clusters": clusters,
        "tables": tables,
        "active_count": len(session.active_ids),
        "excluded_ids": sorted(session.excluded_ids),
        "breadcrumb": list(session.breadcrumb),
        "history": list(session.history),
        "selection": session.selection,
    }
