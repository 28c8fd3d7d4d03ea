"""Pydantic request/response models for the session API."""

from __future__ import annotations

from pydantic import BaseModel, Field


class BugSummary(BaseModel):
    bug_id: str
    root_cause: str
    buggy_line: int
    buggy_statement: str
    patch_count: int


class BugListResponse(BaseModel):
    bugs: list[BugSummary]


class CreateSessionRequest(BaseModel):
    bug_id: str


class ExploreRequest(BaseModel):
    cluster_id: str


class ExcludeRequest(BaseModel):
    cluster_id: str


class SelectRequest(BaseModel):
    patch_id: str


class NavTarget(BaseModel):
    file: str
    line: int


class TableRow(BaseModel):
    line: int
    occurrence: int
    occurrence_count: int
    display_name: str
    kind: str
    values: list[str | None]
    merge_spans: list[list[int]]
    colors: list[str]
    nav_target: NavTarget


class Table(BaseModel):
    frame: str
    frame_index: int
    columns: list[str]
    rows: list[TableRow]


class RepresentativeCard(BaseModel):
    patch_id: str
    replacement: str
    distance_to_buggy: int
    original_rank: int
    apr_score: float | None = None
    cluster_id: str
    cluster_size: int


class ClusterSummary(BaseModel):
    cluster_id: str
    representative: str | None
    size: int
    member_ids: list[str]


class SessionView(BaseModel):
    session_id: str
    bug_id: str
    source: str
    buggy_line: int
    buggy_statement: str
    representatives: list[RepresentativeCard]
    clusters: list[ClusterSummary]
    tables: list[Table]
    active_count: int
    excluded_ids: list[str]
    breadcrumb: list[str]
    history: list[dict]
    selection: str | None = None


class TablesResponse(BaseModel):
    session_id: str
    tables: list[Table]


class SelectResponse(BaseModel):
    session_id: str
    patch_id: str
    matches_correct: bool
    patched_source: str


class ApiError(BaseModel):
    code: str = Field(description="machine-readable error class")
    message: str
