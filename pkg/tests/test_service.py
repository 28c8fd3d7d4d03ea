import json
import random

import pytest
from fastapi.testclient import TestClient

from patchlens.service import create_app

from helpers import CORPUS


@pytest.fixture(scope="module")
def client():
    app = create_app(CORPUS)
    return TestClient(app, raise_server_exceptions=False)


LIGHT_BUG = "bug05_midpoint_overflow"


def test_bug_list(client):
    r = client.get("/bugs")
    assert r.status_code == 200
    bugs = r.json()["bugs"]
    assert len(bugs) >= 10
    assert all({"bug_id", "root_cause", "buggy_line", "patch_count"} <= set(b) for b in bugs)


def test_create_session_view_shape(client):
    r = client.post("/sessions", json={"bug_id": LIGHT_BUG})
    assert r.status_code == 200
    view = r.json()
    assert 1 <= len(view["representatives"]) <= 5
    assert len(view["clusters"]) == len(view["representatives"])
    assert view["tables"], "tables must be present"
    assert view["tables"][0]["columns"][0] == "buggy"
    assert view["active_count"] == 8
    assert view["excluded_ids"] == []
    assert view["selection"] is None


def test_unknown_bug_404(client):
    r = client.post("/sessions", json={"bug_id": "missing"})
    assert r.status_code == 404
    assert r.json() == {"code": "UnknownBug", "message": "missing"}


def test_unknown_session_404(client):
    r = client.get("/sessions/never-created")
    assert r.status_code == 404
    assert r.json()["code"] == "UnknownSession"


def test_explore_narrows_to_cluster_members(client):
    view = client.post("/sessions", json={"bug_id": LIGHT_BUG}).json()
    sid = view["session_id"]
    target = max(view["clusters"], key=lambda c: c["size"])
    r = client.post(f"/sessions/{sid}/explore", json={"cluster_id": target["cluster_id"]})
    assert r.status_code == 200
    sub = r.json()
    sub_ids = {rep["patch_id"] for rep in sub["representatives"]}
    assert sub_ids <= set(target["member_ids"])
    assert len(sub["representatives"]) <= 5
    assert sub["breadcrumb"][-1] == target["cluster_id"]
    for c in sub["clusters"]:
        assert set(c["member_ids"]) <= set(target["member_ids"])


def test_explore_unknown_cluster(client):
    view = client.post("/sessions", json={"bug_id": LIGHT_BUG}).json()
    r = client.post(f"/sessions/{view['session_id']}/explore", json={"cluster_id": "c99"})
    assert r.status_code == 404
    assert r.json()["code"] == "UnknownCluster"


def test_exclude_moves_members_out(client):
    view = client.post("/sessions", json={"bug_id": LIGHT_BUG}).json()
    sid = view["session_id"]
    if len(view["clusters"]) < 2:
        pytest.skip("needs two clusters")
    target = view["clusters"][0]
    r = client.post(f"/sessions/{sid}/exclude", json={"cluster_id": target["cluster_id"]})
    assert r.status_code == 200
    after = r.json()
    assert set(after["excluded_ids"]) == set(target["member_ids"])
    assert after["active_count"] == 8 - target["size"]
    shown = {rep["patch_id"] for rep in after["representatives"]}
    assert not shown & set(target["member_ids"])


def test_exclude_last_cluster_refused(client):
    view = client.post("/sessions", json={"bug_id": LIGHT_BUG}).json()
    sid = view["session_id"]
    # exclude until one cluster remains, then excluding it must be refused
    guard = 0
    while True:
        guard += 1
        assert guard < 20
        clusters = view["clusters"]
        if len(clusters) == 1:
            r = client.post(f"/sessions/{sid}/exclude",
                            json={"cluster_id": clusters[0]["cluster_id"]})
            assert r.status_code == 409
            assert r.json()["code"] == "EmptyActiveSet"
            check = client.get(f"/sessions/{sid}").json()
            assert check["active_count"] == view["active_count"]  # unchanged
            break
        r = client.post(f"/sessions/{sid}/exclude",
                        json={"cluster_id": clusters[0]["cluster_id"]})
        assert r.status_code == 200
        view = r.json()


def test_excluded_patches_never_reappear(client):
    rng = random.Random(5)
    view = client.post("/sessions", json={"bug_id": LIGHT_BUG}).json()
    sid = view["session_id"]
    excluded = set()
    for _ in range(4):
        clusters = view["clusters"]
        if len(clusters) < 2:
            break
        target = rng.choice(clusters)
        r = client.post(f"/sessions/{sid}/exclude", json={"cluster_id": target["cluster_id"]})
        if r.status_code != 200:
            break
        view = r.json()
        excluded |= set(target["member_ids"])
        shown = {rep["patch_id"] for rep in view["representatives"]}
        assert not shown & excluded
        assert excluded <= set(view["excluded_ids"])


def test_tables_cache_identical_payload(client):
    view = client.post("/sessions", json={"bug_id": LIGHT_BUG}).json()
    sid = view["session_id"]
    ids = ",".join(rep["patch_id"] for rep in view["representatives"])
    a = client.get(f"/sessions/{sid}/tables", params={"patches": ids})
    b = client.get(f"/sessions/{sid}/tables", params={"patches": ids})
    assert a.status_code == 200
    assert a.content == b.content


def test_tables_column_count(client):
    view = client.post("/sessions", json={"bug_id": "bug02_gcd_overflow"}).json()
    sid = view["session_id"]
    ids = [p["patch_id"] for p in view["representatives"]][:2]
    more = [m for c in view["clusters"] for m in c["member_ids"] if m not in ids][:1]
    chosen = ids + more
    r = client.get(f"/sessions/{sid}/tables", params={"patches": ",".join(chosen)})
    assert r.status_code == 200
    for table in r.json()["tables"]:
        assert len(table["columns"]) == len(chosen) + 1
        for row in table["rows"]:
            assert len(row["values"]) == len(chosen) + 1


def test_tables_unknown_patch(client):
    view = client.post("/sessions", json={"bug_id": LIGHT_BUG}).json()
    r = client.get(f"/sessions/{view['session_id']}/tables", params={"patches": "zz"})
    assert r.status_code == 404
    assert r.json()["code"] == "UnknownPatch"


def test_select_correct_and_incorrect(client):
    view = client.post("/sessions", json={"bug_id": LIGHT_BUG}).json()
    sid = view["session_id"]
    meta = json.loads((CORPUS / LIGHT_BUG / "meta.json").read_text())
    correct = meta["correct_patch_id"]
    r = client.post(f"/sessions/{sid}/select", json={"patch_id": correct})
    assert r.status_code == 200
    body = r.json()
    assert body["matches_correct"] is True
    assert "lo + (hi - lo) / 2" in body["patched_source"]

    other = next(
        rep["patch_id"] for rep in view["representatives"] if rep["patch_id"] != correct
    )
    r2 = client.post(f"/sessions/{sid}/select", json={"patch_id": other})
    assert r2.json()["matches_correct"] is False


def test_select_excluded_patch_rejected(client):
    view = client.post("/sessions", json={"bug_id": LIGHT_BUG}).json()
    sid = view["session_id"]
    if len(view["clusters"]) < 2:
        pytest.skip("needs two clusters")
    target = view["clusters"][0]
    client.post(f"/sessions/{sid}/exclude", json={"cluster_id": target["cluster_id"]})
    victim = target["member_ids"][0]
    r = client.post(f"/sessions/{sid}/select", json={"patch_id": victim})
    assert r.status_code == 404
    assert r.json()["code"] == "UnknownPatch"


def test_sessions_are_independent(client):
    first = client.post("/sessions", json={"bug_id": LIGHT_BUG}).json()
    sid = first["session_id"]
    target = first["clusters"][0]["cluster_id"]
    client.post(f"/sessions/{sid}/explore", json={"cluster_id": target})
    fresh = client.post("/sessions", json={"bug_id": LIGHT_BUG}).json()
    assert [c["member_ids"] for c in fresh["clusters"]] == [
        c["member_ids"] for c in first["clusters"]
    ]
    assert json.dumps(fresh["tables"]) == json.dumps(first["tables"])


def test_single_patch_bug_yields_one_rep_two_columns():
    from patchlens.bench import BugCase
    from patchlens.minilang import parse
    from patchlens.minilang import test_cases as cases_of
    from patchlens.patchmodel import Patch, PatchSet
    from patchlens.service.sessions import SessionStore

    program = parse(
        "fn twice(n: int) -> int {\n"
        "    let r: int = n + 1;\n"
        "    return r;\n"
        "}\n"
        "fn test_twice() {\n"
        "    assert(twice(3) == 6, \"doubling\");\n"
        "}\n"
    )
    patches = PatchSet((Patch("p1", 2, "    let r: int = n * 2;", None, 1),))
    bug = BugCase("tiny", program, cases_of(program), 2, patches, "p1")
    store = SessionStore([bug])
    view = store.view_payload(store.create("tiny"))
    assert len(view["representatives"]) == 1
    assert view["clusters"][0]["size"] == 1
    for table in view["tables"]:
        assert table["columns"] == ["buggy", "p1"]
        for row in table["rows"]:
            assert len(row["values"]) == 2


def test_exclusion_clears_a_now_inactive_selection(client):
    view = client.post("/sessions", json={"bug_id": LIGHT_BUG}).json()
    sid = view["session_id"]
    if len(view["clusters"]) < 2:
        pytest.skip("needs two clusters")
    target = view["clusters"][0]
    victim = target["member_ids"][0]
    client.post(f"/sessions/{sid}/select", json={"patch_id": victim})
    assert client.get(f"/sessions/{sid}").json()["selection"] == victim
    client.post(f"/sessions/{sid}/exclude", json={"cluster_id": target["cluster_id"]})
    assert client.get(f"/sessions/{sid}").json()["selection"] is None


def test_concurrent_sessions_stay_isolated(client):
    import threading

    views = {}
    errors = []

    def worker(bug_id, key):
        try:
            view = client.post("/sessions", json={"bug_id": bug_id}).json()
            sid = view["session_id"]
            target = view["clusters"][0]["cluster_id"]
            after = client.post(f"/sessions/{sid}/explore",
                                json={"cluster_id": target}).json()
            views[key] = (view, after)
        except Exception as e:  # noqa: BLE001
            errors.append(e)

    threads = [
        threading.Thread(target=worker, args=(LIGHT_BUG, f"a{i}"))
        for i in range(4)
    ] + [
        threading.Thread(target=worker, args=("bug04_range_condition", f"b{i}"))
        for i in range(4)
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    # all sessions of one bug saw identical initial and explored views
    for prefix in ("a", "b"):
        group = [v for k, v in views.items() if k.startswith(prefix)]
        baseline = group[0]
        for initial, after in group:
            assert initial["clusters"] == baseline[0]["clusters"]
            assert after["representatives"] == baseline[1]["representatives"]


def test_motivating_sqrt_row_over_api(client):
    view = client.post("/sessions", json={"bug_id": "bug01_mannwhitney_overflow"}).json()
    rows = [
        row
        for t in view["tables"]
        for row in t["rows"]
        if row["display_name"] == "sqrt(var_u)"
    ]
    assert rows, "the sqrt row must be present"
    row = rows[0]
    assert row["values"][0] == "NaN"
    assert row["colors"][0] == "red"
    assert all(v != "NaN" for v in row["values"][1:] if v is not None)
