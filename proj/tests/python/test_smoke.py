import pathlib

import numpy as np
import pytest

import memclust

FIXTURE = pathlib.Path(__file__).resolve().parents[2] / "data" / "fixture_headlines.jsonl"


def test_tokenize_and_bm25():
    assert memclust.tokenize("The cat, the CAT!") == ["the", "cat", "the", "cat"]
    idx = memclust.Bm25Index(
        [("d1", "the cat sat on the mat"), ("d2", "the dog chased the cat around the cat tree"), ("d3", "a bird sang")]
    )
    assert len(idx) == 3
    assert idx.top_n("cat", 2) == ["d2", "d1"]
    assert idx.score("cat", "d1") == pytest.approx(0.4700036292457356, rel=1e-12)


def test_errors_carry_codes():
    idx = memclust.Bm25Index([("a", "x")])
    with pytest.raises(memclust.Error) as info:
        idx.score("x", "missing")
    assert info.value.code == "unknown-document"
    with pytest.raises(memclust.Error) as info:
        memclust.compress("mean", [])
    assert info.value.code == "empty-memory-set"


def test_encode_and_compress_shapes():
    mems = [memclust.reference_encode(f"doc number {i} about topic {i % 3}", 16, 32) for i in range(8)]
    assert mems[0].shape == (16, 32) and mems[0].dtype == np.float32
    assert memclust.compress("mean", mems)["tokens"].shape == (16, 32)
    assert memclust.compress("concat", mems)["tokens"].shape == (128, 32)
    out = memclust.compress("clustering", mems, k=4)
    assert out["tokens"].shape == (16 * out["effective_k"], 32)
    assert np.array_equal(memclust.compress("clustering", mems, k=1)["tokens"], memclust.compress("mean", mems)["tokens"])
    np.testing.assert_array_equal(memclust.compress("mean", mems)["tokens"], np.mean(np.stack(mems).astype(np.float64), 0).astype(np.float32))


def test_kmeans_and_budgets():
    pts = np.array([[0, 0], [0, 1], [10, 0], [10, 1]], dtype=np.float32)
    res = memclust.kmeans(pts, k=2)
    a = res["assignments"]
    assert a[0] == a[1] and a[2] == a[3] and a[0] != a[2]
    assert res["inertia"] == pytest.approx(1.0)
    assert [memclust.token_budget(s) for s in ("mean", "concat", "clustering")] == [128, 1024, 512]
    assert memclust.token_budget("clustering", d_m=32) == 128


def test_rouge():
    p, r, f = memclust.rouge_l("police kill the gunman", "police killed the gunman")
    assert (p, r, f) == (0.75, 0.75, 0.75)
    assert memclust.lcs_length(["a", "b", "c"], ["a", "c"]) == 2


def test_evaluate_fixture():
    report = memclust.evaluate(FIXTURE, jobs=2)
    budgets = [s["nominal_budget"] for s in report["strategies"]]
    assert budgets == [128, 1024, 512]
    assert all(len(s["examples"]) == 20 for s in report["strategies"])
