import json
import random

import pytest

from conftest import ALL_KINDS, build_quiver, data_path
from wquiv.analysis import oriented_cycles_trivial
from wquiv.groups import cyclic_kind, free_kind, trivial_kind
from wquiv.io import (
    FormatError,
    canonical_text,
    generate_corpus,
    load_quiver,
    load_wqp,
    quiver_from_json_text,
    quiver_to_json_text,
    random_quiver,
    save_quiver,
    save_wqp,
)
from wquiv.tame import cn_membership

FREE2 = free_kind(2)


def test_roundtrip_canonical(tmp_path):
    rng = random.Random(1)
    for kind in ALL_KINDS:
        for _ in range(20):
            q = random_quiver(rng.randint(1, 5), kind, rng, weights="random")
            path = tmp_path / "q.json"
            save_quiver(q, path)
            loaded = load_quiver(path)
            assert loaded == q
            save_quiver(loaded, tmp_path / "q2.json")
            assert (tmp_path / "q.json").read_bytes() == (tmp_path / "q2.json").read_bytes()


def test_canonical_bytes_iff_labeled_equal():
    rng = random.Random(2)
    quivers = [
        random_quiver(rng.randint(1, 4), FREE2, rng, weights="random")
        for _ in range(60)
    ]
    for qa in quivers:
        for qb in quivers:
            assert (canonical_text(qa) == canonical_text(qb)) == (qa == qb)


def test_malformed_weight_names_arrow():
    text = json.dumps(
        {
            "group": {"kind": "free", "rank": 1},
            "vertices": [{"id": 1}, {"id": 2}],
            "arrows": [{"src": 1, "dst": 2, "weight": "zz"}],
        }
    )
    with pytest.raises(FormatError) as err:
        quiver_from_json_text(text)
    assert "arrow #0" in str(err.value)


def test_missing_fields_and_bad_json():
    with pytest.raises(FormatError):
        quiver_from_json_text("{not json")
    with pytest.raises(FormatError):
        quiver_from_json_text(json.dumps({"vertices": [], "arrows": []}))


def test_figure1_file_loads_to_documented_quiver(figure1):
    assert [v.id for v in figure1.vertices] == [1, 2, 3]
    arrows = sorted((a.src, a.dst, str(a.weight)) for a in figure1.arrows)
    assert arrows == [(1, 2, ""), (2, 3, ""), (3, 1, ""), (3, 1, "x1")]


def test_invalid_quiver_rejected_on_load():
    text = json.dumps(
        {
            "group": {"kind": "trivial"},
            "vertices": [{"id": 1}],
            "arrows": [{"src": 1, "dst": 1, "weight": "e"}],
        }
    )
    with pytest.raises(FormatError) as err:
        quiver_from_json_text(text)
    assert "loop" in str(err.value)


def test_wqp_roundtrip(tmp_path, figure1_qp):
    path = tmp_path / "wqp.json"
    save_wqp(figure1_qp, path)
    loaded = load_wqp(path)
    assert loaded.terms == figure1_qp.terms
    assert loaded.quiver == figure1_qp.quiver
    assert loaded.bound == figure1_qp.bound


def test_corpus_policies(tmp_path):
    quivers = generate_corpus(5, 4, trivial_kind(), "trivial", seed=1)
    assert all(a.weight.is_identity() for q in quivers for a in q.arrows)

    gauged = generate_corpus(5, 4, FREE2, "gauge", seed=2)
    for q in gauged:
        ok, _ = oriented_cycles_trivial(q)
        assert ok

    oct_corpus = generate_corpus(5, 4, FREE2, "oriented-cycle-trivial", seed=3)
    for q in oct_corpus:
        ok, _ = oriented_cycles_trivial(q)
        assert ok

    members = generate_corpus(5, 5, free_kind(1), "cn-reverse-mutation", seed=4)
    for q in members:
        assert cn_membership(q).member

    free_random = generate_corpus(5, 4, FREE2, "free-random", seed=5)
    assert len(free_random) == 5


def test_corpus_deterministic_bytes(tmp_path):
    a_dir = tmp_path / "a"
    b_dir = tmp_path / "b"
    generate_corpus(4, 4, FREE2, "free-random", seed=99, out_dir=a_dir)
    generate_corpus(4, 4, FREE2, "free-random", seed=99, out_dir=b_dir)
    files_a = sorted(a_dir.glob("*.json"))
    files_b = sorted(b_dir.glob("*.json"))
    assert [f.name for f in files_a] == [f.name for f in files_b]
    for fa, fb in zip(files_a, files_b):
        assert fa.read_bytes() == fb.read_bytes()


def test_corpus_unsatisfiable():
    with pytest.raises(FormatError):
        generate_corpus(2, 5, trivial_kind(), "cn-reverse-mutation", seed=1)
