import json

import pytest
from click.testing import CliRunner

from conftest import data_path
from wquiv.cli import main
from wquiv.io import canonical_text, load_quiver
from wquiv.mutation import mutate_sequence

FIG1 = str(data_path("figure1.json"))
FIG1_QP = str(data_path("figure1_qp.json"))


@pytest.fixture
def runner():
    return CliRunner()


def test_mutate_stdout_is_canonical_quiver(runner, figure1):
    result = runner.invoke(main, ["mutate", FIG1, "--at", "2"])
    assert result.exit_code == 0, result.output
    expected = canonical_text(mutate_sequence(figure1, [2])[-1].result)
    assert result.stdout == expected


def test_mutate_sequence_and_log(runner, figure1):
    result = runner.invoke(main, ["mutate", FIG1, "--at", "2,1"])
    assert result.exit_code == 0
    expected = canonical_text(mutate_sequence(figure1, [2, 1])[-1].result)
    assert result.stdout == expected


def test_mutate_bad_vertex(runner):
    result = runner.invoke(main, ["mutate", FIG1, "--at", "9"])
    assert result.exit_code != 0


def test_check_nondeg(runner):
    result = runner.invoke(main, ["check-nondeg", FIG1, "--depth", "3"])
    assert result.exit_code == 0, result.output
    report = json.loads(result.stdout)
    assert report["outcome"] == "clean-to-depth"
    assert report["depth"] == 3


def test_frame_and_c_vectors(runner, tmp_path):
    framed = runner.invoke(main, ["frame", FIG1])
    assert framed.exit_code == 0
    framed_file = tmp_path / "framed.json"
    framed_file.write_text(framed.stdout)
    cv = runner.invoke(main, ["c-vectors", str(framed_file)])
    assert cv.exit_code == 0
    report = json.loads(cv.stdout)
    assert report["rows"] == [[-1, 0, 0], [0, -1, 0], [0, 0, -1]]
    assert report["sign_coherent"] is True


def test_equiv_cli(runner, tmp_path, figure1):
    from wquiv.equivalence import apply_gauge
    from wquiv.groups import parse_element
    from wquiv.io import save_quiver

    gauge = {1: parse_element(figure1.group, "x1"), 2: parse_element(figure1.group, ""), 3: parse_element(figure1.group, "x1 x1")}
    other = apply_gauge(figure1, gauge)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    # explicit ids keep the weight functions on the same arrow set
    save_quiver(figure1, a, include_ids=True)
    save_quiver(other, b, include_ids=True)
    result = runner.invoke(main, ["equiv", str(a), str(b)])
    assert result.exit_code == 0, result.output
    report = json.loads(result.stdout)
    assert report["status"] == "equivalent"
    assert set(report["gauge"]) == {"1", "2", "3"}


def test_classify_and_canonicalize(runner, tmp_path):
    from wquiv.groups import free_kind, parse_element
    from wquiv.io import save_quiver, unoriented_cycle_quiver

    kind = free_kind(1)
    q = unoriented_cycle_quiver(5, kind, parse_element(kind, "x1"))
    path = tmp_path / "cycle.json"
    save_quiver(q, path)
    verdict = runner.invoke(main, ["classify-tame", str(path)])
    assert verdict.exit_code == 0
    assert json.loads(verdict.stdout)["kind"] == "cn-member"
    canon = runner.invoke(main, ["canonicalize", str(path)])
    assert canon.exit_code == 0
    assert json.loads(canon.stdout)["sequence"] == []


def test_qp_split_and_mutate(runner):
    split_result = runner.invoke(main, ["qp-split", FIG1_QP])
    assert split_result.exit_code == 0, split_result.output
    report = json.loads(split_result.stdout)
    assert report["trivial_pairs"] == []
    assert report["s_reduced"] == [{"cycle": [1, 2, 3], "coeff": "1"}]

    mut_result = runner.invoke(main, ["qp-mutate", FIG1_QP, "--at", "2"])
    assert mut_result.exit_code == 0, mut_result.output
    report = json.loads(mut_result.stdout)
    assert report["matches_weight_reduction"] is True
    assert report["potential"] == []


def test_gen_corpus_cli(runner, tmp_path):
    out = tmp_path / "corpus"
    result = runner.invoke(
        main,
        [
            "gen-corpus", "--count", "3", "--n", "4",
            "--policy", "trivial", "--seed", "7", "--out", str(out),
        ],
    )
    assert result.exit_code == 0, result.output
    assert len(list(out.glob("*.json"))) == 3
    for path in out.glob("*.json"):
        load_quiver(path)


def test_sign_coherence_experiment_cli(runner):
    result = runner.invoke(
        main,
        [
            "sign-coherence-experiment", "--catalog", "builtin",
            "--max-vertices", "2", "--max-len", "3", "--failures-only",
        ],
    )
    assert result.exit_code == 0, result.output
    report = json.loads(result.stdout)
    assert report["passed"] is True
    assert report["cases"] == []
