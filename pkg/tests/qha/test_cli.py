import json

import pytest

from qha.cli import build_parser, run


@pytest.fixture
def qha(capsys):
    def call(*argv):
        code = run(list(argv))
        out = capsys.readouterr().out
        return code, json.loads(out) if out else None

    return call


def test_check(qha, corpus_file):
    code, report = qha("check", corpus_file("a3_rad2.alg"), "--quiet")
    assert code == 0
    assert report["exit_code"] == 0
    assert report["result"]["dimension"] == 5
    assert report["result"]["basis"] == ["e1", "e2", "e3", "alpha", "beta"]
    assert report["result"]["projectives"] == [2, 2, 1]
    assert report["verdicts"]["round_trip"] is True
    assert corpus_file("a3_rad2.alg") in report["inputs"]


def test_localize(qha, corpus_file):
    code, report = qha(
        "localize",
        corpus_file("two_cycle.alg"),
        "--sigma",
        corpus_file("alpha_star.map"),
        "--quiet",
    )
    assert code == 0
    assert report["result"]["dim_B"] == 8
    assert report["verdicts"]["homological"] == "yes"
    assert report["verdicts"]["homological_localisation"] == "certified"
    assert len(report["inputs"]) == 2


def test_localize_at_modules(qha, corpus_file):
    code, report = qha("localize", corpus_file("a3_rad2.alg"), "--at-modules", "P2", "--quiet")
    assert code == 0
    assert report["result"]["dim_B"] == 2
    assert report["verdicts"]["tor"] == {"1": 0, "2": 1}
    assert report["verdicts"]["homological_localisation"] == "not_one_finite"


def test_recollement_hypothesis_failed(qha, corpus_file):
    code, report = qha(
        "recollement", corpus_file("a3_rad2.alg"), "--sigma", corpus_file("kill_p2.map"), "--quiet"
    )
    assert code == 0
    assert report["verdicts"]["recollement"] == "hypothesis_failed"
    assert "one_finite" in report["verdicts"]["failed"]


def test_recollement(qha, corpus_file):
    code, report = qha(
        "recollement",
        corpus_file("two_cycle.alg"),
        "--sigma",
        corpus_file("alpha_star.map"),
        "--quiet",
    )
    assert code == 0
    assert report["verdicts"]["recollement"] == "built"
    assert report["verdicts"]["trace_check"] is True
    assert report["result"]["right"]["dimension"] == 1
    assert report["result"]["sigma"]["source"] == [2]


def test_cap_exceeded(qha, corpus_file):
    code, report = qha(
        "localize",
        corpus_file("kronecker.alg"),
        "--sigma",
        corpus_file("a_star.map"),
        "--max-iter",
        "8",
        "--max-dim",
        "10000",
        "--quiet",
    )
    assert code == 3
    assert report["error"]["reason"] == "cap_exceeded"
    assert report["error"]["details"]["which"] == "max_iter"


def test_parse_error(qha, tmpdir):
    tmpfile = tmpdir.join("bad.alg")
    tmpfile.write("field Q\nvertices 2\narrow a 1\n")
    code, report = qha("check", tmpfile.strpath, "--quiet")
    assert code == 2
    assert report["error"]["reason"] == "parse_error"
    assert report["error"]["details"]["line"] == 3


def test_missing_file(qha, tmpdir):
    code, report = qha("check", tmpdir.join("missing.alg").strpath, "--quiet")
    assert code == 2
    assert "error" in report


def test_tor(qha, corpus_file):
    args = ["tor", corpus_file("a3_rad2.alg"), "--right", "S3", "--left", "S1", "--degree", "2"]
    code, report = qha(*args, "--quiet")
    assert code == 0
    assert report["result"]["dimension"] == 1
    code, report = qha(*args[:-1], "1", "--quiet")
    assert report["result"]["dimension"] == 0


def test_tor_with_module_file(qha, corpus_file):
    args = ["tor", corpus_file("a3_rad2.alg"), "--right", "S3", "--left", "a3_rad2_s1.mod"]
    code, report = qha(*args, "--degree", "2", "--quiet")
    assert code == 0
    assert report["result"]["dimension"] == 1
    assert len(report["inputs"]) == 2


def test_epi(qha, corpus_file):
    code, report = qha("epi", corpus_file("two_cycle.alg"), "--quotient", "2", "--quiet")
    assert code == 0
    assert report["result"]["corner"]["dimension"] == 2
    assert report["result"]["vertices"] == [2]
    code, report = qha("epi", corpus_file("two_cycle.alg"), "--quotient", "x", "--quiet")
    assert code == 2


def test_scan(qha, corpus_file):
    code, report = qha("scan", corpus_file("two_cycle.alg"), "--arrows", "--quiet")
    assert code == 0
    assert [s["arrow"] for s in report["result"]["arrows"]] == ["alpha"]
    assert report["verdicts"]["witness"] == "arrow alpha"
    assert "stratifying" not in report["result"]


def test_corpus(qha):
    code, report = qha("corpus", "list", "--quiet")
    assert code == 0
    names = [e["name"] for e in report["result"]["entries"]]
    assert "a3_rad2" in names and "kronecker" in names
    code, report = qha("corpus", "run", "--only", "a3_rad2", "a3_linear", "--quiet")
    assert code == 0
    assert report["verdicts"] == {"passed": True, "failed": []}
    code, report = qha("corpus", "run", "--only", "nope", "--quiet")
    assert code == 2


def test_output_file(qha, corpus_file, tmpdir):
    filepath = tmpdir.join("report.json").strpath
    code, report = qha("check", corpus_file("a3_linear.alg"), "--output", filepath, "--quiet")
    assert code == 0
    assert report is None
    with open(filepath) as f:
        saved = json.load(f)
    assert saved["result"]["dimension"] == 6


def test_summary_line(corpus_file, capsys):
    assert run(["check", corpus_file("a3_linear.alg")]) == 0
    assert "check: dimension 6" in capsys.readouterr().err


def test_parser_requires_a_sigma():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["localize", "a.alg"])
