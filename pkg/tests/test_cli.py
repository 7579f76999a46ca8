import json
import subprocess
import sys

import pytest

from superswan import cli

CORPUS = cli.BUILTIN_CORPUS


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_suite_passes(capsys):
    code, out, _ = run(capsys, "suite", "--json")
    assert code == 0
    rep = json.loads(out)
    assert rep["passed"] and rep["summary"]["as_expected"] == rep["summary"]["total"]
    targets = [r["target"] for r in rep["results"]]
    assert targets == sorted(targets)
    assert any(t.startswith("builtin:") for t in targets)
    assert sum(1 for t in targets if "broken" in t) == 10


def test_suite_is_deterministic(capsys):
    _, a, _ = run(capsys, "suite", "--json", "--seed", "3")
    _, b, _ = run(capsys, "suite", "--json", "--seed", "3")
    a, b = json.loads(a), json.loads(b)
    a.pop("timestamp"), b.pop("timestamp")
    assert a == b


def test_verify_ring_names_offending_pair(capsys):
    code, out, _ = run(capsys, "verify-ring", str(CORPUS / "broken" / "01_ring_wrong_sign.json"),
                       "--json")
    assert code == 1
    r = json.loads(out)["results"][0]
    assert r["law"] == "supercommutativity"
    assert sorted(r["witness"]["pair"]) == [1, 2]


def test_verify_ring_and_module_pass(capsys):
    assert run(capsys, "verify-ring", str(CORPUS / "ring_lambda2_explicit.json"))[0] == 0
    assert run(capsys, "verify-module", str(CORPUS / "module_mixed_projective.json"))[0] == 0
    code, out, _ = run(capsys, "verify-module",
                       str(CORPUS / "broken" / "05_module_corrupted_action.json"), "--json")
    assert code == 1 and json.loads(out)["results"][0]["law"] == "action-associativity"


def test_roundtrip_reports_iso_matrices(capsys, tmp_path):
    path = tmp_path / "rep.json"
    code, out, _ = run(capsys, "roundtrip", str(CORPUS / "scheme_spec_l1xl1.json"),
                       str(CORPUS / "catalog_spec_l1xl1.json"), "--json", "--report", str(path))
    assert code == 0
    rep = json.loads(path.read_text())
    assert rep["passed"]
    entries = rep["results"][0]["report"]["entries"]
    isos = [e for e in entries if e["check"] == "Gamma(S(P)) ~ P"]
    assert isos and all(e["witness"]["iso"] for e in isos)
    cells = [v for e in isos for row in e["witness"]["iso"] for v in row]
    assert all("/" in v for v in cells)


def test_cohomology_command(capsys):
    code, out, _ = run(capsys, "cohomology", str(CORPUS / "sheaf_pseudocircle_constant.json"),
                       str(CORPUS / "cover_pseudocircle_cd.json"), "--json")
    assert code == 0
    assert "1|0" in out


def test_malformed_json_reports_location(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "ring",\n "ring": [1, 2,, 3]}')
    code, _, err = run(capsys, "verify-ring", str(bad))
    assert code == 2
    assert "input error" in err and f"{bad}:2:" in err


def test_invalid_descriptor_is_input_error(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"kind": "ring", "ring": {"dim": 2, "parity": [0]}}))
    code, _, err = run(capsys, "verify-ring", str(bad))
    assert code == 2 and "input error" in err


def test_max_dim_guard(capsys):
    code, _, err = run(capsys, "verify-ring", str(CORPUS / "ring_lambda2_x_lambda3.json"),
                       "--max-dim", "4")
    assert code == 2 and "input error" in err


def test_corpus_override(capsys, tmp_path, monkeypatch):
    (tmp_path / "broken").mkdir()
    src = (CORPUS / "ring_grassmann3.json").read_text()
    (tmp_path / "only.json").write_text(src)
    monkeypatch.setenv("SUPERSWAN_CORPUS", str(tmp_path))
    code, out, _ = run(capsys, "suite", "--json")
    assert code == 0
    targets = [r["target"] for r in json.loads(out)["results"]]
    assert [t for t in targets if not t.startswith("builtin:")] == ["only.json"]


def test_text_output(capsys):
    code, out, _ = run(capsys, "verify-ring", str(CORPUS / "broken" / "02_ring_wrong_parity.json"),
                       "--text")
    assert code == 1 and "law=parity-additivity" in out


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "superswan.cli", "verify-ring",
                        str(CORPUS / "ring_grassmann3.json")], capture_output=True, text=True)
    assert p.returncode == 0 and "PASS" in p.stdout
