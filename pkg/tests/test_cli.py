import csv
import io
import json

import jsonschema
import pytest

from confnodal.cli import ConfigError, read_config_file, resolve_config, run, schema

TS = "2026-01-01T00:00:00+00:00"


def invoke(*argv, timestamp=TS):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err, timestamp=timestamp)
    return code, out.getvalue(), err.getvalue()


def validate(text):
    doc = json.loads(text)
    jsonschema.Draft202012Validator(schema()).validate(doc)
    return doc


FAST = {
    "heisenberg-spectrum": ["--s", "1", "--max-eigenvalue", "200"],
    "nu-sweep": ["--s-min", "8", "--s-max", "16", "--points", "3"],
    "conformal-verify": ["--N", "8", "--count", "2"],
    "prescription": ["--N", "8", "--probes", "4"],
    "einstein": ["--n", "9", "--k", "1,3", "--synthetic", "5"],
}


class TestExitCodes:
    @pytest.mark.parametrize("argv,needle", [
        (["heisenberg-spectrum"], "--s"),
        (["heisenberg-spectrum", "--s", "1", "--d", "2", "--r", "2,3"], "divide"),
        (["heisenberg-spectrum", "--s", "-1"], "s"),
        (["heisenberg-spectrum", "--s", "1", "--operator", "wave"], "operator"),
        (["nu-sweep", "--s-min", "9", "--s-max", "3"], "s"),
        (["einstein", "--n", "8", "--k", "5", "--synthetic", "3"], "even dimension"),
        (["einstein", "--n", "9"], "spectrum"),
        (["conformal-verify", "--N", "5"], "N"),
        (["prescription", "--candidates", "u,banana"], "banana"),
        (["bogus"], "invalid choice"),
    ])
    def test_config_errors(self, argv, needle):
        code, out, err = invoke(*argv)
        assert code == 2 and out == ""
        assert needle in err

    def test_tuning_failure_is_config_error(self):
        code, _, err = invoke("prescription", "--N", "8", "--c-min", "0.1", "--c-max", "0.2")
        assert code == 2 and "sign" in err

    def test_invariant_violation(self):
        code, out, err = invoke("conformal-verify", "--N", "8", "--count", "2", "--inject-bug")
        assert code == 1
        doc = validate(out)
        assert doc["passed"] is False and "nu_invariant" in doc["failed"]
        assert "invariant violated" in err

    def test_paneitz_d1_warning(self):
        code, out, err = invoke("heisenberg-spectrum", "--s", "1", "--operator", "paneitz", "--max-eigenvalue", "5")
        assert code == 0 and "-1/4" in err
        assert validate(out)["warnings"]


class TestOutputs:
    @pytest.mark.parametrize("command", sorted(FAST))
    def test_schema_and_determinism(self, command):
        code, a, _ = invoke(command, *FAST[command])
        assert code == 0
        doc = validate(a)
        assert doc["command"] == command and doc["schema_version"] == 1 and doc["timestamp"] == TS
        code, b, _ = invoke(command, *FAST[command])
        assert a == b

    def test_sorted_keys(self):
        _, out, _ = invoke(*["heisenberg-spectrum"] + FAST["heisenberg-spectrum"])
        doc = json.loads(out)
        assert list(doc) == sorted(doc)
        assert out == json.dumps(doc, sort_keys=True, indent=2) + "\n"

    def test_files(self, tmp_path):
        j, c = tmp_path / "o.json", tmp_path / "o.csv"
        code, out, _ = invoke("heisenberg-spectrum", "--s", "1", "--max-eigenvalue", "50",
                              "--out", str(j), "--csv", str(c))
        assert code == 0 and out == ""
        doc = validate(j.read_text())
        assert "out" not in doc["config"] and "csv" not in doc["config"]
        rows = list(csv.reader(io.StringIO(c.read_text())))
        assert rows[0] == ["eigenvalue", "multiplicity", "label"]
        assert len(rows) - 1 == len(doc["lines"])

    def test_nodal_csv(self, tmp_path):
        p = tmp_path / "nodal.csv"
        code, _, _ = invoke("prescription", "--N", "8", "--probes", "2", "--nodal-csv", str(p))
        assert code == 0
        assert p.read_text().splitlines()[0] == "x,y,t,value"

    def test_single_point_sweep(self):
        code, out, _ = invoke("nu-sweep", "--points", "1")
        doc = validate(out)
        assert code == 0 and doc["slope"] is None and len(doc["points"]) == 1

    def test_sweep_jobs_agree(self):
        a = json.loads(invoke(*["nu-sweep"] + FAST["nu-sweep"])[1])
        b = json.loads(invoke(*["nu-sweep"] + FAST["nu-sweep"] + ["--jobs", "2"])[1])
        assert a["points"] == b["points"] and a["slope"] == b["slope"]

    def test_einstein_product_all_negative(self):
        doc = json.loads(invoke(*["einstein"] + FAST["einstein"])[1])
        for k in ("1", "3"):
            assert doc["counts"][k]["count"] == 5
            assert all(v < 0 for v in doc["counts"][k]["values"])
            assert doc["sign_table"][k]["negative"] == doc["sign_table"][k]["samples"]

    def test_einstein_base_spectrum(self):
        code, out, _ = invoke("einstein", "--n", "4", "--k", "1,2", "--einstein-constant", "1",
                              "--base-spectrum", "[[0, 1], [4, 5]]")
        doc = validate(out)
        assert code == 0 and doc["mode"] == "einstein"
        assert set(doc["spectra"]) == {"1", "2"}

    def test_prescription_candidates(self):
        doc = json.loads(invoke("prescription", "--N", "8", "--probes", "4", "--candidates", "u,minus-u,constant")[1])
        assert doc["candidates"]["u"]["forbidden_test"]["verdict"] == "FORBIDDEN"
        assert doc["candidates"]["minus-u"]["forbidden_test"]["verdict"] == "FORBIDDEN"
        assert doc["candidates"]["constant"]["forbidden_test"]["verdict"] == "NOT-DECIDED"
        assert doc["nu"] >= 1 and doc["kernel_dimension"] >= 1


class TestConfig:
    def test_precedence(self, tmp_path):
        p = tmp_path / "run.ini"
        p.write_text("[heisenberg-spectrum]\ns = 2.0\nd = 2\n")
        cfg = resolve_config("heisenberg-spectrum", {"s": "3.0"}, str(p))
        assert cfg["s"] == 3.0 and cfg.sources["s"] == "flag"
        assert cfg["d"] == 2 and cfg.sources["d"] == "config"
        assert cfg["max_eigenvalue"] == 100.0 and cfg.sources["max_eigenvalue"] == "default"
        code, out, _ = invoke("heisenberg-spectrum", "--config", str(p), "--max-eigenvalue", "20")
        doc = json.loads(out)
        assert code == 0 and doc["config"]["s"] == 2.0 and doc["config"]["d"] == 2 and doc["config"]["r"] == [1, 1]

    def test_unknown_key(self, tmp_path):
        p = tmp_path / "run.ini"
        p.write_text("[heisenberg-spectrum]\nspeed = 2\n")
        with pytest.raises(ConfigError):
            read_config_file(str(p), "heisenberg-spectrum")
        assert invoke("heisenberg-spectrum", "--config", str(p))[0] == 2

    def test_unknown_section(self, tmp_path):
        p = tmp_path / "run.ini"
        p.write_text("[nope]\na = 1\n")
        assert invoke("heisenberg-spectrum", "--s", "1", "--config", str(p))[0] == 2

    def test_missing_file(self, tmp_path):
        assert invoke("heisenberg-spectrum", "--s", "1", "--config", str(tmp_path / "none.ini"))[0] == 2

    def test_k_ranges(self):
        cfg = resolve_config("einstein", {"k": "1,3-5", "synthetic": "2"})
        assert cfg["k"] == [1, 3, 4, 5]

    def test_odd_dimension_accepts_large_k(self):
        code, out, _ = invoke("einstein", "--n", "9", "--k", "5", "--synthetic", "3")
        assert code == 0 and validate(out)["counts"]["5"]["total"] == 3
