import csv
import io
import json
from pathlib import Path

import pytest

from ppmcf.cli import RunManifest, UsageError, main, parse_fer_config, parse_grid
from ppmcf.interleave import parse_interleaver, satisfies_s_constraint

DATA = Path(__file__).parent / "data"


@pytest.fixture(autouse=True)
def fixed_clock(monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    lines = text.splitlines()
    assert lines[0].startswith("# manifest: ")
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def manifest_of(text):
    return json.loads(text.splitlines()[0][len("# manifest: "):])


# --- check / count / enumerate --------------------------------------------

def test_check_quadratic(capsys):
    code, out, _ = run(capsys, "check", "256", "159", "64")
    assert code == 0
    (row,) = csv_rows(out)
    assert row["pp"] == "yes" and row["case"] == "1" and row["kind"] == "quadratic"
    assert row["N_factors"] == "2^8" and row["f2_factors"] == "2^6"


def test_check_linear(capsys):
    code, out, _ = run(capsys, "check", "256", "159", "0")
    assert code == 0
    assert csv_rows(out)[0]["kind"] == "linear"


def test_check_prime_negative(capsys):
    code, out, _ = run(capsys, "check", "257", "5", "17")
    assert code == 1
    assert csv_rows(out)[0]["pp"] == "no"


@pytest.mark.parametrize("argv", [["check", "256", "x", "1"], ["check", "256", "300", "1"], ["check"]])
def test_check_usage_errors(capsys, argv):
    try:
        code = main(argv)
    except SystemExit as exc:  # argparse rejects malformed integers itself
        code = exc.code
    capsys.readouterr()
    assert code == 2


def test_count_and_enumerate(capsys):
    code, out, _ = run(capsys, "count", "256")
    assert code == 0 and csv_rows(out)[0]["count"] == "16256"
    code, out, _ = run(capsys, "--format", "json", "enumerate", "8")
    doc = json.loads(out)
    assert len(doc["rows"]) == 12
    assert doc["manifest"]["subcommand"] == "enumerate"
    code, out, _ = run(capsys, "enumerate", "256", "--limit", "3")
    assert len(csv_rows(out)) == 3


# --- polynomials -----------------------------------------------------------

@pytest.mark.parametrize("N,f1,f2,g", [(256, 159, 64, "95,64"), (1024, 31, 64, "991,64"),
                                       (4096, 2113, 128, "4033,1920")])
def test_invert(capsys, N, f1, f2, g):
    code, out, _ = run(capsys, "invert", str(N), str(f1), str(f2))
    assert code == 0
    assert csv_rows(out)[0]["coeffs"] == g


def test_invert_all_and_non_pp(capsys):
    code, out, _ = run(capsys, "invert", "256", "159", "64", "--all")
    assert [r["coeffs"] for r in csv_rows(out)] == ["95,64", "223,192"]
    code, _, err = run(capsys, "invert", "256", "2", "1")
    assert code == 2 and "not a permutation" in err


def test_compose(capsys):
    code, out, _ = run(capsys, "compose", "256", "159,64", "95,64")
    assert code == 0
    row = csv_rows(out)[0]
    assert row["coeffs"] == "1" and row["pp"] == "yes"


# --- interleaver sources ---------------------------------------------------

def test_mcf_large(capsys):
    code, out, _ = run(capsys, "mcf", "qpp", "15120", "11", "210")
    rows = csv_rows(out)
    assert code == 0 and len(rows) == 80
    assert all(r["passed"] == "True" for r in rows)


def test_mcf_example1_json(capsys):
    code, out, _ = run(capsys, "mcf", "qpp", "256", "159", "64", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["mcf"] is True and len(doc["rows"]) == 9


def test_mcf_counterexample_file(capsys):
    code, out, _ = run(capsys, "mcf", "file", str(DATA / "counterexample4.txt"))
    assert code == 1
    failed = [r for r in csv_rows(out) if r["passed"] == "False"]
    assert [(r["W"], r["j"], r["t"], r["v"]) for r in failed] == [("2", "0", "0", "1")]


@pytest.mark.parametrize("content", [None, "4\n0\n0\n1\n2\n", "3\n0\n1\n"])
def test_mcf_bad_file(capsys, tmp_path, content):
    path = tmp_path / "pi.txt"
    if content is not None:
        path.write_text(content)
    code, _, err = run(capsys, "mcf", "file", str(path))
    assert code == 2 and "error" in err


def test_mcf_non_pp_source(capsys):
    code, _, err = run(capsys, "mcf", "qpp", "257", "5", "17")
    assert code == 2 and "not a permutation" in err


@pytest.mark.parametrize("src,D", [(("qpp", "256", "159", "64"), 16), (("qpp", "1024", "31", "64"), 32),
                                   (("qpp", "4096", "2113", "128"), 64), (("identity", "64"), 2)])
def test_spread(capsys, src, D):
    code, out, _ = run(capsys, "spread", *src)
    row = csv_rows(out)[0]
    assert code == 0 and int(row["D"]) == D
    if src[0] == "qpp":
        assert float(row["ratio"]) == pytest.approx(0.7071, abs=1e-3)


def test_materialize_roundtrip(capsys, tmp_path):
    out_path = tmp_path / "pi.txt"
    assert main(["materialize", "qpp", "8", "1", "2", "--out", str(out_path)]) == 0
    pi = parse_interleaver(out_path.read_text())
    assert pi.mapping.tolist() == [0, 3, 2, 5, 4, 7, 6, 1]
    code, out, _ = run(capsys, "materialize", "poly", "8", "1,2")
    assert parse_interleaver(out) == pi


def test_srandom(capsys, tmp_path):
    code, out, _ = run(capsys, "--seed", "1", "srandom", "256", "11")
    assert code == 0
    assert satisfies_s_constraint(parse_interleaver(out), 11)
    assert manifest_of(out)["seed"] == 1
    code, _, err = run(capsys, "srandom", "16", "8", "--max-attempts", "3")
    assert code == 2


def test_dmin_bound(capsys):
    code, out, _ = run(capsys, "dmin-bound", "qpp", "256", "159", "64")
    assert code == 0 and csv_rows(out)[0]["dmin_upper_bound"] == "27"
    code, _, _ = run(capsys, "dmin-bound", "qpp", "256", "159", "64", "--max-weight", "5")
    assert code == 2


def test_partrace(capsys):
    code, out, _ = run(capsys, "partrace", "2", "qpp", "8", "1", "2", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert [t["direction"] for t in doc["traces"]] == ["interleave", "deinterleave"]
    assert doc["traces"][0]["steps"][3]["accesses"] == [{"proc": 0, "bank": 1, "addr": 1},
                                                        {"proc": 1, "bank": 0, "addr": 1}]
    code, out, _ = run(capsys, "partrace", "2", "file", str(DATA / "counterexample4.txt"),
                       "--direction", "interleave")
    assert code == 1
    assert len(csv_rows(out)) == 4


# --- fer -------------------------------------------------------------------

def write_config(tmp_path, **kv):
    path = tmp_path / "fer.cfg"
    path.write_text("# sweep\n" + "".join(f"{k} = {v}\n" for k, v in kv.items()))
    return str(path)


def test_fer_noiseless(capsys, tmp_path):
    cfg = write_config(tmp_path, interleaver="qpp 256 159 64", ebn0_db="1.0", target_errors=100,
                       max_frames=10, noiseless="true")
    code, out, _ = run(capsys, "fer", cfg)
    (row,) = csv_rows(out)
    assert code == 0
    assert row["frames"] == "10" and row["frame_errors"] == "0" and float(row["fer"]) == 0.0
    assert list(row) == ["ebn0_db", "frames", "frame_errors", "bit_errors", "fer", "ber", "ci95"]


def test_fer_missing_keys(capsys, tmp_path):
    cfg = write_config(tmp_path, interleaver="qpp 256 159 64", ebn0_db="1.0")
    code, _, err = run(capsys, "fer", cfg)
    assert code == 2
    assert "target_errors" in err and "max_frames" in err


def test_fer_unreadable_config(capsys, tmp_path):
    code, _, _ = run(capsys, "fer", str(tmp_path / "nope.cfg"))
    assert code == 2


@pytest.mark.slow
def test_fer_interleaver_gain(capsys, tmp_path):
    fers = {}
    for N, f1 in ((256, 159), (1024, 31)):
        cfg = write_config(tmp_path, interleaver=f"qpp {N} {f1} 64", ebn0_db="0.6",
                           target_errors=30, max_frames=4000, seed=2)
        code, out, _ = run(capsys, "fer", cfg)
        fers[N] = float(csv_rows(out)[0]["fer"])
    assert fers[1024] < fers[256]


def test_parse_grid_and_config():
    assert parse_grid("0:1:0.2") == [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
    assert parse_grid("1.5, 2") == [1.5, 2.0]
    with pytest.raises(UsageError):
        parse_grid("a:b")
    with pytest.raises(UsageError):
        parse_fer_config("interleaver = identity 8\nbogus = 1\n")
    with pytest.raises(UsageError):
        parse_fer_config("no equals sign here\n")


# --- determinism -----------------------------------------------------------

def test_reruns_byte_identical(tmp_path):
    cfg = write_config(tmp_path, interleaver="qpp 256 159 64", ebn0_db="0.5:1.0:0.5",
                       target_errors=5, max_frames=40, seed=3, iterations=4)
    runs = [
        (["fer", cfg], "fer"),
        (["srandom", "128", "6", "--seed", "4"], "srandom"),
        (["partrace", "16", "qpp", "256", "159", "64", "--format", "json"], "partrace"),
    ]
    for argv, name in runs:
        outs = []
        for k in range(2):
            path = tmp_path / f"{name}{k}.out"
            assert main(argv + ["--out", str(path)]) in (0, 1)
            outs.append(path.read_bytes())
        assert outs[0] == outs[1], name


def test_manifest_records_parameters(capsys):
    code, out, _ = run(capsys, "--seed", "9", "spread", "qpp", "256", "159", "64")
    man = manifest_of(out)
    assert man["subcommand"] == "spread" and man["seed"] == 9
    assert man["params"]["source"] == {"kind": "qpp", "N": 256, "f1": 159, "f2": 64}
    assert man["timestamp"] == "2023-11-14T22:13:20Z"
    assert RunManifest.create("x", {}, 0).version == man["version"]
