import csv
import json
import random

import pytest

from aifvmc.cli import main
from aifvmc.codec import SourceDistribution
from aifvmc.errors import InputError
from aifvmc.generate import random_problem, random_source
from aifvmc.io import dumps_problem, dumps_source, loads_problem, loads_source


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


# -- file formats --------------------------------------------------------------


def test_problem_file_roundtrip():
    rng = random.Random(1)
    for _ in range(30):
        p = random_problem(rng)
        text = dumps_problem(p)
        assert loads_problem(text) == p
        assert dumps_problem(loads_problem(text)) == text


def test_source_file_roundtrip():
    rng = random.Random(2)
    for _ in range(10):
        s = random_source(rng)
        text = dumps_source(s)
        assert loads_source(text) == s and dumps_source(loads_source(text)) == text


def test_files_never_hold_floats(data_dir):
    doc = json.loads((data_dir / "four_chain.json").read_text())
    for states in doc["types"]:
        for s in states:
            assert isinstance(s["reward"], str) and all(isinstance(v, str) for v in s["q"])
    bad = {"m": 2, "types": [[{"reward": 1.0, "q": ["1/2", "1/2"]}], [{"reward": "1", "q": ["1", "0"]}]]}
    with pytest.raises(InputError):
        loads_problem(json.dumps(bad))
    with pytest.raises(InputError):
        loads_source('{"b": 1, "symbols": ["a", "b"], "probs": [0.5, 0.5]}')


@pytest.mark.parametrize(
    "text",
    ["[]", '{"m": 2}', '{"m": "2", "types": []}', '{"m": 2, "types": [[{"reward": "1"}]]}', "nope"],
)
def test_malformed_problem_files(text):
    with pytest.raises(InputError):
        loads_problem(text)


# -- solve-mcmc ----------------------------------------------------------------


def test_solve_mcmc(capsys, data_dir, tmp_path):
    problem = data_dir / "four_chain.json"
    code, out, _ = run(capsys, "solve-mcmc", "--problem", problem)
    assert code == 0 and out.strip() == "chain=[1,1] x=[3/5] cost=6/5"
    code, out2, _ = run(capsys, "solve-mcmc", "--problem", problem, "--algo", "brute")
    assert code == 0 and out2.split()[-1] == "cost=6/5"
    trace = tmp_path / "trace.csv"
    code, _, _ = run(capsys, "solve-mcmc", "--problem", problem, "--start", "0,0", "--trace", trace)
    rows = list(csv.reader(trace.open()))
    assert rows[0] == ["step", "c", "p1"] and rows[-1][1:] == ["6/5", "3/5"]


def test_solve_mcmc_bad_input(capsys, data_dir, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "solve-mcmc", "--problem", bad)[0] == 1
    assert run(capsys, "solve-mcmc", "--problem", tmp_path / "missing.json")[0] == 1
    assert run(capsys, "solve-mcmc", "--problem", data_dir / "q0_zero.json")[0] == 1
    assert run(capsys, "solve-mcmc", "--problem", data_dir / "four_chain.json", "--start", "0,9")[0] == 1
    assert run(capsys, "solve-mcmc")[0] == 1


# -- solve-aifv ----------------------------------------------------------------


def test_solve_aifv_slice_and_iterative_agree(capsys, data_dir, tmp_path):
    source = data_dir / "source7.json"
    out_code = tmp_path / "code.json"
    c1, out1, _ = run(capsys, "solve-aifv", "--source", source, "--algo", "slice", "--out", out_code)
    c2, out2, _ = run(capsys, "solve-aifv", "--source", source, "--algo", "iterative")
    c3, out3, _ = run(capsys, "solve-aifv", "--source", source, "--algo", "brute")
    assert c1 == c2 == c3 == 0
    assert out1.splitlines()[0] == out2.splitlines()[0] == out3.splitlines()[0]
    assert out1.splitlines()[0].endswith("cost=11/4")
    code, out, _ = run(capsys, "encode", "--code", out_code, "--in", "a b c d e f g")
    bits = out.strip()
    code, out, _ = run(capsys, "decode", "--code", out_code, "--in", bits, "--count", 7)
    assert out.split() == list("abcdefg")


def test_solve_aifv_gates(capsys, data_dir):
    source = data_dir / "source7.json"
    code, _, err = run(capsys, "solve-aifv", "--source", source, "--m", 2, "--algo", "slice")
    assert code == 1 and "slice requires m=3" in err
    code, _, err = run(capsys, "solve-aifv", "--source", source, "--max-nodes", 4)
    assert code == 1 and "cap too small" in err


def test_solve_aifv_small_source_warns(capsys, data_dir):
    code, out, err = run(capsys, "solve-aifv", "--source", data_dir / "source4.json", "--algo", "slice")
    assert "warning" in err
    if code == 0:
        iterative = run(capsys, "solve-aifv", "--source", data_dir / "source4.json")[1]
        assert out.splitlines()[0] == iterative.splitlines()[0]
    else:
        assert code == 1 and "precondition" in err


def test_slice_trace(capsys, data_dir, tmp_path):
    trace = tmp_path / "search.csv"
    run(capsys, "solve-aifv", "--source", data_dir / "source7.json", "--algo", "slice", "--trace", trace)
    rows = list(csv.reader(trace.open()))
    assert rows[0] == ["iteration", "l", "r", "e0", "e1"]
    assert all("/" in v for v in rows[1][1:])


# -- encode / decode -----------------------------------------------------------


def test_encode_decode_example(capsys, data_dir, tmp_path):
    code_file = data_dir / "aifv3_example.json"
    assert run(capsys, "encode", "--code", code_file, "--in", "c b a b")[1].strip() == "0001010"
    assert run(capsys, "decode", "--code", code_file, "--in", "0001010", "--count", 4)[1].strip() == "c b a b"
    assert run(capsys, "decode", "--code", code_file, "--in", "0001010", "--count", 3)[0] == 1
    assert run(capsys, "decode", "--code", code_file, "--in", "0001010")[0] == 1
    assert run(capsys, "encode", "--code", code_file, "--in", "c q")[0] == 1

    msg = tmp_path / "msg.txt"
    msg.write_text("b\n")
    blob = tmp_path / "msg.bin"
    assert run(capsys, "encode", "--code", code_file, "--input-file", msg, "--binary", "--out", blob)[0] == 0
    assert blob.read_bytes()[:8] == (1).to_bytes(8, "big")
    assert run(capsys, "decode", "--code", code_file, "--input-file", blob, "--binary")[1].strip() == "b"


def test_decode_rejects_invalid_code_file(capsys, data_dir):
    assert run(capsys, "decode", "--code", data_dir / "aifv3_mutated.json", "--in", "1", "--count", 1)[0] == 1


# -- envelope ------------------------------------------------------------------


def test_envelope_table(capsys, data_dir, tmp_path):
    out_csv = tmp_path / "env.csv"
    code, _, _ = run(capsys, "envelope", "--problem", data_dir / "four_chain.json", "--grid", 5, "--out", out_csv)
    rows = list(csv.DictReader(out_csv.open()))
    assert code == 0 and len(rows) == 6
    hit = [r for r in rows if r["x1"] == "3/5"]
    assert hit and hit[0]["g0"] == hit[0]["g1"] == hit[0]["h"] == "6/5"
    assert hit[0]["h_approx"].startswith("≈")


def test_envelope_single_point(capsys, data_dir):
    code, out, _ = run(capsys, "envelope", "--problem", data_dir / "four_chain.json", "--grid", 0, "--box", "0,0")
    rows = list(csv.DictReader(out.splitlines()))
    assert len(rows) == 1 and rows[0]["g0"] == "3/4" and rows[0]["g1"] == "3/2"


def test_envelope_gates(capsys, data_dir, tmp_path):
    p4 = tmp_path / "p4.json"
    p4.write_text(dumps_problem(random_problem(random.Random(0), m=4)))
    code, _, err = run(capsys, "envelope", "--problem", p4)
    assert code == 1 and "m ≤ 3" in err
    assert run(capsys, "envelope", "--problem", data_dir / "four_chain.json", "--box", "1,0")[0] == 1
    assert run(capsys, "envelope", "--problem", data_dir / "four_chain.json", "--box", "0,1,0,1")[0] == 1


def test_envelope_two_dimensional(capsys, tmp_path):
    p3 = tmp_path / "p3.json"
    p3.write_text(dumps_problem(random_problem(random.Random(3), m=3)))
    code, out, _ = run(capsys, "envelope", "--problem", p3, "--grid", 3)
    assert code == 0 and len(out.strip().splitlines()) == 1 + 16


# -- verify --------------------------------------------------------------------


def test_verify_fixture_passes(capsys, data_dir, tmp_path):
    report = tmp_path / "r.json"
    code, out, _ = run(
        capsys, "verify", "--problem", data_dir / "four_chain.json", "--code", data_dir / "aifv3_example.json",
        "--trials", 2000, "--max-len", 4, "--report", report,
    )
    assert code == 0
    assert all("PASS" in line for line in out.splitlines() if not line.startswith(" "))
    assert {r["status"] for r in json.loads(report.read_text())} == {"pass"}


def test_verify_rejects_q0_zero(capsys, data_dir):
    assert run(capsys, "verify", "--problem", data_dir / "q0_zero.json")[0] == 1


def test_verify_mutated_code_fails(capsys, data_dir):
    code, out, _ = run(capsys, "verify", "--code", data_dir / "aifv3_mutated.json", "--suite", "roundtrip", "--max-len", 4)
    assert code == 2 and "counterexample" in out


def test_verify_source_with_threads(capsys, data_dir, monkeypatch):
    args = ("verify", "--source", data_dir / "source7.json", "--trials", 500, "--max-len", 3, "--seed", 7)
    single = run(capsys, *args)
    monkeypatch.setenv("AIFVMC_THREADS", "3")
    threaded = run(capsys, *args)
    assert single[0] == threaded[0] == 0
    assert single[1] == threaded[1]
    assert "boundary: PASS (80 checked" in single[1]


def test_verify_needs_input(capsys):
    assert run(capsys, "verify")[0] == 1


def test_source_with_bad_precision(tmp_path, capsys):
    src = tmp_path / "s.json"
    src.write_text('{"b": 1, "symbols": ["a", "b"], "probs": ["1/4", "3/4"]}')
    assert run(capsys, "solve-aifv", "--source", src)[0] == 1
    src.write_text(dumps_source(SourceDistribution.from_weights([1, 1], 1)))
    assert run(capsys, "solve-aifv", "--source", src, "--m", 2)[0] == 0
