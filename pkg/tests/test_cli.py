import subprocess
import sys

import pytest

from netlistc.cli import main

from conftest import COUNTER, REG_AND, RING, SELF_LOOP


@pytest.fixture
def reg_and(tmp_path):
    p = tmp_path / "reg_and.v"
    p.write_text(REG_AND)
    return p


def test_compile_writes_outputs(tmp_path, reg_and):
    out = tmp_path / "build"
    assert main(["compile", str(reg_and), "-o", str(out), "--emit-c", "--dump-schedule", "--dump-dfg"]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["reg_and.c", "reg_and.dot", "reg_and.h", "reg_and.ll", "reg_and.schedule.tsv"]
    assert 'source_filename = "reg_and.v"' in (out / "reg_and.ll").read_text()


def test_compile_without_c(tmp_path, reg_and):
    assert main(["compile", str(reg_and), "-o", str(tmp_path)]) == 0
    assert not (tmp_path / "reg_and.c").exists()


@pytest.mark.parametrize("src, witness", [(RING, "i0 -> i1 -> i2 -> i0"), (SELF_LOOP, "g -> g")])
def test_loop_exit_code_and_witness(tmp_path, capsys, src, witness):
    p = tmp_path / "loop.v"
    p.write_text(src)
    assert main(["compile", str(p), "-o", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "combinational loop" in err and witness in err


def test_parse_error_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.v"
    p.write_text("module m (a); input a; BOGUS u (.I(a)); endmodule\n")
    assert main(["compile", str(p)]) == 1
    assert capsys.readouterr().err.startswith(f"{p}:1:")


def test_missing_file_exit_code(tmp_path, capsys):
    assert main(["compile", str(tmp_path / "nope.v")]) == 3
    assert "nope.v" in capsys.readouterr().err


def test_sim_transcript_and_verdict(tmp_path, capsys, reg_and):
    vec = tmp_path / "v.csv"
    vec.write_text("clk,a,b,expect_out\n0,1,1,0\n1,1,1,0\n0,0,0,1\n")
    assert main(["sim", str(reg_and), "--vectors", str(vec)]) == 0
    cap = capsys.readouterr()
    assert cap.out.splitlines() == ["pass,out,verdict", "0,0,pass", "1,0,pass", "2,1,pass"]
    assert "RESULT pass=3 fail=0" in cap.err


def test_sim_failure_exit_code(tmp_path, capsys, reg_and):
    vec = tmp_path / "v.csv"
    vec.write_text("clk,a,b,expect_out\n1,1,1,1\n")
    assert main(["sim", str(reg_and), "--vectors", str(vec), "--engine", "oracle"]) == 1
    assert "RESULT pass=0 fail=1" in capsys.readouterr().err


def test_sim_bad_vectors(tmp_path, capsys, reg_and):
    vec = tmp_path / "v.csv"
    vec.write_text("clk,a\n0,1\n")
    assert main(["sim", str(reg_and), "--vectors", str(vec)]) == 1
    assert "no stimulus" in capsys.readouterr().err


def test_sim_bench_bundled(capsys):
    assert main(["sim", "--bench", "andreg"]) == 0
    assert "8/8 pass" in capsys.readouterr().err


def test_sim_bench_sampled(tmp_path, capsys):
    out = tmp_path / "t.csv"
    assert main(["sim", "--bench", "mod3", "--sample", "50", "--seed", "2", "-o", str(out)]) == 0
    assert "50/50 pass" in capsys.readouterr().err
    assert out.read_text().startswith("pass,case,r,verdict")


def test_check_bench(capsys):
    assert main(["check", "--bench", "popcount"]) == 0
    out = capsys.readouterr().out
    assert "passes agree" in out and "RESULT pass=" in out


def test_check_fuzz(tmp_path, capsys):
    assert main(["check", "--fuzz", "--seed", "4", "--cells", "25", "-o", str(tmp_path / "f.v")]) == 0
    assert (tmp_path / "f.v").read_text().startswith("module fuzz")


def test_dump_defaults_to_schedule(tmp_path, capsys):
    p = tmp_path / "c.v"
    p.write_text(COUNTER)
    assert main(["dump", str(p)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("index\tinstance\tmode\tstart")
    assert "reinserted-original" in out


def test_dump_scc(tmp_path, capsys):
    p = tmp_path / "c.v"
    p.write_text(COUNTER)
    assert main(["dump", str(p), "--dump-scc"]) == 0
    assert "r0" in capsys.readouterr().out


def test_list(capsys):
    assert main(["list"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 8


def test_config_supplies_defaults(tmp_path, capsys):
    conf = tmp_path / "c.toml"
    conf.write_text('bench = "mod3"\nsample = 20\nseed = 1\n')
    assert main(["--config", str(conf), "sim"]) == 0
    assert "20/20 pass" in capsys.readouterr().err
    # an explicit flag wins, even when it equals the default
    assert main(["--config", str(conf), "sim", "--sample", "10"]) == 0
    assert "10/10 pass" in capsys.readouterr().err


def test_config_unknown_key(tmp_path, capsys):
    conf = tmp_path / "c.toml"
    conf.write_text("bogus = 1\n")
    assert main(["--config", str(conf), "list"]) == 1
    assert "unknown key" in capsys.readouterr().err


def test_unknown_bench(capsys):
    assert main(["sim", "--bench", "nope"]) == 1
    assert "unknown benchmark" in capsys.readouterr().err


def test_console_entry_point(reg_and, tmp_path):
    proc = subprocess.run([sys.executable, "-m", "netlistc.cli", "compile", str(reg_and), "-o", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
