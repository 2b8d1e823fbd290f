from pathlib import Path

from switchq.cli import main


def test_region_command_writes_sections(tmp_path):
    out = tmp_path / "region.csv"
    assert main(["region", "--epsilon", "0.25", "--out", str(out)]) == 0
    text = out.read_text()
    assert text.count("# region:") == 3
    assert "corner_id,r1,r2" in text and "a1,a2,b" in text


def test_region_check_passes(tmp_path):
    out = tmp_path / "region.csv"
    assert main(["region", "--epsilon", "0.3", "--out", str(out), "--check"]) == 0


def test_sweep_command_deterministic_bytes(tmp_path):
    args = ["sweep", "--epsilon", "0.4", "--policy", "fbdc", "--T", "10",
            "--step", "0.1", "--horizon", "5000", "--seed", "3"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    header = a.read_text().splitlines()[0]
    assert header == "epsilon,lambda1,lambda2,policy,T,k,q_avg,rate1,rate2,stable"


def test_saturated_command_with_check(tmp_path):
    out = tmp_path / "sat.csv"
    code = main(["saturated", "--epsilon", "0.25", "--corner", "b2",
                 "--horizon", "200000", "--seed", "1", "--out", str(out), "--check"])
    assert code == 0
    assert "corner_b2" in out.read_text()


def test_gap_command(tmp_path):
    out = tmp_path / "gap.csv"
    assert main(["gap", "--epsilon", "0.25", "--corner", "b2", "--T-list", "10,200",
                 "--horizon", "50000", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "T,rate_deficit"
    assert len(lines) == 3


def test_iid_command_with_check(tmp_path):
    out = tmp_path / "iid.csv"
    code = main(["iid", "--rho", "0.6,1.2", "--horizon", "40000",
                 "--seed", "2", "--out", str(out), "--check"])
    assert code == 0
    assert len(out.read_text().splitlines()) == 5


def test_trace_command(tmp_path):
    out = tmp_path / "trace.csv"
    assert main(["trace", "--epsilon", "0.25", "--lambda1", "0.2", "--lambda2", "0.2",
                 "--policy", "fbdc", "--T", "10", "--horizon", "200",
                 "--trace-every", "1", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "slot,m,c1,c2,q1,q2,action,departed1,departed2"
    assert len(lines) == 201


def test_config_file_defaults_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("epsilon = 0.25\nlambda1 = 0.2\nlambda2 = 0.2\npolicy = exhaustive\nhorizon = 300\n")
    out = tmp_path / "t.csv"
    assert main(["trace", "--config", str(cfg), "--trace-every", "1", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 301
    # an explicit flag beats the config value
    assert main(["trace", "--config", str(cfg), "--horizon", "100",
                 "--trace-every", "1", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 101


def test_config_errors_exit_one(tmp_path):
    assert main(["sweep", "--policy", "mystery", "--epsilon", "0.3"]) == 1
    assert main(["saturated", "--epsilon", "0.25"]) == 1  # no corner or policy id
    missing = tmp_path / "nope.cfg"
    assert main(["trace", "--config", str(missing), "--lambda1", "0", "--lambda2", "0"]) == 1


def test_psi_command_small_grid(tmp_path):
    out = tmp_path / "psi.csv"
    assert main(["psi", "--eps-step", "0.01", "--ratio-points", "40",
                 "--out", str(out), "--check"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "case,region,bound,minimum,argmin_epsilon,argmin_ratio"
    assert len(lines) == 8
