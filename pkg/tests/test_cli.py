import re
import subprocess
import sys

import pytest

from gridbalance.cli import main
from gridbalance.scenario import load_scenario, paper_preset_text

SUMMARY = re.compile(
    r"^mode=(static|dynamic) slots=(\d+) equilibrium=(\d+|none) final_total=(\S+) "
    r"final_price_mean=(\S+) constraint_ok=(true|false)$"
)


@pytest.fixture
def preset_file(tmp_path):
    assert main(["preset", "--out", str(tmp_path)]) == 0
    return tmp_path / "paper_preset.cfg"


def parse_summary(text):
    m = SUMMARY.match(text.strip())
    assert m, text
    return m.groups()


def test_preset_writes_reference_file(preset_file):
    sc = load_scenario(preset_file)
    assert len(sc.initial_demand) == 10
    assert sum(sc.initial_demand) == pytest.approx(765.6, abs=1e-9)
    assert preset_file.read_text() == paper_preset_text()


def test_run_static_preset(preset_file, tmp_path, capsys):
    out = tmp_path / "run"
    code = main(["run", "--scenario", str(preset_file), "--mode", "static", "--out", str(out)])
    assert code == 0
    mode, slots, eq, total, price_mean, ok = parse_summary(capsys.readouterr().out)
    assert mode == "static" and eq != "none"
    assert 693 <= float(total) <= 707
    assert 0.95 <= float(price_mean) <= 1.05
    assert sorted(p.name for p in out.iterdir()) == [
        "cutdown.csv", "demands.csv", "prices.csv", "totals.csv"]


def test_run_with_svg(preset_file, tmp_path, capsys):
    out = tmp_path / "svg"
    assert main(["run", "--scenario", str(preset_file), "--out", str(out), "--svg"]) == 0
    assert len(list(out.glob("*.svg"))) == 4


def test_mode_flag_overrides_config(preset_file, tmp_path, capsys):
    text = preset_file.read_text().replace("protocol.max_slots = 500", "protocol.max_slots = 20")
    preset_file.write_text(text)
    assert main(["run", "--scenario", str(preset_file), "--mode", "dynamic",
                 "--out", str(tmp_path / "d")]) == 0
    assert parse_summary(capsys.readouterr().out)[0] == "dynamic"
    assert main(["run", "--scenario", str(preset_file), "--out", str(tmp_path / "s")]) == 0
    assert parse_summary(capsys.readouterr().out)[0] == "static"


def test_validate_length_mismatch(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text(paper_preset_text().replace(", 57, 72", ", 57"))
    assert main(["validate", "--scenario", str(bad)]) == 2
    assert "agents.wtp" in capsys.readouterr().err


def test_validate_ok(preset_file, capsys):
    assert main(["validate", "--scenario", str(preset_file)]) == 0
    assert capsys.readouterr().out.startswith("ok: n=10")


def test_usage_errors_exit_1(capsys):
    assert main([]) == 1
    assert main(["run"]) == 1
    assert main(["frobnicate"]) == 1
    assert main(["run", "--scenario", "x.cfg", "--mode", "async"]) == 1


def test_missing_file_is_runtime_error(tmp_path, capsys):
    assert main(["validate", "--scenario", str(tmp_path / "nope.cfg")]) == 3


def test_averaging_failure_exit_3(preset_file, tmp_path, capsys):
    preset_file.write_text(preset_file.read_text() + "protocol.avg_max_rounds = 1\n")
    assert main(["run", "--scenario", str(preset_file), "--out", str(tmp_path / "o")]) == 3
    assert "did not converge" in capsys.readouterr().err
    assert (tmp_path / "o" / "totals.csv").exists()


def test_gen_topology_fragment(tmp_path, capsys):
    assert main(["gen-topology", "--kind", "ring", "--n", "4"]) == 0
    text = capsys.readouterr().out
    assert text.splitlines() == ["graph.n = 4", "edge = 0,1", "edge = 0,3", "edge = 1,2",
                                 "edge = 2,3"]
    out = tmp_path / "frag.cfg"
    assert main(["gen-topology", "--kind", "erdos_renyi", "--n", "8", "--p", "0.4",
                 "--seed", "3", "--out", str(out)]) == 0
    assert out.read_text().startswith("graph.n = 8\nedge = ")
    assert main(["gen-topology", "--kind", "erdos_renyi", "--n", "8"]) == 1


def test_fragment_usable_in_scenario(tmp_path, capsys):
    main(["gen-topology", "--kind", "path", "--n", "3"])
    frag = capsys.readouterr().out
    cfg = tmp_path / "s.cfg"
    cfg.write_text(frag + "agents.wtp = 1,2,3\nagents.initial_demand = 2,2,2\n"
                   "price.capacity = 10\n")
    assert main(["validate", "--scenario", str(cfg)]) == 0


def test_seed_and_sample_flags(preset_file, tmp_path, capsys):
    args = ["run", "--scenario", str(preset_file), "--sample-initial", "--seed", "11"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    first = (tmp_path / "a" / "demands.csv").read_bytes()
    assert first == (tmp_path / "b" / "demands.csv").read_bytes()
    row1 = first.decode().splitlines()[1].split(",")[1:]
    assert all(50 <= float(v) < 100 for v in row1)


def test_module_entry_point(preset_file, tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "gridbalance", "run", "--scenario", str(preset_file),
         "--out", str(tmp_path / "m")],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert parse_summary(proc.stdout)[2] != "none"
