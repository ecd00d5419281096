import json
import subprocess
import sys

import pytest

from twisted_targets import cli
from twisted_targets.config import ConfigError, load_config
from twisted_targets.experiments import run, write_report

BASE = {"schema_version": 1, "kind": "critical-exponent"}


def tables_of(out):
    return {p.name: p.read_bytes() for p in sorted(out.glob("*.csv"))}


def test_load_minimal():
    cfg = load_config(BASE)
    assert cfg.kind == "critical-exponent" and cfg.seed == 0
    assert [n for n, _ in cfg.windows] == ["full", "q0", "q1", "q2", "q3"]


@pytest.mark.parametrize("raw,path", [
    ({"schema_version": 1, "kind": "bogus"}, "kind"),
    ({**BASE, "psi": {"family": "power"}}, "psi"),
    ({**BASE, "psi": {"sigma": 2}}, "psi"),
    ({**BASE, "blocks": {"exponents": [0, 40]}}, "blocks/exponents"),
    ({**BASE, "blocks": {"exponents": [0, 1, 2], "use": [5]}}, "blocks/use"),
    ({**BASE, "schedule": [[100, 10]]}, "schedule/0"),
    ({**BASE, "windows": [[[0.3, 0.3]]]}, "windows"),
    ({**BASE, "alpha": {"values": ["banana"]}}, "alpha"),
    ({**BASE, "seed": -1}, "seed"),
    ({**BASE, "extra": 1}, ""),
])
def test_config_errors_carry_path(raw, path):
    with pytest.raises(ConfigError) as exc:
        load_config(raw)
    assert exc.value.path == path


def test_empty_config_rejected(tmp_path):
    with pytest.raises(ConfigError):
        load_config({})
    p = tmp_path / "empty.json"
    p.write_text("{}")
    assert cli.main(["run", "--config", str(p)]) == 2


def test_missing_psi_is_config_error(tmp_path):
    assert cli.main(["tail-union", "--out", str(tmp_path)]) == 2


def test_critical_exponent_table(tmp_path):
    assert cli.main(["critical-exponent", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["schema_version"] == 1
    s = [row[1] for row in rep["tables"]["critical_exponent"]["rows"]]
    assert s == [1.0, 1 / 1.5, 0.5, 1 / 3]
    lines = (tmp_path / "critical_exponent.csv").read_text().splitlines()
    assert lines[0] == "psi,s_star,at_critical"


def test_independence_run(tmp_path):
    code = cli.main(["independence", "--psi", "const:0.3", "--sequence", "poly:2", "--assert",
                     "--out", str(tmp_path)])
    assert code == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert len(rep["tables"]["independence"]["rows"]) == 100
    assert max(r[4] for r in rep["tables"]["independence"]["rows"]) <= 1e-10


def test_verdict_failure_exit_code(tmp_path):
    # psi = n^-2 is far too small for a full-measure tail union
    args = ["tail-union", "--psi", "power:2", "--out", str(tmp_path), "--set", "schedule=[[10,1000]]"]
    assert cli.main(args) == 0
    assert cli.main(args + ["--assert"]) == 3


def test_plot_outputs(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"schema_version": 1, "kind": "discrepancy", "params": {"Ns": [10, 100]},
                               "outputs": {"plot": True}}))
    assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "plot" / "discrepancy.csv").exists()


def test_determinism_across_threads(tmp_path):
    raw = {"schema_version": 1, "kind": "moments", "seed": 99, "psi": {"family": "power", "sigma": 0.9},
           "sequence": {"family": "polynomial", "d": 2},
           "alpha": {"sample": {"measure": {"kind": "lebesgue"}, "count": 6}},
           "blocks": {"use": [5, 6, 7]}}
    outs = []
    for k, threads in enumerate((1, 1, 3)):
        out = tmp_path / str(k)
        write_report(run(load_config(raw), threads=threads), out)
        outs.append(out)
    first = tables_of(outs[0])
    assert first and all(tables_of(o) == first for o in outs[1:])
    strip = [json.loads((o / "report.json").read_text()) for o in outs]
    for r in strip:
        r.pop("timing")
    assert strip[0] == strip[1] == strip[2]


def test_seed_changes_samples():
    raw = {"schema_version": 1, "kind": "hit-count", "psi": {"family": "power", "sigma": 0.8},
           "alpha": {"sample": {"measure": {"kind": "lebesgue"}, "count": 2}}, "params": {"N": 100}}
    a = run(load_config(raw, seed=1)).tables["hit_count"].rows
    b = run(load_config(raw, seed=2)).tables["hit_count"].rows
    assert a != b


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "twisted_targets", "separation", "--sequence", "poly:2",
                           "--set", "params.N=200", "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    rows = (tmp_path / "separation.csv").read_text().splitlines()
    assert rows[0] == "N,theta,c" and rows[1].startswith("200,")


def test_bad_flag_is_usage_error():
    assert cli.main(["orbit", "--no-such-flag"]) == 2
    assert cli.main([]) == 2
