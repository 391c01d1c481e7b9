import hashlib
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from steiner.cli import main
from steiner.config import ConfigError, load_config, parse_config
from steiner.generators import cone
from steiner.grid import Grid, save

REPO = Path(__file__).resolve().parents[1]

CONE = """
kind = "polya_szego"
[grid]
dims = [32, 32]
extent = 2.0
k = 1
[generator]
name = "cone"
params = { radius = 0.8 }
[integrand]
type = "power"
alpha = 0.0
beta = 1.0
p = 2.0
[check]
epsilon = 1e-6
[outputs]
csv = "out/gap.csv"
json = "out/gap.json"
slice_csv = "out/slice.csv"
svg = "out/slice.svg"
"""

# >2048 columns so that several chunks run in parallel
BIG = """
kind = "polya_szego"
seed = 5
[grid]
dims = [96, 96, 16]
extent = 1.0
k = 1
[generator]
name = "random_smooth"
[integrand]
type = "random_affine"
pieces = 5
[check]
epsilon = 1.0
[outputs]
csv = "out/big.csv"
json = "out/big.json"
slice_csv = "out/big_slice.csv"
svg = "out/big_slice.svg"
"""


def _write(tmp_path, text, name="c.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def _run(args):
    return main([str(a) for a in args])


# config validation ---------------------------------------------------------


def test_unknown_key_is_named(tmp_path, capsys):
    p = _write(tmp_path, CONE.replace("k = 1", "k = 1\ncells = 3"))
    assert _run(["run", p]) == 1
    assert "grid.cells" in capsys.readouterr().err


def test_unknown_top_level_and_kind(tmp_path):
    with pytest.raises(ConfigError) as exc:
        parse_config({"kind": "nope", "grid": {}, "generator": {}}, tmp_path)
    assert exc.value.key == "kind"
    with pytest.raises(ConfigError) as exc:
        load_config(_write(tmp_path, "colour = 1\n" + CONE))
    assert exc.value.key == "colour"


def test_section_not_used_by_kind(tmp_path):
    with pytest.raises(ConfigError) as exc:
        load_config(_write(tmp_path, CONE + "\n[sweep]\nbase = \"polya_szego\"\nsizes = [8]\n"))
    assert exc.value.key.startswith("sweep")


def test_missing_generator_file(tmp_path, capsys):
    text = CONE.replace('name = "cone"\nparams = { radius = 0.8 }', 'file = "missing.stnr1"')
    assert _run(["run", _write(tmp_path, text)]) == 1
    assert "generator.file" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert _run(["run", tmp_path / "none.toml"]) == 1


def test_invalid_toml(tmp_path):
    assert _run(["run", _write(tmp_path, "kind = \n")]) == 1


# run --------------------------------------------------------------------------


def test_run_cone_writes_outputs(tmp_path, capsys):
    assert _run(["run", _write(tmp_path, CONE)]) == 0
    out = tmp_path / "out"
    d = json.loads((out / "gap.json").read_text())
    assert d["gap"] >= -1e-6
    assert (out / "gap.csv").read_text().splitlines()[0] == "functional,scheme,h,value_original,value_symmetrized,gap"
    assert (out / "slice.csv").read_text().startswith("i,j,u,u_sigma")
    assert (out / "slice.svg").read_text().lstrip().startswith("<?xml")
    assert "gap" in capsys.readouterr().out


def test_csv_numbers_match_library(tmp_path):
    from steiner.diagnostics import polya_szego_report
    from steiner.integrand import PowerIntegrand

    _run(["run", _write(tmp_path, CONE)])
    row = (tmp_path / "out" / "gap.csv").read_text().splitlines()[1].split(",")
    rep = polya_szego_report(cone(Grid((32, 32), (2 / 32, 2 / 32), 1), radius=0.8), PowerIntegrand(0, 1, 2))
    assert [float(x) for x in row[2:]] == [rep.h, rep.value_original, rep.value_symmetrized, rep.gap]


def test_run_from_file(tmp_path):
    save(cone(Grid.uniform((16, 16), 2.0, 1), radius=0.5), tmp_path / "u.stnr1")
    text = CONE.replace('name = "cone"\nparams = { radius = 0.8 }', 'file = "u.stnr1"')
    text = text.replace("[grid]\ndims = [32, 32]\nextent = 2.0\nk = 1\n", "")
    assert _run(["run", _write(tmp_path, text)]) == 0


def test_run_gap_violation_exits_2(tmp_path, capsys):
    # the lattice defect of an off-centre cone in codimension two is negative
    text = CONE.replace("dims = [32, 32]", "dims = [32, 32, 32]").replace("k = 1", "k = 2")
    text = text.replace("{ radius = 0.8 }", "{ radius = 0.3, center = [-0.0711, 0.1502], x_slope = 0.5 }")
    text = text.replace("epsilon = 1e-6", "epsilon = 1e-9")
    assert _run(["run", _write(tmp_path, text)]) == 2
    assert "invariant violated" in capsys.readouterr().err
    assert json.loads((tmp_path / "out" / "gap.json").read_text())["gap"] < -1e-9


def test_run_repository_configs(tmp_path):
    for cfg in sorted((REPO / "configs").glob("*.toml")):
        if cfg.name == "sweep_offcenter.toml":
            continue
        dst = tmp_path / cfg.name
        dst.write_text(cfg.read_text())
        assert _run(["run", dst]) == 0, cfg.name


def test_sweep_csv_and_svg(tmp_path):
    text = (REPO / "configs" / "sweep_offcenter.toml").read_text().replace("[32, 64, 128, 256]", "[16, 32]")
    assert _run(["run", _write(tmp_path, text)]) == 0
    rows = (tmp_path / "out" / "sweep.csv").read_text().splitlines()
    assert rows[0].startswith("cells,functional") and len(rows) == 3
    assert (tmp_path / "out" / "sweep.svg").exists()


def test_no_temporary_files_left(tmp_path):
    _run(["run", _write(tmp_path, CONE)])
    assert not [p for p in (tmp_path / "out").iterdir() if p.name.endswith(".tmp")]


# plot / inspect / selftest -------------------------------------------------------


def test_plot_kinds(tmp_path, capsys):
    _run(["run", _write(tmp_path, CONE)])
    assert _run(["plot", tmp_path / "out" / "slice.csv", "--kind", "heatmap", "-o", tmp_path / "h.svg"]) == 0
    assert (tmp_path / "h.svg").exists()
    # wrong columns for the requested kind
    assert _run(["plot", tmp_path / "out" / "slice.csv", "--kind", "gap"]) == 1
    assert _run(["plot", tmp_path / "nope.csv", "--kind", "gap"]) == 1


def test_plot_is_deterministic(tmp_path):
    _run(["run", _write(tmp_path, CONE)])
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    _run(["plot", tmp_path / "out" / "slice.csv", "--kind", "heatmap", "-o", a])
    _run(["plot", tmp_path / "out" / "slice.csv", "--kind", "heatmap", "-o", b])
    assert a.read_bytes() == b.read_bytes()


def test_inspect(tmp_path, capsys):
    p = tmp_path / "u.stnr1"
    save(cone(Grid((3, 3), (1.0, 1.0), 1), radius=2.0), p)
    assert _run(["inspect", p]) == 0
    out = capsys.readouterr().out
    assert "kind: function" in out and "dims: [3, 3]" in out and "total bytes: 107" in out
    bad = tmp_path / "bad.stnr1"
    bad.write_bytes(b"nonsense")
    assert _run(["inspect", bad]) == 1
    assert _run(["inspect", tmp_path / "missing"]) == 1


def test_selftest(capsys):
    assert _run(["selftest", "--cases", "20"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 12 and "12/12 checks passed" in out


# threads -----------------------------------------------------------------------


def _sha(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def test_outputs_identical_across_thread_counts(tmp_path):
    digests = set()
    for threads in ("1", "2", "8"):
        d = tmp_path / threads
        d.mkdir()
        cfg = _write(d, BIG)
        env = {**os.environ, "STEINER_THREADS": threads}
        r = subprocess.run([sys.executable, "-m", "steiner.cli", "run", str(cfg)], env=env,
                           capture_output=True, text=True)
        assert r.returncode == 0, r.stderr
        out = d / "out"
        digests.add(tuple(_sha(out / n) for n in ("big.csv", "big.json", "big_slice.csv", "big_slice.svg"))
                    + (r.stdout,))
    assert len(digests) == 1


def test_bad_thread_variable(tmp_path):
    env = {**os.environ, "STEINER_THREADS": "zero"}
    r = subprocess.run([sys.executable, "-m", "steiner.cli", "run", str(_write(tmp_path, BIG))],
                       env=env, capture_output=True, text=True)
    assert r.returncode != 0
