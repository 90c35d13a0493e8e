import csv
import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from symvi import cli
from symvi.config import ExperimentConfig, dumps, loads
from symvi.errors import ConfigError


# ------------------------------------------------------------------ config


def test_roundtrip_example():
    text = 'case = "3.1"\nalpha = 1.3\nlo = -5.0\nhi = 5.0\nstep = 0.02\n'
    cfg = loads(text)
    assert loads(dumps(cfg)) == cfg
    assert cfg.divergence_spec().alpha == 1.3


def test_roundtrip_custom_target():
    cfg = ExperimentConfig(
        target="uniform_mixture",
        target_intervals=[[-2.0, -1.0], [1.0, 2.0]],
        target_weights=[0.5, 0.5],
        family="student_t",
        family_scale=2.0,
        family_df=3.0,
        divergence="fkl",
        out="runs/a b",
    )
    back = loads(dumps(cfg))
    assert back == cfg
    spec, p, fam = back.build()
    assert p.pdf(1.5) == 0.5 and fam.base.df == 3.0


finite = st.floats(-1e6, 1e6, allow_nan=False)


@given(
    st.one_of(st.none(), st.sampled_from(["1.1", "2.2", "4.2"])),
    st.one_of(st.none(), finite),
    st.one_of(st.none(), st.floats(1e-4, 1.0)),
    st.one_of(st.none(), st.integers(1, 10_000)),
    st.one_of(st.none(), st.lists(finite, min_size=2, max_size=2)),
    st.one_of(st.none(), st.text(st.characters(blacklist_categories=["Cs", "Cc"]), max_size=12)),
)
def test_roundtrip_property(case, alpha, step, max_iter, nup, out):
    cfg = ExperimentConfig(case=case, alpha=alpha, step=step, max_iter=max_iter, nu_prime=nup, out=out)
    assert loads(dumps(cfg)) == cfg


def test_unknown_key_has_line_number():
    with pytest.raises(ConfigError, match=r"line 3: unknown key 'stpe'"):
        loads('case = "1.1"\n# comment\nstpe = 0.1\n')


def test_tables_rejected():
    with pytest.raises(ConfigError, match="line 2: tables"):
        loads('case = "1.1"\n[sweep]\nstep = 0.1\n')


def test_type_errors():
    with pytest.raises(ConfigError, match="must be a number"):
        loads('alpha = "big"\n')
    with pytest.raises(ConfigError, match="must be an integer"):
        loads("max_iter = 2.5\n")
    with pytest.raises(ConfigError, match="cannot parse"):
        loads("alpha = \n")


def test_missing_pieces():
    with pytest.raises(ConfigError):
        ExperimentConfig().build()
    with pytest.raises(ConfigError):
        ExperimentConfig(target="p1", family="student_t", divergence="fkl").build()
    with pytest.raises(ConfigError):
        ExperimentConfig(target="p9", family="gaussian", divergence="fkl").build()


# ------------------------------------------------------------------ cli


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def _no_bad_tokens(rows):
    return all(tok.lower() not in ("nan", "inf", "-inf") for row in rows for tok in row)


def test_sweep_case_1_1(tmp_path, capsys):
    assert cli.main(["sweep", "--case", "1.1", "--out", str(tmp_path)]) == 0
    rows = _read_csv(tmp_path / "sweep_1_1.csv")
    assert rows[0] == ["nu", "divergence"] and len(rows) == 3002
    assert _no_bad_tokens(rows)
    for nu, d in rows[1:50]:
        assert d == f"{float(d):.12g}" and nu == f"{float(nu):.12g}"
    side = json.loads((tmp_path / "sweep_1_1.json").read_text())
    assert side["classification"]["label"] == "UniqueGlobalMin(0.00)"
    assert capsys.readouterr().out.strip() == "UniqueGlobalMin(0.00)"


def test_sweep_case_3_2(tmp_path, capsys):
    assert cli.main(["sweep", "--case", "3.2", "--out", str(tmp_path)]) == 0
    assert capsys.readouterr().out.strip() == "LocalMax(0.00)"


def test_sweep_alpha_one_is_config_error(tmp_path, capsys):
    assert cli.main(["sweep", "--case", "3.1", "--alpha", "1.0", "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "alpha must differ from 1" in err
    assert not list(tmp_path.iterdir())


def test_sweep_flags(tmp_path):
    assert cli.main(["sweep", "--case", "1.1", "--range", "-2", "2", "--step", "0.5", "--tol", "1e-6", "--out", str(tmp_path)]) == 0
    rows = _read_csv(tmp_path / "sweep_1_1.csv")
    assert [r[0] for r in rows[1:]] == ["-2", "-1.5", "-1", "-0.5", "0", "0.5", "1", "1.5", "2"]
    side = json.loads((tmp_path / "sweep_1_1.json").read_text())
    assert side["sweep"]["tol_eq"] == 1e-6


def test_sweep_from_config(tmp_path):
    conf = tmp_path / "exp.toml"
    conf.write_text(
        'target = "uniform_mixture"\ntarget_intervals = [[-2.0, -1.0], [1.0, 2.0]]\n'
        'family = "gaussian"\nfamily_scale = 1.0\ndivergence = "fkl"\nlo = -3.0\nhi = 3.0\nstep = 0.1\n'
    )
    assert cli.main(["sweep", "--config", str(conf), "--out", str(tmp_path)]) == 0
    assert len(_read_csv(tmp_path / "sweep_custom.csv")) == 62


def test_bad_config_file_exit_2(tmp_path, capsys):
    conf = tmp_path / "bad.toml"
    conf.write_text('case = "1.1"\nbogus = 1\n')
    assert cli.main(["check", "--config", str(conf)]) == 2
    assert "line 2" in capsys.readouterr().err


@pytest.mark.parametrize("case, label", [("1.2", "StationaryOnly"), ("2.1", "UniqueMinimizer(T2)"), ("4.2", "StationaryOnly")])
def test_check(tmp_path, capsys, case, label):
    assert cli.main(["check", "--case", case, "--out", str(tmp_path)]) == 0
    assert capsys.readouterr().out.strip() == label
    doc = json.loads((tmp_path / f"check_{case.replace('.', '_')}.json").read_text())
    assert {"divergence", "family", "target", "verdict", "theorem", "sub_reports"} <= set(doc)


def test_optimize(tmp_path):
    assert cli.main(["optimize", "--case", "1.1", "--nu0", "5", "--lr", "0.5", "--out", str(tmp_path)]) == 0
    rows = _read_csv(tmp_path / "optimize_1_1.csv")
    assert rows[0] == ["iter", "nu", "divergence", "gradient"]
    assert abs(float(rows[-1][1])) <= 0.01
    assert _no_bad_tokens(rows)


def test_optimize_divergence_exit_3(tmp_path, capsys):
    assert cli.main(["optimize", "--case", "1.1", "--nu0", "1", "--lr", "100", "--out", str(tmp_path)]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_partition(tmp_path):
    assert cli.main(["partition", "--nu-prime", "1.53", "-0.94", "--grid", "50", "--out", str(tmp_path)]) == 0
    rows = _read_csv(tmp_path / "partition.csv")
    assert rows[0] == ["x", "y", "region", "target_pdf"] and len(rows) == 2501
    assert {r[2] for r in rows[1:]} == {"H2", "H3", "H4"}


def test_reproduce_fig6_and_partition_deterministic(tmp_path):
    for run in ("a", "b"):
        assert cli.main(["reproduce", "fig6", "--out", str(tmp_path / run)]) == 0
        assert cli.main(["reproduce", "partition-figure", "--out", str(tmp_path / run)]) == 0
    files_a = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(tmp_path / "b") for p in (tmp_path / "b").rglob("*") if p.is_file())
    assert files_a == files_b
    assert len([f for f in files_a if f.parts[0] == "fig6"]) == 20
    for f in files_a:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_reproduce_fig2(tmp_path, capsys):
    assert cli.main(["reproduce", "fig2", "--out", str(tmp_path)]) == 0
    d = tmp_path / "fig2"
    assert len(list(d.glob("sweep_*.csv"))) == 8
    assert len(list(d.glob("sweep_*.json"))) == 8
    for path in d.glob("*.json"):
        json.loads(path.read_text())  # strict JSON, no NaN
    assert not list(d.glob(".*tmp"))


def test_reproduce_fig5(tmp_path):
    assert cli.main(["reproduce", "fig5", "--out", str(tmp_path)]) == 0
    labels = {}
    for path in (tmp_path / "fig5").glob("sweep_*.json"):
        side = json.loads(path.read_text())
        labels[side["alpha"]] = side["classification"]["kind"]
    assert len(labels) == 16
    assert all(labels[a] == "UniqueGlobalMin" for a in (1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8))


def test_atomic_write_leaves_no_temp(tmp_path):
    cli.write_atomic(tmp_path / "x.txt", "hello\n")
    assert [p.name for p in tmp_path.iterdir()] == ["x.txt"]
