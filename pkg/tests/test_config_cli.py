import pytest

from rumorsim import __version__
from rumorsim.cli import main
from rumorsim.config import OUT_DIR_ENV, ConfigError, config_text, parse_config
from rumorsim.model import FIG2_PARAMS, FIG11_PARAMS

FIG2_TEXT = config_text(FIG2_PARAMS)
FIG11_TEXT = config_text(FIG11_PARAMS)


def _write(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_parse_fig2_config():
    cfg = parse_config("# rumor run\n\n" + FIG2_TEXT)
    assert cfg.params == FIG2_PARAMS
    assert cfg.integration.step == 0.01 and cfg.abm.dt == 0.05 and cfg.runs == 1


def test_parse_roundtrips_resolved_text():
    cfg = parse_config(FIG11_TEXT + "t_max = 300\nseed = 4\n")
    again = parse_config(cfg.to_text())
    assert again == cfg


def test_out_of_range_names_line_and_bound():
    text = FIG2_TEXT.replace("lambda1 = 0.7", "lambda1 = 1.5")
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert err.value.line == 1
    assert "line 1" in str(err.value) and "[0,1]" in str(err.value)


def test_linear_mode_requires_coefficient():
    text = "\n".join(ln for ln in FIG2_TEXT.splitlines() if not ln.startswith("f_coeff"))
    with pytest.raises(ConfigError, match="f_coeff required in linear mode"):
        parse_config(text)


def test_constant_mode_requires_value():
    text = FIG2_TEXT.replace("f_mode = linear", "f_mode = constant")
    with pytest.raises(ConfigError, match="f_value required in constant mode"):
        parse_config(text)


def test_unknown_key_is_rejected():
    with pytest.raises(ConfigError) as err:
        parse_config(FIG2_TEXT + "lamda1 = 0.3\n")
    assert "lamda1" in str(err.value) and err.value.line == len(FIG2_TEXT.splitlines()) + 1


def test_duplicate_key_is_rejected():
    with pytest.raises(ConfigError, match="given twice"):
        parse_config(FIG2_TEXT + "lambda1 = 0.3\n")


@pytest.mark.parametrize("key", ["gamma2", "alpha", "n"])
def test_model_keys_have_no_defaults(key):
    text = "\n".join(ln for ln in FIG2_TEXT.splitlines() if not ln.startswith(key + " "))
    with pytest.raises(ConfigError, match=f"missing required model key '{key}'"):
        parse_config(text)


def test_bad_number_and_bad_options():
    with pytest.raises(ConfigError, match="must be a number"):
        parse_config(FIG2_TEXT.replace("beta1 = 0.3", "beta1 = fast"))
    with pytest.raises(ConfigError, match="integer"):
        parse_config(FIG2_TEXT + "seed = 1.5\n")
    with pytest.raises(ConfigError):
        parse_config(FIG2_TEXT + "step = 0\n")


def test_out_dir_env_is_overridden_by_config(monkeypatch):
    monkeypatch.setenv(OUT_DIR_ENV, "/from/env")
    assert parse_config(FIG2_TEXT).out_dir == "/from/env"
    assert parse_config(FIG2_TEXT + "out_dir = mine\n").out_dir == "mine"


def test_cli_analyze(tmp_path, capsys):
    cfg = _write(tmp_path, FIG11_TEXT + f"out_dir = {tmp_path}\n")
    assert main(["-q", "analyze", cfg]) == 0
    out = capsys.readouterr().out
    assert "lambda1_c = 0.1" in out.splitlines() and "lambda2_c = 0.1" in out.splitlines()
    assert (tmp_path / "analysis.csv").exists()


def test_cli_figure2(tmp_path):
    cfg = _write(tmp_path, FIG2_TEXT)
    assert main(["-q", "figure", "2", cfg, "--out-dir", str(tmp_path / "out")]) == 0
    text = (tmp_path / "out" / "figure2.csv").read_text()
    lines = text.splitlines()
    assert lines[0] == f"# rumorsim {__version__}"
    assert "t,I,S1,S2,H,R1,R2" in lines


def test_cli_integrate_horizon_exit_code(tmp_path, capsys):
    cfg = _write(tmp_path, FIG2_TEXT + f"t_max = 1\nout_dir = {tmp_path}\n")
    assert main(["-q", "integrate", cfg]) == 2
    assert "t_max" in capsys.readouterr().err


def test_cli_config_error_exit_code(tmp_path, capsys):
    cfg = _write(tmp_path, FIG2_TEXT.replace("lambda1 = 0.7", "lambda1 = 1.5"))
    assert main(["-q", "integrate", cfg]) == 1
    assert "line 1" in capsys.readouterr().err
    assert main(["-q", "integrate", str(tmp_path / "missing.cfg")]) == 1


def test_cli_usage_error_exit_code(tmp_path):
    with pytest.raises(SystemExit) as err:
        main(["figure", "13", _write(tmp_path, FIG2_TEXT)])
    assert err.value.code == 1


def test_cli_header_records_every_resolved_key(tmp_path):
    cfg = _write(tmp_path, FIG2_TEXT + f"out_dir = {tmp_path}\n")
    assert main(["-q", "integrate", cfg]) == 0
    head = [ln for ln in (tmp_path / "trajectory.csv").read_text().splitlines() if ln.startswith("#")]
    resolved = parse_config(FIG2_TEXT + f"out_dir = {tmp_path}\n").resolved()
    for key, value in resolved.items():
        assert f"# {key} = {value}" in head


@pytest.mark.parametrize("argv, files", [
    (["integrate"], ["trajectory.csv"]),
    (["sweep", "--param", "m", "--values", "0.1,0.5"], ["sweep_m.csv"]),
    (["heatmap", "--grid", "3"], ["heatmap.csv"]),
    (["abm"], ["abm.csv"]),
])
def test_cli_outputs_are_byte_identical(tmp_path, argv, files):
    text = config_text(FIG2_PARAMS.with_(n=2000), seed=7)
    outputs = []
    for rep in ("a", "b"):
        cfg = _write(tmp_path, text, f"{rep}.cfg")
        out = tmp_path / "out"
        assert main(["-q", argv[0], cfg, *argv[1:], "--out-dir", str(out)]) == 0
        outputs.append({f: (out / f).read_bytes() for f in files})
    assert outputs[0] == outputs[1]


def test_cli_abm_ensemble(tmp_path):
    cfg = _write(tmp_path, config_text(FIG2_PARAMS.with_(n=500), runs=3, out_dir=tmp_path))
    assert main(["-q", "abm", cfg]) == 0
    lines = (tmp_path / "ensemble.csv").read_text().splitlines()
    assert lines[0].startswith("# rumorsim")
    assert any(ln.startswith("t,I_mean") for ln in lines)


def test_cli_abm_rejects_fractional_degree(tmp_path):
    cfg = _write(tmp_path, config_text(FIG2_PARAMS.with_(n=500, k_avg=7.5)))
    assert main(["-q", "abm", cfg]) == 1


def test_cli_sweep_bad_values(tmp_path):
    cfg = _write(tmp_path, FIG2_TEXT)
    assert main(["-q", "sweep", cfg, "--param", "m", "--values", "a,b"]) == 1
