import os

import pytest

from symmetria.config import RunConfig, load_config_file, resolve_config, thread_limit
from symmetria.errors import ParseError, ValidationError


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# overrides\nk = 11\nd-max = 20   # fewer features\ncorrection = off\nc = none\n")
    return path


def test_defaults_are_valid():
    cfg = RunConfig().validate()
    assert cfg.k == 13
    assert cfg.d_max == 25
    assert cfg.c is None
    assert cfg.mu == 1.0
    assert cfg.tau_gap == 1e-3
    assert cfg.hessian == "fd"
    assert cfg.correction is True


def test_load_config_file(config_file):
    assert load_config_file(config_file) == {"k": 11, "d_max": 20, "correction": False, "c": None}


def test_config_file_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config_file(tmp_path / "missing.cfg")

    unknown = tmp_path / "unknown.cfg"
    unknown.write_text("k = 5\nbucket = models\n")
    with pytest.raises(ParseError) as exc_info:
        load_config_file(unknown)
    assert exc_info.value.line == 2

    no_equals = tmp_path / "no_equals.cfg"
    no_equals.write_text("k 5\n")
    with pytest.raises(ParseError):
        load_config_file(no_equals)

    bad_value = tmp_path / "bad_value.cfg"
    bad_value.write_text("mu = lots\n")
    with pytest.raises(ValidationError):
        load_config_file(bad_value)


def test_precedence(config_file):
    env = {"SYMMETRIA_K": "9", "SYMMETRIA_MU": "0.5"}
    assert resolve_config(environ=env).k == 9
    from_file = resolve_config(config_file=config_file, environ=env)
    assert from_file.k == 11
    assert from_file.mu == 0.5
    assert from_file.correction is False
    flagged = resolve_config({"k": 15, "mu": None}, config_file=config_file, environ=env)
    assert flagged.k == 15
    assert flagged.mu == 0.5


def test_environment_and_dotenv(tmp_path, monkeypatch):
    monkeypatch.setenv("SYMMETRIA_T_STEPS", "40")
    # registered so the value loaded from .env is removed afterwards
    monkeypatch.setenv("SYMMETRIA_EPS_SIGN", "")
    monkeypatch.delenv("SYMMETRIA_EPS_SIGN")
    (tmp_path / ".env").write_text("SYMMETRIA_EPS_SIGN=1e-4\nSYMMETRIA_T_STEPS=30\n")
    monkeypatch.chdir(tmp_path)
    cfg = resolve_config()
    assert cfg.t_steps == 40
    assert cfg.eps_sign == 1e-4


@pytest.mark.parametrize(
    "overrides",
    [{"k": 2}, {"d_max": 1}, {"c": 0}, {"mu": -1.0}, {"tau_gap": 0.0}, {"hessian": "bfgs"}, {"threads": 0}],
)
def test_validation_errors(overrides):
    with pytest.raises(ValidationError):
        RunConfig(**overrides).validate()


def test_with_overrides_skips_none():
    cfg = RunConfig().with_overrides(k=7, mu=None)
    assert cfg.k == 7
    assert cfg.mu == 1.0
    assert cfg.to_dict()["k"] == 7


def test_string_overrides_are_coerced():
    cfg = resolve_config({"k": "8", "correction": "yes", "seed": "3"}, environ={})
    assert (cfg.k, cfg.correction, cfg.seed) == (8, True, 3)


def test_thread_limit(monkeypatch):
    assert thread_limit(RunConfig(threads=3)) == 3
    monkeypatch.setenv("SYMMETRIA_THREADS", "5")
    assert thread_limit() == 5
    assert thread_limit(RunConfig()) == 5
    monkeypatch.setenv("SYMMETRIA_THREADS", "many")
    with pytest.raises(ValidationError):
        thread_limit()
    monkeypatch.delenv("SYMMETRIA_THREADS")
    assert thread_limit() == (os.cpu_count() or 1)
