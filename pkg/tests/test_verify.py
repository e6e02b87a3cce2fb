import pytest

from coupled_ground import verify
from coupled_ground.cli import main
from coupled_ground.functionals import SystemParams


def test_fast_level_passes():
    results = verify.run_suites("fast")
    assert [r.name for r in results] == list(verify.FAST)
    assert all(r.passed for r in results), [r.line() for r in results if not r.passed]


def test_corrupted_exponent_is_caught(monkeypatch):
    original = SystemParams.exponents

    def corrupted(self):
        ap, aq, ar = original(self)
        return ap, aq, ar * 1.01

    monkeypatch.setattr(SystemParams, "exponents", corrupted)
    ok, detail = verify.suite_fiber_laws(count=8)
    assert not ok and "deviation" in detail


def test_exception_counts_as_failure(monkeypatch):
    def boom():
        raise RuntimeError("broken")

    monkeypatch.setattr(verify, "FAST", {"boom": boom})
    (res,) = verify.run_suites("fast")
    assert not res.passed and "broken" in res.detail


def test_cli_exit_code_on_failure(monkeypatch, capsys):
    monkeypatch.setattr(verify, "FAST", {"always fails": lambda: (False, "forced")})
    assert main(["verify", "fast"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_unknown_level():
    with pytest.raises(ValueError):
        verify.run_suites("medium")
