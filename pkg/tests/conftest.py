import time

import numpy as np
import pytest

_ACCEPTANCE: dict[str, list[bool]] = {}
_LABELS: dict[str, str] = {}
_START = time.perf_counter()
SUITE_BUDGET_S = 60.0


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(code, label): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or rep.when not in ("setup", "call"):
        return
    if rep.when == "setup" and rep.passed:
        return
    code, label = mark.args
    _LABELS[code] = label
    _ACCEPTANCE.setdefault(code, []).append(rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for code in sorted(_ACCEPTANCE, key=lambda c: int(c[2:])):
        ok = all(_ACCEPTANCE[code])
        tr.write_line(f"{code} {'PASS' if ok else 'FAIL'}  {_LABELS[code]}")
    elapsed = time.perf_counter() - _START
    ok = elapsed < SUITE_BUDGET_S
    tr.write_line(f"AC9-runtime {'PASS' if ok else 'FAIL'}  full suite {elapsed:.1f} s (budget {SUITE_BUDGET_S:.0f} s)")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_density(rng, dim, rank=None):
    rank = dim if rank is None else rank
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_hermitian(rng, dim, scale=1.0):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (a + a.conj().T) / 2
