import pytest

_ACCEPTANCE = "test_acceptance.py"


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(key, []):
            if _ACCEPTANCE in rep.nodeid and rep.when == "call":
                lines.append((rep.nodeid, "PASS" if rep.passed else "FAIL"))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, status in sorted(lines):
        terminalreporter.write_line(f"{status}  {nodeid.split('::', 1)[1]}")


@pytest.fixture(scope="session")
def fwm():
    from antibunching.shorttime import four_wave_mixing

    return four_wave_mixing()
