import pytest

import slitqubit as sq


@pytest.fixture(scope="session")
def geom():
    return sq.default_geometry()


@pytest.fixture(scope="session")
def derived(geom):
    return sq.derive_params(geom)


@pytest.fixture(scope="session")
def settings(geom):
    return sq.standard_settings(geom)


def pytest_terminal_summary(terminalreporter):
    # surface the one-line acceptance verdicts collected during the run
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(VERDICTS):
            terminalreporter.write_line(line)
