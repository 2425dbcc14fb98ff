import pytest

from howekit.instances import load_instance


@pytest.fixture(scope="session")
def cbn():
    return load_instance("cbn")


@pytest.fixture(scope="session")
def cbv():
    return load_instance("cbv")


@pytest.fixture(scope="session")
def nondet():
    return load_instance("nondet")


@pytest.fixture(scope="session")
def cbn_howe():
    return load_instance("cbn-howe")


def pytest_terminal_summary(terminalreporter):
    import sys

    acceptance = sys.modules.get("test_acceptance")
    if acceptance and acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in acceptance.RESULTS:
            terminalreporter.write_line(line)
