import pytest

from sqfprime.primes import build_prime_table


@pytest.fixture(scope="session")
def table():
    return build_prime_table(10**5)


@pytest.fixture(scope="session")
def big_table():
    return build_prime_table(10**7)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
