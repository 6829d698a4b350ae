import random

import pytest

from ncinv.exactalg import ExactMatrix, FieldSpec


@pytest.fixture
def F():
    return FieldSpec()


@pytest.fixture
def Q():
    return FieldSpec.rationals()


@pytest.fixture
def rng():
    return random.Random(12345)


def mat(field, rows):
    return ExactMatrix.from_values(field, rows)


ACCEPTANCE_LINES: list[str] = []


def record_acceptance(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
