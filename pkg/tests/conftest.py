import pytest

from susyzeta.potential import SmoothPotential
from susyzeta.zeta_zeros import reference_zeros

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def zeros():
    return reference_zeros()


@pytest.fixture(scope="session")
def potential():
    return SmoothPotential()


@pytest.fixture(scope="session")
def acceptance_report():
    def report(number: int, ok: bool, detail: str):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)

    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
