import pytest

from fewbits import _kernels

BACKENDS = [_kernels.numpy_impl] + ([_kernels.numba_impl] if _kernels.numba_impl else [])


@pytest.fixture(params=BACKENDS, ids=lambda b: b.name)
def backend(request):
    return request.param


# acceptance criteria report one line each; collected here and printed at the end
CRITERIA_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
