import pytest

from prabhakar import _backend

ACCEPTANCE = {}


def record(number, title, passed, measured, tolerance, seconds):
    line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: measured {measured:.3e}, tolerance {tolerance:.1e}, {seconds:.2f} s"
    ACCEPTANCE[number] = line
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section(f"acceptance criteria (backend: {_backend.name})")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])


@pytest.fixture(params=_backend.available())
def each_backend(request):
    previous = _backend.use(request.param)
    yield request.param
    _backend.use(previous)
