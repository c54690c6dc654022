import pytest


@pytest.fixture(scope="module", params=["python", "cython"])
def kernel_backend(request):
    from kprsim.kernels import backend_module

    try:
        return backend_module(request.param)
    except ImportError:
        pytest.skip("compiled kernels not built")


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one verdict line per criterion; the lines are repeated in the terminal summary."""

    def record(criterion, ok, detail):
        line = f"{criterion:<4} {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
