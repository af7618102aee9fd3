import sys
import numpy as np
import pytest

from spi_solve import core


def rel_err(x, ref):
    return float(np.linalg.norm(np.asarray(x) - np.asarray(ref)) / max(np.linalg.norm(ref), 1e-300))


def random_matrix(rng, m, n, field="real"):
    A = rng.standard_normal((m, n))
    if field == "complex":
        A = A + 1j * rng.standard_normal((m, n))
    return np.asfortranarray(A)


def random_vector(rng, n, field="real"):
    v = rng.standard_normal(n)
    if field == "complex":
        v = v + 1j * rng.standard_normal(n)
    return v


class KernelCounter:
    def __init__(self):
        self.calls = []

    def wrap(self, name, fn):
        def counted(*args, **kwargs):
            self.calls.append(name)
            return fn(*args, **kwargs)

        return counted

    def __len__(self):
        return len(self.calls)


@pytest.fixture
def kernel_calls(monkeypatch):
    """Count matvec / adjoint_matvec invocations made through ``spi_solve.core``."""
    counter = KernelCounter()
    monkeypatch.setattr(core, "matvec", counter.wrap("matvec", core.matvec))
    monkeypatch.setattr(core, "adjoint_matvec", counter.wrap("adjoint_matvec", core.adjoint_matvec))
    return counter


@pytest.fixture(params=["real", "complex"])
def field(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
