import numpy as np
import pytest

from dec_phs.complex import (
    generate_interval_mesh,
    generate_strip_mesh,
    generate_two_triangle_mesh,
)

# (label, builder) for every mesh the structural checks run on
MESHES = {
    "interval_1": lambda: generate_interval_mesh(1),
    "interval_2": lambda: generate_interval_mesh(2),
    "interval_50": lambda: generate_interval_mesh(50),
    "two_triangle": generate_two_triangle_mesh,
    "strip_4x8": lambda: generate_strip_mesh(4, 8, 1.0, 1.0),
}

CRITERIA: dict[str, list[tuple[str, bool]]] = {}


def record(criterion: int, label: str, ok: bool) -> None:
    CRITERIA.setdefault(criterion, []).append((label, bool(ok)))
    print(f"criterion {criterion} [{label}]: {'PASS' if ok else 'FAIL'}")


@pytest.fixture(params=list(MESHES), scope="session")
def mesh(request):
    K, G = MESHES[request.param]()
    return request.param, K, G


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(CRITERIA):
        checks = CRITERIA[c]
        ok = all(v for _, v in checks)
        detail = ", ".join(f"{label}={'ok' if v else 'FAILED'}" for label, v in checks)
        terminalreporter.write_line(f"criterion {c}: {'PASS' if ok else 'FAIL'}  ({detail})")
