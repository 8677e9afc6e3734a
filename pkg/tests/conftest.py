import numpy as np
import pytest

from pricecast.data import bundled_path, load_series


@pytest.fixture(scope="session")
def cotton():
    return load_series(bundled_path("cotton"), "cotton")


@pytest.fixture(scope="session")
def oil():
    return load_series(bundled_path("oil"), "oil")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def write_prices(path, dates, columns: dict):
    lines = ["date," + ",".join(columns)]
    for i, d in enumerate(dates):
        lines.append(d + "," + ",".join(repr(float(v[i])) for v in columns.values()))
    path.write_text("\n".join(lines) + "\n")
    return path


def month_range(start_year: int, n: int):
    return [f"{start_year + i // 12}-{i % 12 + 1:02d}" for i in range(n)]


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
