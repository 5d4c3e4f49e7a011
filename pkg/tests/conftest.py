import random

import pytest

from ewens_moments.core import AdditiveSpec

ACCEPTANCE_LINES: list[str] = []


def random_spec(n: int, seed: int, top: int = 5) -> AdditiveSpec:
    rnd = random.Random(seed)
    return AdditiveSpec.from_array([rnd.randint(0, top) for _ in range(n)])


def random_subset(n: int, seed: int, density: float | None = None) -> AdditiveSpec:
    rnd = random.Random(seed)
    dens = rnd.uniform(0.05, 0.9) if density is None else density
    return AdditiveSpec.indicator(n, [j for j in range(1, n + 1) if rnd.random() < dens])


@pytest.fixture
def acceptance_report():
    def report(number: int, title: str, ok: bool, detail: str) -> None:
        line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
