from __future__ import annotations

import pytest

from pfnormal.gmred import CurveFamily, SectionSpec, derive_picard_fuchs

LEGENDRE = "x*(x-1)*(x-t)"


@pytest.fixture(scope="session")
def legendre() -> CurveFamily:
    return CurveFamily.from_text(LEGENDRE)


@pytest.fixture(scope="session")
def legendre_cert(legendre):
    return derive_picard_fuchs(legendre)


@pytest.fixture(scope="session")
def section2(legendre) -> SectionSpec:
    return SectionSpec.from_x("2", legendre)


# acceptance lines are collected here and repeated in the terminal summary,
# so they show up even when pytest captures stdout
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
