from __future__ import annotations

import pytest

from picard.catalog import Catalog
from picard.theta import OperatorTable


@pytest.fixture(scope="session")
def table() -> OperatorTable:
    # bundled exact operators only; a missing entry is a test failure, not a fit
    t = OperatorTable.default()
    t.allow_compute = False
    return t


@pytest.fixture(scope="session")
def cat16(table) -> Catalog:
    return Catalog(16, table)


@pytest.fixture(scope="session")
def cat32(table) -> Catalog:
    return Catalog(32, table)
