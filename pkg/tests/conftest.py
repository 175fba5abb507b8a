import re

import pytest

from cbn.counts import CountVector
from cbn.poset import enumerate_order_ideals, poset_from_relations

# (2,3,1,4,5,0,5) on the genotypes ∅, 1, 2, 12, 123, 124, 1234
BOWTIE_COUNTS = (2, 3, 1, 4, 5, 0, 5)


@pytest.fixture
def bowtie():
    """Four events with 1<3, 1<4, 2<3, 2<4 (0-indexed here)."""
    return poset_from_relations(4, [(0, 2), (0, 3), (1, 2), (1, 3)])


@pytest.fixture
def bowtie_lattice(bowtie):
    return enumerate_order_ideals(bowtie)


@pytest.fixture
def bowtie_counts(bowtie_lattice):
    return CountVector(4, dict(zip(bowtie_lattice.ideals, BOWTIE_COUNTS)))


_acceptance = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _acceptance[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, outcome in sorted(_acceptance.items(), key=lambda kv: _order(kv[0])):
        name = nodeid.split("::")[-1]
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")


def _order(nodeid):
    m = re.search(r"criterion_(\d+)", nodeid)
    return int(m.group(1)) if m else 99
