from __future__ import annotations

from pathlib import Path

import pytest

from bunchctl import BunchedRing, Cone, CoxPresentation, GradedPoly, GradingMap
from bunchctl.polynomials import Attestations

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

DELPEZZO_Q = [[1, -1, 0, -1, 1], [1, 1, 1, 0, 2]]
# ambient matrix used for the worked modifications (columns v1..v5)
DELPEZZO_P = [[1, 0, -1, 1, 0], [0, 1, -1, -1, 0], [-1, 0, -1, 0, 1]]


def weights():
    return [tuple(row[j] for row in DELPEZZO_Q) for j in range(5)]


def wcone(*idx):
    """cone(w_i, ...) with 1-based indices, as written in the worked examples."""
    w = weights()
    return Cone([w[i - 1] for i in idx])


def delpezzo_pres():
    Q = GradingMap.from_matrix(DELPEZZO_Q)
    f = GradedPoly.parse("T1*T2 + T3^2 + T4*T5", 5)
    return CoxPresentation(Q, [f], Attestations(factorially_graded=True))


def delpezzo_ring():
    return BunchedRing(delpezzo_pres(), [wcone(2, 5)])


def torsion_pres():
    Q = GradingMap.from_rows([[1] * 6], [[1, 2, 1, 2, 1, 2]], [3])
    f = GradedPoly.parse("T1*T2 + T3*T4 + T5*T6", 6)
    return CoxPresentation(Q, [f], Attestations(factorially_graded=True))


def torsion_ring():
    return BunchedRing(torsion_pres(), [Cone([(1,)])])


def p2_ring():
    return BunchedRing(CoxPresentation(GradingMap.from_matrix([[1, 1, 1]])), [Cone([(1,)])])


@pytest.fixture
def delpezzo():
    return delpezzo_ring()


@pytest.fixture
def torsion():
    return torsion_ring()


@pytest.fixture
def p2():
    return p2_ring()


@pytest.fixture
def fixtures_dir():
    return FIXTURES
