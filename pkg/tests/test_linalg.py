import random
from fractions import Fraction

from weilgap.linalg import bareiss_echelon, in_row_span, nullspace, rank


def test_rank_known():
    assert rank([[1, 2], [2, 4]]) == 1
    assert rank([[1, 0], [0, 1]]) == 2
    assert rank([[0, 0], [0, 0]]) == 0


def test_nullspace_known():
    basis = nullspace([[1, 2, 3]])
    assert len(basis) == 2
    for vec in basis:
        assert vec[0] + 2 * vec[1] + 3 * vec[2] == 0


def test_nullspace_reduced_echelon_determinism():
    basis = nullspace([[1, 0, 2, 0], [0, 1, 0, 3]])
    # free columns are 2 and 3: the basis vectors carry a unit there
    assert basis[0][2] == 1 and basis[0][3] == 0
    assert basis[1][2] == 0 and basis[1][3] == 1
    assert basis[0][0] == Fraction(-2) and basis[1][1] == Fraction(-3)


def test_nullspace_random_consistency():
    rng = random.Random(17)
    for _ in range(30):
        rows = [[rng.randint(-5, 5) for _ in range(6)] for _ in range(rng.randint(1, 5))]
        basis = nullspace(rows, 6)
        rk, _, _ = bareiss_echelon(rows)
        assert len(basis) == 6 - rk
        for vec in basis:
            for row in rows:
                assert sum(Fraction(r) * v for r, v in zip(row, vec)) == 0


def test_in_row_span():
    rows = [[1, 0, 1], [0, 1, 1]]
    assert in_row_span(rows, [2, 3, 5])
    assert not in_row_span(rows, [0, 0, 1])


def test_bareiss_stays_integral():
    rows = [[2, 4, 6], [3, 5, 7], [1, 1, 1]]
    _, _, ech = bareiss_echelon(rows)
    for row in ech:
        for entry in row:
            assert isinstance(entry, int)
