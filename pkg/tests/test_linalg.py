"""Tests for the exact linear-algebra kernel.

Brute-force oracles (exhaustive search over small boxes) pin down every
derived expectation before the fast path is trusted.
"""

import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from normsim.linalg import (
    GroupLinearSystem,
    LinalgError,
    continued_fraction_reconstruct,
    det,
    hermite_reduce,
    identity_matrix,
    integral_pseudo_inverse,
    invariant_factors,
    mat_mul,
    mat_vec,
    smith_normal_form,
    solve_group_system,
    solve_integer_system,
)


def brute_force_solutions(a, b, moduli, box):
    """Oracle: all solutions of the congruence system with coords in range(box)."""
    cols = len(a[0])
    out = []
    for x in itertools.product(range(box), repeat=cols):
        ok = True
        for row, rhs, m in zip(a, b, moduli):
            lhs = sum(c * v for c, v in zip(row, x))
            if m == 0:
                ok = lhs == rhs
            else:
                ok = (lhs - rhs) % m == 0
            if not ok:
                break
        if ok:
            out.append(tuple(x))
    return set(out)


def span_solutions(x0, kernel, moduli_box):
    """Expand x0 + span(kernel) inside the same box as the oracle."""
    cols = len(x0)
    box = moduli_box
    points = set()
    # Enough multiples of each generator to wrap around the box.
    coeff_range = range(-2 * box, 2 * box + 1)
    for coeffs in itertools.product(coeff_range, repeat=len(kernel)):
        x = list(x0)
        for c, gen in zip(coeffs, kernel):
            for j in range(cols):
                x[j] += c * gen[j]
        if all(0 <= v < box for v in x):
            points.add(tuple(x))
    return points


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------


def test_snf_trivial_examples():
    snf = smith_normal_form([[2, 0], [0, 4]])
    assert snf.diagonal == [2, 4]
    snf.verify([[2, 0], [0, 4]])

    snf = smith_normal_form([[0, 0], [0, 0]])
    assert snf.diagonal == [0, 0]
    assert snf.u == identity_matrix(2) and snf.v == identity_matrix(2)


def test_snf_diag_2_3():
    # By-hand elementary reduction: gcd(2,3)=1 so diag(2,3) ~ diag(1,6).
    a = [[2, 0], [0, 3]]
    snf = smith_normal_form(a)
    assert snf.diagonal == [1, 6]
    snf.verify(a)


def test_snf_rectangular():
    a = [[2, 4, 4], [-6, 6, 12]]
    snf = smith_normal_form(a)
    snf.verify(a)
    assert all(
        snf.diagonal[i + 1] % snf.diagonal[i] == 0
        for i in range(len(snf.diagonal) - 1)
        if snf.diagonal[i] != 0
    )


@settings(max_examples=300, deadline=None)
@given(
    st.integers(1, 4),
    st.integers(1, 4),
    st.data(),
)
def test_snf_random_matrices(rows, cols, data):
    a = [
        [data.draw(st.integers(-9, 9)) for _ in range(cols)] for _ in range(rows)
    ]
    snf = smith_normal_form(a)
    snf.verify(a)


def test_snf_1000_random_small():
    rng = random.Random(20240917)
    for _ in range(1000):
        rows = rng.randint(1, 4)
        cols = rng.randint(1, 4)
        a = [[rng.randint(-9, 9) for _ in range(cols)] for _ in range(rows)]
        smith_normal_form(a).verify(a)


def test_invariant_factors():
    assert invariant_factors([[2, 0], [0, 3]]) == [6]
    assert invariant_factors(identity_matrix(3)) == []


def test_det():
    assert det([[2, 0], [0, 3]]) == 6
    assert det([[1, 2], [3, 4]]) == -2
    assert det([[0, 1], [1, 0]]) == -1
    assert det([]) == 1
    with pytest.raises(LinalgError):
        det([[1, 2, 3], [4, 5, 6]])


# ---------------------------------------------------------------------------
# Hermite reduction
# ---------------------------------------------------------------------------


def test_hermite_reduce_echelon():
    basis = hermite_reduce([[2, 4], [4, 2], [0, 6]])
    assert basis == [[2, 4], [0, 6]]
    assert hermite_reduce([[0, 0], [0, 0]]) == []


def test_hermite_reduce_deterministic_lattice():
    gens = [[3, 1, 0], [1, 2, 1], [0, 0, 5]]
    b1 = hermite_reduce(gens)
    b2 = hermite_reduce(list(reversed(gens)))
    assert b1 == b2


# ---------------------------------------------------------------------------
# Group linear systems
# ---------------------------------------------------------------------------


def test_solve_2x_eq_2_mod_4():
    # Oracle: x in Z_4 with 2x = 2 (mod 4) -> {1, 3}.
    assert brute_force_solutions([[2]], [2], [4], 4) == {(1,), (3,)}
    x0, kernel = solve_group_system(GroupLinearSystem([[2]], [2], [4]))
    assert x0 == [1]
    assert kernel == [[2]]


def test_solve_over_z():
    x0, kernel = solve_group_system(GroupLinearSystem([[1]], [3], [0]))
    assert x0 == [3]
    assert kernel == []


def test_solve_infeasible():
    # Oracle: no x in Z_4 with 2x = 1 (mod 4).
    assert brute_force_solutions([[2]], [1], [4], 4) == set()
    assert solve_group_system(GroupLinearSystem([[2]], [1], [4])) is None


def test_solve_matches_brute_force_exhaustively():
    rng = random.Random(7)
    for _ in range(150):
        rows = rng.randint(1, 2)
        cols = rng.randint(1, 3)
        box = rng.choice([2, 3, 4, 6])
        a = [[rng.randint(-3, 3) for _ in range(cols)] for _ in range(rows)]
        b = [rng.randint(-3, 3) for _ in range(rows)]
        moduli = [box for _ in range(rows)]
        expected = brute_force_solutions(a, b, moduli, box)
        solved = solve_group_system(GroupLinearSystem(a, b, moduli))
        if solved is None:
            assert expected == set()
            continue
        x0, kernel = solved
        # Wrap-around inside the box needs box * e_j in the lattice; it is
        # whenever the system constrains x_j mod the box, which these do.
        kernel = kernel + [
            [box if i == j else 0 for i in range(cols)] for j in range(cols)
        ]
        assert span_solutions(x0, hermite_reduce(kernel), box) == expected


def test_solve_integer_system_shapes():
    x0, kernel = solve_integer_system([[1, 0], [0, 1]], [5, 7])
    assert x0 == [5, 7] and kernel == []
    assert solve_integer_system([[2]], [1]) is None
    x0, kernel = solve_integer_system([[0, 0]], [0])
    assert kernel == [[1, 0], [0, 1]]


def test_malformed_system_raises():
    with pytest.raises(LinalgError):
        GroupLinearSystem([[1, 2], [3]], [1, 2], [0, 0])
    with pytest.raises(LinalgError):
        GroupLinearSystem([[1]], [1, 2], [0])


# ---------------------------------------------------------------------------
# Integral pseudo-inverse
# ---------------------------------------------------------------------------


def test_pseudo_inverse_identity():
    assert integral_pseudo_inverse(identity_matrix(2)) == [
        [Fraction(1), Fraction(0)],
        [Fraction(0), Fraction(1)],
    ]


def test_pseudo_inverse_diag_and_column():
    a = [[2, 0], [0, 1]]
    a_sharp = integral_pseudo_inverse(a)
    x = [4, 3]  # oracle: A @ (2, 3) == (4, 3)
    assert mat_vec(a, [2, 3]) == x
    y = mat_vec(a_sharp, x)
    assert y == [2, 3]

    col = [[1], [1]]
    col_sharp = integral_pseudo_inverse(col)
    assert mat_vec(col, [5]) == [5, 5]
    assert mat_vec(col_sharp, [5, 5]) == [5]


def test_pseudo_inverse_property_random():
    rng = random.Random(11)
    for _ in range(100):
        rows = rng.randint(1, 3)
        cols = rng.randint(1, 3)
        a = [[rng.randint(-4, 4) for _ in range(cols)] for _ in range(rows)]
        a_sharp = integral_pseudo_inverse(a)
        for _ in range(5):
            w = [rng.randint(-3, 3) for _ in range(cols)]
            x = mat_vec(a, w)  # in the image of A by construction
            y = mat_vec(a_sharp, x)
            assert all(v.denominator == 1 for v in map(Fraction, y))
            assert mat_vec(a, [int(Fraction(v)) for v in y]) == x


# ---------------------------------------------------------------------------
# Continued fractions
# ---------------------------------------------------------------------------


def test_cf_exact_fraction():
    assert continued_fraction_reconstruct(Fraction(3, 4), 4) == Fraction(3, 4)


def test_cf_noisy_sample():
    # |0.7403 - 3/4| = 0.0097 < 1/32.
    assert continued_fraction_reconstruct(Fraction(7403, 10000), 4) == Fraction(3, 4)


def test_cf_no_convergent():
    # Only 0/1 is available with r_max = 1 and |0.5001 - 0| > 1/2.
    assert continued_fraction_reconstruct(Fraction(5001, 10000), 1) is None


def test_cf_all_small_fractions_with_noise():
    for r in range(1, 21):
        for k in range(r):
            if Fraction(k, r).denominator != r:
                continue  # only test fractions already in lowest terms
            for eps_num in (-1, 0, 1):
                eps = Fraction(eps_num, 2 * r * r + 1)  # |eps| < 1/(2 r^2)
                p = Fraction(k, r) + eps
                if p < 0 or p >= 1:
                    continue
                assert continued_fraction_reconstruct(p, r) == Fraction(k, r)


def test_cf_rejects_bad_rmax():
    with pytest.raises(LinalgError):
        continued_fraction_reconstruct(Fraction(1, 2), 0)
