"""Tests for encoding conversion and black-box gate extraction."""

from fractions import Fraction

import numpy as np
import pytest

from helpers import random_matrix_rep, random_quadratic_form

from normsim.blackbox import ZNStarGroup, bb_decompose_bruteforce
from normsim.circuits import (
    AutomorphismGate,
    DesignatedBasis,
    NormalizerCircuit,
    QFTGate,
    QuadraticGate,
    validate_matrix_rep,
    word_exp_func,
)
from normsim.coset import coset_run, states_equal_up_to_global_phase
from normsim.deblackbox import (
    EncodingBridge,
    ExtractionError,
    build_bridge,
    deblackbox_circuit,
    extract_hom_matrix,
    extract_matrix_rep,
    extract_quadratic,
    next_prime_above,
)
from normsim.dense import dense_run
from normsim.groups import T, Z, cyclic, cyclic_group, group, parse_group


def test_next_prime_above():
    assert next_prime_above(1) == 2
    assert next_prime_above(2) == 3
    assert next_prime_above(8) == 11
    assert next_prime_above(2048) == 2053


def test_bridge_encode_decode_z15():
    g = ZNStarGroup(15)
    table = bb_decompose_bruteforce(g, [2, 14])
    bridge = EncodingBridge(group=g, table=table)
    # With beta = (2, 14): 2^3 * 14^1 = 112 = 7 mod 15.
    if table.beta == [2, 14]:
        assert bridge.encode([3, 1]) == 7
        assert bridge.decode(7).coords == (3, 1)
    assert bridge.encode(bridge.z_group.identity()) == 1
    for element in g.elements():
        assert bridge.encode(bridge.decode(element)) == element


def test_bridge_is_homomorphism():
    bridge = build_bridge(ZNStarGroup(21), [2, 20])
    z = bridge.z_group
    rng = np.random.default_rng(4)
    for _ in range(40):
        a = z.random_element(rng)
        b = z.random_element(rng)
        assert bridge.encode(a + b) == bridge.group.mul(bridge.encode(a), bridge.encode(b))


def test_extract_matrix_examples():
    # x -> 3x on Z_8.
    g8 = cyclic_group(8)
    rep = extract_matrix_rep(lambda pt: ((3 * pt[0]) % 8,), g8)
    assert rep.matrix == ((Fraction(3),),)
    # Doubling on the torus: with bound 4 the probe lands at 1/alpha with
    # alpha = 11 > 2*4, so f(1/11) = 2/11 pins the integer entry 2 exactly.
    # (Doubling is 2-to-1, so only the raw recovery applies here.)
    from normsim.deblackbox import extract_matrix_entries

    gt = group(T)
    matrix = extract_matrix_entries(lambda pt: ((2 * pt[0]) % 1,), gt, bound=4)
    assert matrix == [[Fraction(2)]]
    # Identity on a mixed group.
    gm = group(cyclic(2), cyclic(4), T)
    rep = extract_matrix_rep(lambda pt: pt, gm, bound=2)
    assert all(rep.matrix[i][i] == 1 for i in range(3))


def test_extract_matrix_torus_block():
    # A genuinely invertible torus map with an entry beyond the mod-1 window.
    gt = group(T, T)

    def f(pt):
        return ((2 * pt[0] + pt[1]) % 1, (pt[0] + pt[1]) % 1)

    rep = extract_matrix_rep(f, gt, bound=4)
    assert rep.matrix == ((Fraction(2), Fraction(1)), (Fraction(1), Fraction(1)))


def test_extract_matrix_negative_torus_entry():
    from normsim.deblackbox import extract_matrix_entries

    gt = group(T)
    matrix = extract_matrix_entries(lambda pt: ((-3 * pt[0]) % 1,), gt, bound=4)
    assert matrix == [[Fraction(-3)]]


def test_extract_matrix_rejects_non_automorphism():
    g = cyclic_group(4)
    with pytest.raises(ExtractionError):
        extract_matrix_rep(lambda pt: ((2 * pt[0]) % 4,), g)  # not bijective
    with pytest.raises(ExtractionError):  # not even additive
        extract_matrix_rep(lambda pt: ((pt[0] * pt[0]) % 4,), g)


def test_extract_quadratic_examples():
    g8 = cyclic_group(8)
    form = extract_quadratic(lambda pt: Fraction(pt[0] * pt[0], 8), g8)
    assert form.m == ((Fraction(1, 4),),)
    assert form.c == (2,)
    # Trivial phase.
    form = extract_quadratic(lambda pt: Fraction(0), g8)
    assert form.m == ((Fraction(0),),) and form.v == (Fraction(0),)
    # Pure character on Z_2: difference relation yields M = 0, v = 1/2.
    g2 = cyclic_group(2)
    form = extract_quadratic(lambda pt: Fraction(pt[0], 2), g2)
    assert form.m == ((Fraction(0),),)
    assert form.v == (Fraction(1, 2),)


def test_extract_quadratic_mixed_group():
    g = group(Z, T, cyclic(4))
    target = [
        [Fraction(1, 3), 2, Fraction(1, 4)],
        [2, 0, 0],
        [Fraction(1, 4), 0, Fraction(1, 4)],
    ]
    v = [Fraction(1, 2), -3, Fraction(3, 4)]
    from normsim.circuits import validate_quadratic

    form = validate_quadratic(target, v, g)

    def oracle(pt):
        return form.exponent(g.reduce(pt))

    recovered = extract_quadratic(oracle, g, bound=4)
    rng = np.random.default_rng(0)
    for _ in range(30):
        coords = (
            int(rng.integers(-9, 9)),
            Fraction(int(rng.integers(12)), 12),
            int(rng.integers(4)),
        )
        el = g.reduce(coords)
        assert recovered.exponent(el) == form.exponent(el)


def test_random_round_trips_finite():
    rng = np.random.default_rng(31)
    for _ in range(25):
        moduli = [int(rng.integers(2, 9)) for _ in range(int(rng.integers(1, 4)))]
        g = cyclic_group(*moduli)
        rep = random_matrix_rep(g, rng)
        recovered = extract_matrix_rep(lambda pt: rep.apply(g.reduce(pt)).coords, g)
        assert recovered.equals_as_map(rep)
        form = random_quadratic_form(g, rng)
        q = extract_quadratic(lambda pt: form.exponent(g.reduce(pt)), g)
        for el in g.elements():
            assert q.exponent(el) == form.exponent(el)


def test_extract_hom_matrix():
    src = cyclic_group(4)
    dst = cyclic_group(2, 4)

    def f(pt):
        return ((pt[0]) % 2, (3 * pt[0]) % 4)

    matrix = extract_hom_matrix(f, src, dst)
    assert matrix == [[1], [3]]


def build_order_finding_circuit(modulus, a, m):
    """Finite-register variant: Z_M x Z_N^* with the repeated-squaring gate."""
    bb = ZNStarGroup(modulus)
    basis = DesignatedBasis(cyclic_group(m), bb)
    return NormalizerCircuit(
        basis,
        [
            QFTGate((0,)),
            AutomorphismGate(
                func=word_exp_func(basis, [a]),
                name="word_exp",
                params={"bases": [a]},
            ),
            QFTGate((0,)),
        ],
    )


def test_deblackbox_no_blackbox_is_identity():
    g = cyclic_group(4)
    circuit = NormalizerCircuit(DesignatedBasis(g), [QFTGate((0,))])
    result = deblackbox_circuit(circuit)
    assert result.circuit is circuit
    assert result.bridge is None


def test_deblackbox_order_finding_circuit():
    # Z_4 x Z_15^*, a = 2 of order 4: the repeated-squaring gate must become
    # a valid matrix representation (the finite-modulus criterion passes).
    circuit = build_order_finding_circuit(15, 2, 4)
    result = deblackbox_circuit(circuit, generators=[2, 14])
    assert result.bridge is not None
    rewritten = result.circuit
    assert not rewritten.has_black_box_gates()
    assert rewritten.initial_basis.blackbox is None
    actions = [p["action"] for p in result.provenance]
    assert "extracted automorphism" in actions
    assert result.provenance[0]["action"] == "decompose"
    assert all("oracle_calls" in p for p in result.provenance[1:])


def test_deblackbox_preserves_distribution_small():
    circuit = build_order_finding_circuit(15, 2, 4)
    result = deblackbox_circuit(circuit, generators=[2, 14])
    dense_original = dense_run(circuit, (0, 1))
    dense_rewritten = dense_run(result.circuit, result.point_to_decomposed((0, 1)))
    probs_original = dense_original.probabilities()
    probs_rewritten = dense_rewritten.probabilities()
    mapped = {
        result.point_from_decomposed(pt): p for pt, p in probs_rewritten.items()
    }
    assert set(mapped) == set(probs_original)
    for pt, p in probs_original.items():
        assert mapped[pt] == pytest.approx(p, abs=1e-9)


def test_deblackbox_then_coset_run_matches_dense():
    circuit = build_order_finding_circuit(15, 2, 4)
    result = deblackbox_circuit(circuit, generators=[2, 14])
    start = result.point_to_decomposed((0, 1))
    element = result.circuit.initial_basis.elementary.reduce(start)
    coset = coset_run(result.circuit, element)
    dense = dense_run(result.circuit, start)
    assert states_equal_up_to_global_phase(dense.amplitudes, coset)


def test_point_conversion_round_trip():
    circuit = build_order_finding_circuit(21, 2, 6)
    result = deblackbox_circuit(circuit, generators=[2, 20])
    for x in [1, 2, 4, 20]:
        point = (3, x)
        decomposed = result.point_to_decomposed(point)
        assert result.point_from_decomposed(decomposed) == (Fraction(3), x)


def test_deblackbox_quadratic_gate_in_circuit():
    # A diagonal oracle phase on Z_4 x Z_15^*: the phase couples the exponent
    # register to the order-4 coordinate of the hidden decomposition, which
    # is a genuine bicharacter (denominator divides gcd(4, 4)).
    bb = ZNStarGroup(15)
    table = bb_decompose_bruteforce(bb, [2, 14])
    from normsim.deblackbox import EncodingBridge

    bridge = EncodingBridge(group=bb, table=table)
    slot = table.c.index(4)

    def phase(point):
        k, x = point
        vec = bridge.decode(x).coords
        return (Fraction(int(k) * int(vec[slot]), 4)) % 1

    basis = DesignatedBasis(cyclic_group(4), bb)
    circuit = NormalizerCircuit(
        basis,
        [QFTGate((0,)), QuadraticGate(func=phase, name="oracle_phase")],
    )
    result = deblackbox_circuit(circuit, generators=[2, 14])
    assert not result.circuit.has_black_box_gates()
    actions = [p["action"] for p in result.provenance]
    assert "extracted quadratic" in actions
    dense_original = dense_run(circuit, (0, 1))
    start = result.point_to_decomposed((0, 1))
    dense_rewritten = dense_run(result.circuit, start)
    mapped = {
        result.point_from_decomposed(pt): p
        for pt, p in dense_rewritten.probabilities().items()
    }
    reference = dense_original.probabilities()
    assert set(mapped) == set(reference)
    for pt, p in reference.items():
        assert mapped[pt] == pytest.approx(p, abs=1e-9)


def test_deblackbox_rejects_broken_phase_promise():
    # Coupling the Z_4 exponent to the order-2 coordinate with denominator 4
    # is not a quadratic function (not even well-defined); extraction must
    # notice the broken promise instead of installing a wrong normal form.
    bb = ZNStarGroup(15)
    table = bb_decompose_bruteforce(bb, [2, 14])
    from normsim.deblackbox import EncodingBridge

    bridge = EncodingBridge(group=bb, table=table)
    slot = table.c.index(2)

    def phase(point):
        k, x = point
        vec = bridge.decode(x).coords
        return (Fraction(int(k) * int(vec[slot]), 4)) % 1

    basis = DesignatedBasis(cyclic_group(4), bb)
    circuit = NormalizerCircuit(
        basis, [QuadraticGate(func=phase, name="broken_phase")]
    )
    with pytest.raises(ExtractionError):
        deblackbox_circuit(circuit, generators=[2, 14])


def test_decompose_elliptic_curve_backend():
    # A curve with a non-cyclic group exercises multi-generator tables.
    from normsim.blackbox import EllipticCurveGroup, bb_order

    for params in [(7, 2, 3), (11, 1, 6), (13, 1, 1)]:
        curve = EllipticCurveGroup(*params)
        rng = np.random.default_rng(params[0])
        gens = curve.sample_generators(rng)
        table = bb_decompose_bruteforce(curve, gens)
        table.verify(curve, exhaustive=True)
        assert table.order() == curve.order()
