import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trotterforge.errors import (
    DimensionError,
    DomainError,
    IndexRangeError,
    ValidationError,
)
from trotterforge.hamlib import (
    CoeffMatrix,
    HamiltonianSpec,
    IndexRegion,
    PauliKind,
    build_power_law,
    coeff_oracle,
    fixed_point_round,
    norms,
    pauli_decompose_term,
    pauli_reconstruct,
    spec_from_json,
    spec_to_json,
)

ZZ = (PauliKind.Z, PauliKind.Z)


# -- oracles --------------------------------------------------------------------


def power_law_entries_oracle(n, d, alpha):
    """Direct 1/dist^alpha over lattice coordinates, independent of hamlib."""
    side = round(n ** (1 / d))
    assert side**d == n

    def coords(j):
        rem, out = j - 1, []
        for _ in range(d):
            out.append(rem % side)
            rem //= side
        return tuple(reversed(out))

    out = {}
    for j in range(1, n + 1):
        for k in range(j + 1, n + 1):
            dist = math.dist(coords(j), coords(k))
            out[(j, k)] = 1.0 / dist**alpha
    return out


def zeta_upper_oracle(alpha):
    """Partial sum + integral tail upper bound on zeta(alpha), alpha > 1."""
    head = sum(1.0 / m**alpha for m in range(1, 101))
    return head + 100.0 ** (1 - alpha) / (alpha - 1)


def rand_coeff(rng, n):
    a = np.triu(rng.standard_normal((n, n)), k=1)
    return CoeffMatrix(n, a)


# -- build_power_law ------------------------------------------------------------


def test_power_law_n2_single_entry():
    spec = build_power_law(2, 1, 2.0)
    assert spec.two_local[ZZ].entries() == {(1, 2): 1.0}


def test_power_law_n4_values():
    spec = build_power_law(4, 1, 2.0)
    got = spec.two_local[ZZ].entries()
    assert got == pytest.approx(
        {(1, 2): 1.0, (1, 3): 0.25, (1, 4): 1.0 / 9.0, (2, 3): 1.0, (2, 4): 0.25, (3, 4): 1.0}
    )


def test_power_law_2d_diagonal_corner():
    spec = build_power_law(4, 2, 1.0)
    # sites 1 and 4 sit at opposite corners of the 2x2 lattice
    assert spec.two_local[ZZ].value(1, 4) == pytest.approx(1.0 / math.sqrt(2.0))


@pytest.mark.parametrize("n,d,alpha", [(8, 1, 1.0), (16, 2, 2.0), (27, 3, 1.5)])
def test_power_law_matches_enumeration_oracle(n, d, alpha):
    spec = build_power_law(n, d, alpha)
    expected = power_law_entries_oracle(n, d, alpha)
    assert spec.two_local[ZZ].entries() == pytest.approx(expected)


def test_power_law_rejects_bad_lattice_and_alpha():
    with pytest.raises(DimensionError):
        build_power_law(6, 2, 1.0)
    with pytest.raises(DomainError):
        build_power_law(4, 1, 0.0)


def test_sign_rules_deterministic():
    a = build_power_law(8, 1, 1.0, ZZ, "seeded-random", seed=7)
    b = build_power_law(8, 1, 1.0, ZZ, "seeded-random", seed=7)
    assert a.two_local[ZZ].entries() == b.two_local[ZZ].entries()
    alt = build_power_law(4, 1, 1.0, ZZ, "alternating")
    assert alt.two_local[ZZ].value(1, 2) == -1.0  # odd j+k
    assert alt.two_local[ZZ].value(1, 3) == 0.5


# -- coeff_oracle ----------------------------------------------------------------


def test_fixed_point_examples():
    assert fixed_point_round(0.25, 4) == 0.25  # 0.0100 exactly
    assert fixed_point_round(1.0 / 3.0, 4) == 5.0 / 16.0  # 0.0101 after rounding
    assert fixed_point_round(0.0, 7) == 0.0


def test_coeff_oracle_bit_exact_and_range():
    spec = build_power_law(4, 1, 2.0)
    first = coeff_oracle(spec, ZZ, 1, 3, 4)
    assert first == coeff_oracle(spec, ZZ, 1, 3, 4) == 0.25
    with pytest.raises(IndexRangeError):
        coeff_oracle(spec, ZZ, 3, 1, 4)


def test_coeff_oracle_consistent_with_norms():
    spec = build_power_law(8, 1, 1.0)
    w = 10
    mat = spec.two_local[ZZ]
    rounded = sum(
        abs(coeff_oracle(spec, ZZ, j, k, w)) for j in range(1, 9) for k in range(j + 1, 9)
    )
    assert abs(rounded - norms(mat, "vec1")) <= 8 * 8 * 2.0**-w


# -- norms -------------------------------------------------------------------------


def test_norm_examples_power_law_n4():
    mat = build_power_law(4, 1, 2.0).two_local[ZZ]
    assert norms(mat, "vec1") == pytest.approx(1 + 0.25 + 1 / 9 + 1 + 0.25 + 1)
    assert norms(mat, "induced1") == pytest.approx(2.25)
    assert norms(mat, "induced1_restricted", eta=2) == pytest.approx(2.0)


def test_restricted_region_norms():
    mat = build_power_law(4, 1, 2.0).two_local[ZZ]
    region = IndexRegion.rect(1, 2, 3, 4)
    assert norms(mat, "restricted_1", region=region) == pytest.approx(0.25 + 1 / 9 + 1 + 0.25)
    assert norms(mat, "restricted_max", region=region) == pytest.approx(1.0)
    boxes = [(1, IndexRegion.single(1, 3)), (2, IndexRegion.rect(2, 2, 3, 4))]
    assert norms(mat, "box_1", boxes=boxes) == pytest.approx(0.25 + 2 * 1.0)


def test_norm_eta_out_of_range():
    mat = build_power_law(4, 1, 2.0).two_local[ZZ]
    with pytest.raises(DomainError):
        norms(mat, "induced1_restricted", eta=5)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 12), st.integers(0, 10_000))
def test_norm_inequality_chain(n, seed):
    mat = rand_coeff(np.random.default_rng(seed), n)
    eta = 1 + seed % n
    restricted = norms(mat, "induced1_restricted", eta=eta)
    induced = norms(mat, "induced1")
    assert restricted <= induced + 1e-12
    assert induced <= 2.0 * norms(mat, "vec1") + 1e-12  # symmetric completion doubles
    assert norms(mat, "max") <= induced + 1e-12


@pytest.mark.parametrize("n", [8, 16, 32, 64])
def test_power_law_vec1_zeta_bound(n):
    for alpha in (1.5, 2.0, 3.0):
        mat = build_power_law(n, 1, alpha).two_local[ZZ]
        assert norms(mat, "vec1") <= n * zeta_upper_oracle(alpha)


# -- pauli decomposition -----------------------------------------------------------


def test_pauli_decompose_examples():
    z = np.diag([1.0, -1.0])
    x = np.array([[0, 1], [1, 0]], dtype=float)
    y = np.array([[0, -1j], [1j, 0]])
    zz = pauli_decompose_term(np.kron(z, z))
    assert zz[(PauliKind.Z, PauliKind.Z)] == pytest.approx(1.0)
    assert sum(abs(v) for k, v in zz.items() if k != (PauliKind.Z, PauliKind.Z)) < 1e-12
    ident = pauli_decompose_term(np.eye(4))
    assert ident[(PauliKind.I, PauliKind.I)] == pytest.approx(1.0)
    mixed = pauli_decompose_term((np.kron(x, y) + np.kron(y, x)) / 2.0)
    assert mixed[(PauliKind.X, PauliKind.Y)] == pytest.approx(0.5)
    assert mixed[(PauliKind.Y, PauliKind.X)] == pytest.approx(0.5)


def test_pauli_roundtrip_random_hermitian():
    rng = np.random.default_rng(3)
    for _ in range(10):
        raw = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        herm = (raw + raw.conj().T) / 2.0
        back = pauli_reconstruct(pauli_decompose_term(herm))
        assert np.abs(back - herm).max() < 1e-12


def test_pauli_decompose_rejects_non_hermitian():
    with pytest.raises(ValidationError):
        pauli_decompose_term(np.triu(np.ones((4, 4))))


# -- CoeffMatrix / spec validation --------------------------------------------------


def test_coeff_matrix_rejects_lower_triangle():
    with pytest.raises(ValidationError):
        CoeffMatrix(3, np.ones((3, 3)))


def test_spec_rejects_identity_group():
    mat = CoeffMatrix.from_entries(2, {(1, 2): 1.0})
    with pytest.raises(ValidationError):
        HamiltonianSpec(2, 1, {(PauliKind.I, PauliKind.Z): mat}, {})


def test_block_reads_symmetric_completion():
    mat = CoeffMatrix.from_entries(3, {(1, 2): 2.0, (2, 3): 5.0})
    block = mat.block([2], [1, 3])
    assert block.tolist() == [[2.0, 5.0]]


# -- JSON -----------------------------------------------------------------------


def test_spec_json_roundtrip():
    spec = build_power_law(8, 1, 1.5, (PauliKind.X, PauliKind.Y), "alternating")
    again = spec_from_json(spec_to_json(spec))
    assert again.n == spec.n and again.d == spec.d and again.alpha == spec.alpha
    key = (PauliKind.X, PauliKind.Y)
    assert again.two_local[key].entries() == pytest.approx(spec.two_local[key].entries())


def test_spec_json_rejects_unknown_fields():
    with pytest.raises(ValidationError):
        spec_from_json(json.dumps({"n": 2, "d": 1, "bogus": 1}))
