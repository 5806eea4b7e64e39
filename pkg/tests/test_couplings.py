"""Couplings: ST normal form, validation, equivalence, star scattering."""

import numpy as np
import pytest

from qgraph import (
    CouplingKind,
    InputError,
    NamedCoupling,
    STForm,
    StructuralError,
    VertexCoupling,
    ab_equiv,
    ab_from_st,
    coupling_distance,
    named_to_st,
    permute_coupling,
    st_from_ab,
    star_scattering,
    validate_coupling,
)
from helpers import make_complex_t, random_st


# -- named families ---------------------------------------------------------

def test_delta_st_parameters():
    st = named_to_st(NamedCoupling(kind=CouplingKind.DELTA, n=4, alpha=2.5))
    assert st.n == 4 and st.m == 1
    assert st.perm == (1, 2, 3, 4)
    np.testing.assert_allclose(st.S, [[2.5]])
    np.testing.assert_allclose(st.T, np.ones((1, 3)))


def test_kirchhoff_is_zero_strength_delta():
    kir = named_to_st(NamedCoupling(kind=CouplingKind.KIRCHHOFF, n=3))
    delta0 = named_to_st(NamedCoupling(kind=CouplingKind.DELTA, n=3, alpha=0.0))
    assert ab_equiv(ab_from_st(kir), ab_from_st(delta0))


def test_dirichlet_st_is_empty():
    st = named_to_st(NamedCoupling(kind=CouplingKind.DIRICHLET, n=3))
    assert st.m == 0 and st.S.shape == (0, 0) and st.T.shape == (0, 3)
    c = ab_from_st(st)
    # B = 0 and invertible A: the condition reduces to f(v) = 0
    assert np.all(c.B == 0)
    assert np.linalg.matrix_rank(c.A) == 3


def test_delta_matches_textbook_matrices():
    """Continuity rows plus the derivative-sum rule define the delta coupling."""
    n, alpha = 3, 1.7
    a_mat = np.zeros((n, n), dtype=complex)
    b_mat = np.zeros((n, n), dtype=complex)
    for i in range(n - 1):
        a_mat[i, i] = 1.0
        a_mat[i, i + 1] = -1.0
    a_mat[n - 1, 0] = -alpha
    b_mat[n - 1, :] = 1.0
    textbook = VertexCoupling(n=n, A=a_mat, B=b_mat)
    assert validate_coupling(textbook).ok
    st = named_to_st(NamedCoupling(kind=CouplingKind.DELTA, n=n, alpha=alpha))
    assert ab_equiv(ab_from_st(st), textbook)


def test_named_coupling_parameter_checks():
    with pytest.raises(InputError):
        NamedCoupling(kind=CouplingKind.DELTA, n=3)
    with pytest.raises(InputError):
        NamedCoupling(kind=CouplingKind.DELTA_PRIME_S, n=3, beta=0.0)
    with pytest.raises(InputError):
        NamedCoupling(kind=CouplingKind.CUSTOM, n=3)


# -- validation -------------------------------------------------------------

def test_validate_accepts_reference_couplings(reference_couplings):
    for name, st in reference_couplings.items():
        result = validate_coupling(ab_from_st(st))
        assert result.ok, f"{name}: {result.violations}"


def test_validate_rejects_non_hermitian_ab_star():
    bad = VertexCoupling(n=2, A=np.array([[1.0, 1.0], [0.0, 1.0]]), B=np.eye(2))
    result = validate_coupling(bad)
    assert not result.ok
    assert any("Hermitian" in v for v in result.violations)


def test_validate_rejects_rank_deficiency():
    bad = VertexCoupling(n=2, A=np.diag([1.0, 0.0]), B=np.zeros((2, 2)))
    result = validate_coupling(bad)
    assert not result.ok
    assert any("rank deficient" in v for v in result.violations)


def test_st_form_rejects_non_hermitian_s():
    with pytest.raises(StructuralError):
        STForm(n=2, m=2, perm=(1, 2), S=np.array([[0.0, 1.0], [0.0, 0.0]]), T=np.zeros((2, 0)))


def test_st_form_rejects_bad_permutation():
    with pytest.raises(StructuralError):
        STForm(n=2, m=1, perm=(1, 1), S=np.zeros((1, 1)), T=np.zeros((1, 1)))


# -- normal form round trips ------------------------------------------------

def test_roundtrip_reference_couplings(reference_couplings):
    for name, st in reference_couplings.items():
        c = ab_from_st(st)
        st2 = st_from_ab(c)
        assert st2.m == st.m, name
        assert coupling_distance(ab_from_st(st2), c) <= 1e-10, name


def test_roundtrip_nontrivial_permutation():
    """A coupling whose B needs renumbering before its leading block inverts."""
    st = make_complex_t()
    c = ab_from_st(st)
    # move the rank-deficient direction of B to the front
    shuffled = permute_coupling(c, (3, 1, 2))
    st2 = st_from_ab(shuffled)
    assert st2.m == st.m
    assert coupling_distance(ab_from_st(st2), shuffled) <= 1e-10


def test_roundtrip_random_small_sample():
    rng = np.random.default_rng(11)
    for _ in range(25):
        st = random_st(rng)
        c = ab_from_st(st)
        st2 = st_from_ab(c)
        assert st2.m == st.m
        assert coupling_distance(ab_from_st(st2), c) <= 1e-10


def test_st_from_ab_rejects_invalid():
    bad = VertexCoupling(n=2, A=np.array([[1.0, 1.0], [0.0, 1.0]]), B=np.eye(2))
    with pytest.raises(InputError):
        st_from_ab(bad)


# -- equivalence and distance ----------------------------------------------

def test_ab_equiv_under_row_mixing():
    st = make_complex_t()
    c = ab_from_st(st)
    mix = np.array([[2.0, 1.0j, 0.0], [0.0, 1.0, -3.0], [1.0, 0.0, 1.0]])
    mixed = VertexCoupling(n=3, A=mix @ c.A, B=mix @ c.B)
    assert ab_equiv(c, mixed)
    assert coupling_distance(c, mixed) <= 1e-12


def test_coupling_distance_separates_families():
    delta = ab_from_st(named_to_st(NamedCoupling(kind=CouplingKind.DELTA, n=3, alpha=1.0)))
    dirichlet = ab_from_st(named_to_st(NamedCoupling(kind=CouplingKind.DIRICHLET, n=3)))
    assert coupling_distance(delta, dirichlet) > 0.5


def test_coupling_distance_degree_mismatch():
    c2 = ab_from_st(named_to_st(NamedCoupling(kind=CouplingKind.DIRICHLET, n=2)))
    c3 = ab_from_st(named_to_st(NamedCoupling(kind=CouplingKind.DIRICHLET, n=3)))
    with pytest.raises(StructuralError):
        coupling_distance(c2, c3)


# -- scattering -------------------------------------------------------------

def test_delta_scattering_closed_form():
    """S(k) for a delta coupling is 2/(n + i alpha/k) J - I entrywise."""
    n, alpha, k = 3, 1.0, 0.7
    c = ab_from_st(named_to_st(NamedCoupling(kind=CouplingKind.DELTA, n=n, alpha=alpha)))
    got = star_scattering(c, k)
    factor = 2.0 / (n + 1j * alpha / k)
    expected = factor * np.ones((n, n)) - np.eye(n)
    np.testing.assert_allclose(got, expected, atol=1e-12)


def test_kirchhoff_two_edges_is_full_transmission():
    c = ab_from_st(named_to_st(NamedCoupling(kind=CouplingKind.KIRCHHOFF, n=2)))
    for k in (0.5, 1.0, 2.0):
        np.testing.assert_allclose(
            star_scattering(c, k), [[0.0, 1.0], [1.0, 0.0]], atol=1e-12
        )


def test_dirichlet_scattering_is_minus_identity():
    c = ab_from_st(named_to_st(NamedCoupling(kind=CouplingKind.DIRICHLET, n=3)))
    np.testing.assert_allclose(star_scattering(c, 1.3), -np.eye(3), atol=1e-12)


def test_star_scattering_unitary_random():
    rng = np.random.default_rng(5)
    for _ in range(30):
        c = ab_from_st(random_st(rng))
        s = star_scattering(c, float(rng.uniform(0.3, 3.0)))
        np.testing.assert_allclose(s.conj().T @ s, np.eye(c.n), atol=1e-10)


def test_star_scattering_rejects_bad_momentum(st_delta):
    c = ab_from_st(st_delta)
    with pytest.raises(InputError):
        star_scattering(c, 0.0)
    with pytest.raises(InputError):
        star_scattering(c, -1.0)


def test_permute_coupling_conjugates_scattering():
    st = make_complex_t()
    c = ab_from_st(st)
    perm = (3, 1, 2)
    cols = [p - 1 for p in perm]
    s_orig = star_scattering(c, 0.9)
    s_perm = star_scattering(permute_coupling(c, perm), 0.9)
    np.testing.assert_allclose(s_perm, s_orig[np.ix_(cols, cols)], atol=1e-12)
