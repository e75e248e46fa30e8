import numpy as np
import pytest
import scipy.sparse as sp

from glq.coherent import CoherentParams, coherent_coefficients
from glq.fock import FockSpace, SafeSector, build_annihilator, build_creator, build_scale_product
from glq.qcore import Polynomial, q_factorials
from glq.weyl import (
    WeylParams,
    _Workspace,
    check_exponential_shift,
    check_power_identity,
    check_q_commutation,
    check_shift_identity,
    check_weyl_relation,
    polynomial_of,
    qexp_apply,
    qexp_operator,
    weyl_suite,
)


def test_qexp_operator_zero_is_identity():
    s = FockSpace(2, 3)
    E = qexp_operator(0, build_creator(1, s, 0.5), 0.5)
    assert abs(E - sp.identity(s.dim)).max() == 0


def test_qexp_operator_terminates_on_nilpotent():
    s = FockSpace(1, 4)
    ad = build_creator(1, s, 0.5)
    E = qexp_operator(0.7, ad, 0.5).toarray()
    # explicit sum up to k = 4; the k = 5 term is zero
    ref = np.zeros((5, 5), dtype=complex)
    P = np.eye(5)
    facts = q_factorials(5, 0.5)
    for k in range(6):
        ref += 0.7**k * P / facts[k]
        P = ad.toarray() @ P
    assert not P.any()
    np.testing.assert_allclose(E, ref, atol=1e-15)


def test_exp_creator_on_vacuum_matches_coherent_coefficients():
    q, t = 0.5, 0.4
    s = FockSpace(1, 10)
    v = qexp_operator(t, build_creator(1, s, q), q) @ s.basis_vector((0,))
    # exp_q(t a+)|0> has coefficients t^m / sqrt([m]!) * ... = coherent series up to normalization
    ref = coherent_coefficients(CoherentParams((t,), q), s)
    np.testing.assert_allclose(v, ref, atol=1e-15)


def test_qexp_apply_matches_operator():
    s = FockSpace(2, 3)
    A = build_annihilator(1, s, 0.6) + build_creator(2, s, 0.6)
    B = np.eye(s.dim)[:, :5]
    np.testing.assert_allclose(qexp_apply(0.3, A, B, 0.6), qexp_operator(0.3, A, 0.6) @ B, atol=1e-14)
    D = build_scale_product(1, s, 0.6)
    np.testing.assert_allclose(qexp_apply(0.5, D, B, 0.6), qexp_operator(0.5, D, 0.6) @ B, atol=1e-14)


def test_polynomial_of_operator():
    s = FockSpace(1, 4)
    ad = build_creator(1, s, 0.5)
    f = Polynomial((1.0, 0.0, 2.0))
    np.testing.assert_allclose(polynomial_of(f, ad, s).toarray(), np.eye(5) + 2 * (ad @ ad).toarray())


def test_shift_identity_examples():
    s = FockSpace(2, 8)
    r = check_shift_identity(1, Polynomial((3.0,)), s, 0.5)
    assert r.max_residual == 0
    r = check_shift_identity(2, Polynomial.monomial(1), FockSpace(2, 6), 0.5)
    assert r.passed
    r = check_shift_identity(1, Polynomial.monomial(3), s, 0.5)
    assert r.passed and r.max_residual < 1e-12


def test_shift_identity_margin_guard():
    with pytest.raises(ValueError, match="margin"):
        check_shift_identity(1, Polynomial.monomial(3), FockSpace(1, 6), 0.5, margin=2)


def test_power_identity_examples():
    assert check_power_identity(1, 0.3, 0, FockSpace(1, 8), 0.5).max_residual == 0
    assert check_power_identity(1, 0.3, 1, FockSpace(1, 8), 0.5).max_residual < 1e-10
    assert check_power_identity(1, 0.3, 2, FockSpace(2, 8), 0.5).max_residual < 1e-10


@pytest.mark.parametrize("q", [0.3, 0.9])
def test_exponential_shift_and_q_commutation(q):
    s = FockSpace(2, 6)
    assert check_exponential_shift(1, 0.4 - 0.2j, s, q).passed
    assert check_q_commutation(2, s, q).passed


def test_weyl_params_validation():
    with pytest.raises(ValueError, match="as many"):
        WeylParams((0.1,), (0.1, 0.2), 0.5)
    with pytest.raises(ValueError, match="<="):
        WeylParams((0.9,), (0.1,), 0.5)


def test_weyl_zero_parameters_trivial():
    reports = check_weyl_relation(WeylParams((0, 0), (0, 0), 0.5), FockSpace(2, 4))
    assert all(r.max_residual == 0 for r in reports)


def test_weyl_examples():
    reports = check_weyl_relation(WeylParams((0.4,), (0.3,), 0.5), FockSpace(1, 10), margin=5)
    assert all(r.passed and r.max_residual < 1e-9 for r in reports)
    reports = check_weyl_relation(WeylParams((0.3, 0.2), (0.2, 0.3), 0.5), FockSpace(2, 8), margin=4)
    eq23 = [r for r in reports if r.equation == "Eq(23)"]
    assert len(eq23) == 2 and all(r.passed for r in eq23)


def test_unpadded_workspace_shows_truncation_tail():
    params = WeylParams((0.4,), (0.3,), 0.5)
    space = FockSpace(1, 10)
    bare = check_weyl_relation(params, space, margin=5, padding=0)
    padded = check_weyl_relation(params, space, margin=5)
    assert max(r.max_residual for r in bare) > 1e3 * max(r.max_residual for r in padded)
    assert "no workspace padding" in bare[0].note


def test_workspace_matches_full_sparse_operators():
    q = 0.6
    space = FockSpace(2, 3)
    ws = _Workspace(space, q, margin=1, padding=2)
    work = ws.work
    s, t = 0.3 - 0.1j, 0.2
    for i in (1, 2):
        a = build_annihilator(i, work, q)
        ad = build_creator(i, work, q)
        Qs = build_scale_product(i, work, q)
        B = ws.block
        np.testing.assert_allclose(ws.exp_a(i, s, B), qexp_operator(s, a, q) @ B, atol=1e-14)
        np.testing.assert_allclose(ws.exp_ad(i, t, B), qexp_operator(t, ad, q) @ B, atol=1e-14)
        np.testing.assert_allclose(ws.exp_scale(i, s * t, B), qexp_operator(s * t, Qs, q) @ B, atol=1e-14)
        shifted = qexp_apply(s, a + t * Qs, B, q)
        np.testing.assert_allclose(ws.exp_shifted(i, s, t, B), shifted, atol=1e-13)


def test_orderings_and_bad_ordering():
    params = WeylParams((0.3, 0.2), (0.2, 0.3), 0.5)
    with pytest.raises(ValueError, match="ordering"):
        check_weyl_relation(params, FockSpace(2, 4), orderings=("sideways",), padding=2)
    with pytest.raises(ValueError, match="amplitudes"):
        check_weyl_relation(WeylParams((0.1,), (0.1,), 0.5), FockSpace(2, 4))


def test_weyl_suite_all_pass():
    reports = weyl_suite(WeylParams((0.3, 0.2), (0.2, 0.3), 0.5), FockSpace(2, 8))
    assert all(r.passed for r in reports), [r.line() for r in reports if not r.passed]
    assert {"Eq(18)", "Eq(19)", "Eq(20)", "Eq(21)", "Eq(22)", "Eq(23)"} <= {r.equation for r in reports}
    assert all(r.sector == SafeSector(FockSpace(2, 8), 4).describe()
               for r in reports if r.equation in ("Eq(21)", "Eq(23)"))
