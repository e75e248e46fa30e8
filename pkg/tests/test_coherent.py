import numpy as np
import pytest

from glq.coherent import (
    CoherentParams,
    CompletenessConfig,
    InsufficientCutoffError,
    check_eigen_relation,
    check_normalization,
    coherent_state,
    coherent_suite,
    completeness_check,
    completeness_suite,
    mode_resolution,
    normalization,
    overlap,
    overlap_closed_form,
    required_cutoff,
    resolved_identity,
    tail_bound,
)
from glq.fock import FockSpace, build_annihilator
from glq.qcore import QDomainError


def brute_qexp(x, q, terms=400):
    total, term = 0.0, 1.0
    for k in range(terms):
        total += term
        term *= x / sum(q**j for j in range(k + 1))
    return total


def test_zero_amplitude_is_vacuum():
    s = FockSpace(2, 4)
    v = coherent_state(CoherentParams((0, 0), 0.5), s)
    np.testing.assert_array_equal(v, s.basis_vector((0, 0)))


def test_single_mode_coefficients_and_norm():
    q, z = 0.5, 0.5
    s = FockSpace(1, 20)
    v = coherent_state(CoherentParams((z,), q), s)
    c = brute_qexp(0.25, q) ** -0.5
    fact = 1.0
    for m in range(21):
        if m:
            fact *= sum(q**j for j in range(m))
        assert v[m] == pytest.approx(c * z**m / np.sqrt(fact), abs=1e-12)
    assert abs(np.vdot(v, v).real - 1) < 1e-10


def test_two_mode_norm_by_direct_summation():
    q = 0.5
    s = FockSpace(2, 16)
    v = coherent_state(CoherentParams((0.3, 0.4j), q), s)
    assert abs(sum(abs(x) ** 2 for x in v) - 1) < 1e-10


def test_params_validation():
    with pytest.raises(QDomainError, match="1/\\(1-q\\)"):
        CoherentParams((1.5,), 0.5)
    p = CoherentParams((0.2, 0.3, 0.4), 0.5)
    assert p.rescaled(1).z == pytest.approx((0.2, np.sqrt(0.5) * 0.3, np.sqrt(0.5) * 0.4))


def test_insufficient_cutoff_raises_with_advice():
    p = CoherentParams((0.9,), 0.5)
    with pytest.raises(InsufficientCutoffError, match="need cutoff"):
        coherent_state(p, FockSpace(1, 3))
    M = required_cutoff(p)
    assert tail_bound(p, M) < 1e-12 <= tail_bound(p, M - 1)


def test_tail_bound_matches_lost_norm():
    p = CoherentParams((0.8,), 0.6)
    for M in (3, 6, 10):
        lost = 1 - np.sum(np.abs(normalization(p) * np.array([0.8**m for m in range(M + 1)])
                                  / np.sqrt([np.prod([sum(0.6**j for j in range(k)) for k in range(1, m + 1)])
                                             for m in range(M + 1)])) ** 2)
        assert tail_bound(p, M) == pytest.approx(lost, rel=1e-6)


def test_eigen_relation_examples():
    r = check_eigen_relation(1, CoherentParams((0.5,), 0.5), FockSpace(1, 40))
    assert r.passed and r.max_residual < 1e-10
    p = CoherentParams((0.2, 0.3, 0.4), 0.5)
    s = FockSpace(3, 12)
    r = check_eigen_relation(1, p, s)
    assert r.passed
    zero = check_eigen_relation(2, CoherentParams((0, 0), 0.5), FockSpace(2, 3))
    assert zero.max_residual == 0


def test_eigen_relation_by_coefficient_recursion():
    # <nu|a_1|z> = sqrt(q^S [n_1+1]) <nu + e_1|z> and the rescaled state's coefficients
    q = 0.5
    p = CoherentParams((0.2, 0.3), q)
    s = FockSpace(2, 14)
    v = coherent_state(p, s)
    lhs = build_annihilator(1, s, q) @ v
    for nu in [(0, 0), (2, 1), (3, 4)]:
        up = s.encode((nu[0] + 1, nu[1]))
        amp = np.sqrt(q ** nu[1] * sum(q**j for j in range(nu[0] + 1)))
        assert lhs[s.encode(nu)] == pytest.approx(amp * v[up], abs=1e-15)


def test_printed_normalization_fails_corrected_passes():
    p = CoherentParams((0.3, 0.4j), 0.5)
    s = FockSpace(2, 14)
    good = check_normalization(p, s)
    bad = check_normalization(p, s, "printed")
    assert good.holds and good.passed
    assert not bad.holds and bad.passed and not bad.expected


def test_overlap_closed_form():
    q = 0.6
    s = FockSpace(2, 30)
    z, w = CoherentParams((0.3, 0.2j), q), CoherentParams((-0.1, 0.4), q)
    assert abs(overlap(z, w, s) - overlap_closed_form(z, w)) < 1e-12


def test_coherent_suite_random_amplitudes():
    rng = np.random.default_rng(7)
    for q in (0.3, 0.5, 0.9):
        for n in (1, 2):
            for _ in range(5):
                r = np.sqrt(rng.random(n)) * 0.6
                z = r * np.exp(2j * np.pi * rng.random(n))
                p = CoherentParams(tuple(z), q)
                M = required_cutoff(p)
                reports = coherent_suite(p, FockSpace(n, M))
                assert all(x.passed for x in reports), [x.line() for x in reports]


def test_mode_resolution_is_diagonal_identity():
    R = mode_resolution(8, 0.5)
    np.testing.assert_allclose(R, np.eye(9), atol=1e-12)


@pytest.mark.parametrize("n,M", [(1, 8), (2, 6)])
def test_completeness_examples(n, M):
    s = FockSpace(n, M)
    r = completeness_check(s, 0.5)
    assert r.passed and r.max_residual < 1e-8
    full = resolved_identity(s, 0.5)
    off = full - np.diag(np.diag(full))
    assert np.abs(off).max() < 1e-10


def test_printed_measure_fails_except_two_modes():
    for n, expect_hold in ((1, False), (2, True), (3, False)):
        r = completeness_check(FockSpace(n, 4), 0.5, CompletenessConfig(measure="printed"))
        assert r.holds == expect_hold
        assert r.passed


def test_completeness_near_classical_limit():
    r = completeness_check(FockSpace(1, 6), 0.999)
    assert r.passed


def test_completeness_suite_tightening():
    reports = completeness_suite(FockSpace(1, 6), 0.5, tol=1e-12)
    assert all(r.tolerance == 1e-12 for r in reports)
    assert all(r.passed for r in reports)


def test_config_validation():
    with pytest.raises(ValueError):
        CompletenessConfig(radial_tol=0)
    with pytest.raises(ValueError):
        CompletenessConfig(measure="other")
