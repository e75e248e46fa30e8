"""q-exponential operator calculus and the q-deformed Weyl-Heisenberg relation.

Normal-ordered expressions (creators left of annihilators) only ever pass
through occupations between the row and the column, so on a safe sector they
are exact on the truncated space.  ``exp_q(s a) exp_q(t a^dag)`` is
anti-normal ordered: its matrix elements are infinite sums over intermediate
occupations, and a cutoff at ``M`` drops a tail of order ``|s t|^(margin+1)``.
The Weyl-relation checks therefore evaluate both sides on a padded
workspace ``FockSpace(n, M + padding)`` and compare on the sector of the
original space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .checks import CheckReport
from .fock import (
    FockSpace,
    SafeSector,
    _canonical,
    build_annihilator,
    build_creator,
    build_scale,
    build_scale_product,
    check_relation,
    identity,
)
from .qcore import (
    SERIES_MAX_TERMS,
    SeriesConvergenceError,
    Polynomial,
    _as_qparam,
    q_derivative,
    q_exp_series,
    q_number,
)

SHIFT_TOL = 1e-12
EXP_SHIFT_TOL = 1e-10
POWER_TOL = 1e-10
WEYL_TOL = 1e-9
PARAM_WINDOW = 0.5

ORDERINGS = ("ascending", "descending")


@dataclass(frozen=True)
class WeylParams:
    """Amplitudes ``s_i`` (annihilator side) and ``t_i`` (creator side)."""

    s: tuple
    t: tuple
    qp: object
    window: float = PARAM_WINDOW

    def __post_init__(self):
        s = tuple(complex(v) for v in np.atleast_1d(self.s))
        t = tuple(complex(v) for v in np.atleast_1d(self.t))
        if len(s) != len(t):
            raise ValueError(f"need as many s as t amplitudes, got {len(s)} and {len(t)}")
        bad = [v for v in s + t if abs(v) > self.window]
        if bad:
            raise ValueError(f"|s_i|, |t_i| must be <= {self.window}; got {bad[0]}")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "qp", _as_qparam(self.qp))


def _is_diagonal(A) -> bool:
    if sp.issparse(A):
        coo = A.tocoo()
        return bool(np.all(coo.row == coo.col))
    A = np.asarray(A)
    return bool(np.count_nonzero(A - np.diag(np.diag(A))) == 0)


def _apply_series(c, A, B, qp, tol, max_terms):
    """``sum_k (c A)^k B / [k]!`` with ``B`` a dense block."""
    total = np.array(B, dtype=complex)
    term = total.copy()
    for k in range(1, max_terms):
        term = c * (A @ term) / float(q_number(k, qp))
        if not np.any(term):
            return total
        total += term
        if k >= 5 and np.max(np.abs(term)) < tol * max(1.0, np.max(np.abs(total))):
            return total
    raise SeriesConvergenceError(f"operator q-exponential did not converge in {max_terms} terms")


def qexp_apply(c, A, B, qp, tol: float = 1e-16, max_terms: int = SERIES_MAX_TERMS) -> np.ndarray:
    """``exp_q(c A) @ B`` without forming the exponential.

    Diagonal ``A`` is exponentiated entrywise; otherwise the series runs until
    the terms vanish (nilpotent ``A``) or fall below ``tol``.
    """
    qp = _as_qparam(qp)
    B = np.asarray(B, dtype=complex)
    if c == 0:
        return B.copy()
    if _is_diagonal(A):
        return _diag_qexp(c, A, qp).reshape((-1,) + (1,) * (B.ndim - 1)) * B
    return _apply_series(c, A, B, qp, tol, max_terms)


def _diag_qexp(c, A, qp) -> np.ndarray:
    d = c * (A.diagonal() if sp.issparse(A) else np.diag(A))
    vals, inverse = np.unique(d, return_inverse=True)
    return np.array([q_exp_series(v, qp) for v in vals])[inverse.ravel()]


def qexp_operator(c, A, qp, tol: float = 1e-16, max_terms: int = SERIES_MAX_TERMS):
    """``exp_q(c A) = sum_k (c A)^k / [k]!`` as a matrix.

    Creators and annihilators on a cutoff-``M`` space are nilpotent, so their
    series stops after ``M + 1`` terms; ``c = 0`` gives the identity.
    """
    qp = _as_qparam(qp)
    n = A.shape[0]
    if c == 0:
        return _canonical(sp.identity(n, dtype=complex, format="csr"))
    if _is_diagonal(A):
        return _canonical(sp.diags(_diag_qexp(c, A, qp), format="csr"))
    A = sp.csr_matrix(A, dtype=complex)
    total = sp.identity(n, dtype=complex, format="csr")
    term = total
    for k in range(1, max_terms):
        term = (c / float(q_number(k, qp))) * (A @ term)
        term.eliminate_zeros()
        if term.nnz == 0:
            return _canonical(total)
        total = total + term
        if k >= 5 and abs(term).max() < tol * max(1.0, abs(total).max()):
            return _canonical(total)
    raise SeriesConvergenceError(f"operator q-exponential did not converge in {max_terms} terms")


def polynomial_of(f: Polynomial, A, space: FockSpace):
    """``f(A)`` by Horner's rule."""
    out = 0 * identity(space)
    one = identity(space)
    for c in reversed(f.coefficients):
        out = out @ A + c * one
    return _canonical(out)


def _require_margin(margin: int, needed: int, what: str) -> None:
    if margin < needed:
        raise ValueError(f"sector margin {margin} is too small for {what}; need >= {needed}")


def check_shift_identity(
    mode: int, f: Polynomial, space: FockSpace, qp, margin: int | None = None, tol: float = SHIFT_TOL
) -> CheckReport:
    """``a_i f(a+_i) = f(q a+_i) a_i + (Df)(a+_i) Q_{i+1}...Q_n`` for polynomial ``f``."""
    qp = _as_qparam(qp)
    space.check_mode(mode)
    needed = max(f.degree, 0) + 1
    margin = needed if margin is None else margin
    _require_margin(margin, needed, f"a degree-{f.degree} polynomial")
    a = build_annihilator(mode, space, qp)
    ad = build_creator(mode, space, qp)
    lhs = a @ polynomial_of(f, ad, space)
    rhs = polynomial_of(f.dilate(qp.q), ad, space) @ a + polynomial_of(
        q_derivative(f, qp), ad, space
    ) @ build_scale_product(mode + 1, space, qp)
    return check_relation(
        lhs, rhs, SafeSector(space, margin), tol=tol,
        relation=f"a{mode} f(a+{mode}) = f(q a+{mode}) a{mode} + (Df)(a+{mode}) Q{mode + 1}..Q{space.n_modes}"
        + f", deg f = {f.degree}",
        equation="Eq(18)",
    )


def check_exponential_shift(
    mode: int, t: complex, space: FockSpace, qp, margin: int | None = None, tol: float = EXP_SHIFT_TOL
) -> CheckReport:
    """``a_i exp_q(t a+_i) = exp_q(q t a+_i) a_i + t exp_q(t a+_i) Q_{i+1}...Q_n``."""
    qp = _as_qparam(qp)
    margin = space.cutoff // 2 if margin is None else margin
    _require_margin(margin, 1, "a single annihilator")
    a = build_annihilator(mode, space, qp)
    ad = build_creator(mode, space, qp)
    e = qexp_operator(t, ad, qp)
    lhs = a @ e
    rhs = qexp_operator(qp.q * t, ad, qp) @ a + t * (e @ build_scale_product(mode + 1, space, qp))
    return check_relation(
        lhs, rhs, SafeSector(space, margin), tol=tol,
        relation=f"a{mode} e(t a+{mode}) = e(qt a+{mode}) a{mode} + t e(t a+{mode}) Q{mode + 1}..Q{space.n_modes}",
        equation="Eq(19)",
    )


def check_power_identity(
    mode: int, t: complex, m: int, space: FockSpace, qp, margin: int | None = None, tol: float = POWER_TOL
) -> CheckReport:
    """``a_i^m exp_q(t a+_i) = exp_q(t a+_i) (a_i + t Q_i...Q_n)^m``."""
    qp = _as_qparam(qp)
    margin = space.cutoff // 2 if margin is None else margin
    _require_margin(margin, m, f"{m} annihilators")
    a = build_annihilator(mode, space, qp)
    e = qexp_operator(t, build_creator(mode, space, qp), qp)
    shifted = a + t * build_scale_product(mode, space, qp)
    lhs = e.copy()
    rhs = identity(space)
    for _ in range(m):
        lhs = a @ lhs
        rhs = rhs @ shifted
    return check_relation(
        lhs, e @ rhs, SafeSector(space, margin), tol=tol,
        relation=f"a{mode}^{m} e(t a+{mode}) = e(t a+{mode}) (a{mode} + t Q{mode}..Q{space.n_modes})^{m}",
        equation="Eq(20)",
    )


def check_q_commutation(mode: int, space: FockSpace, qp) -> CheckReport:
    """``a_i Q_i - q Q_i a_i = 0`` on the full basis."""
    qp = _as_qparam(qp)
    a = build_annihilator(mode, space, qp)
    Q = build_scale(mode, space, qp)
    return check_relation(
        a @ Q, qp.q * (Q @ a), SafeSector(space, 0), tol=SHIFT_TOL,
        relation=f"a{mode} Q{mode} - q Q{mode} a{mode} = 0", equation="Eq(22)",
    )


class _Workspace:
    """Mode-local evaluation on the padded space.

    ``a_i`` acts as the single-mode annihilator on mode ``i`` scaled by
    ``q**(S/2)``, where ``S`` is the total occupation of modes after ``i``.
    Any function of ``a_i``, ``a+_i`` and ``Q_i...Q_n`` is therefore a
    single-mode matrix for each value of ``S``, applied along axis ``i`` of
    the state tensor.  Columns of the block are the sector basis vectors.
    """

    def __init__(self, space: FockSpace, qp, margin: int, padding: int):
        self.space = space
        self.qp = qp = _as_qparam(qp)
        self.work = FockSpace(space.n_modes, space.cutoff + padding)
        d = self.d = self.work.cutoff + 1
        one = FockSpace(1, self.work.cutoff)
        self.a1 = build_annihilator(1, one, qp)
        self.ad1 = build_creator(1, one, qp)
        self.Q1 = build_scale(1, one, qp)
        n = space.n_modes
        self.cols = np.flatnonzero(self.work.occupations.max(axis=1) <= space.cutoff - margin)
        self.block = np.zeros((self.work.dim, self.cols.size), dtype=complex)
        self.block[self.cols, np.arange(self.cols.size)] = 1.0
        self._tails = {}
        for i in range(1, n + 1):
            tail = np.indices((d,) * (n - i)).sum(axis=0).ravel() if i < n else np.zeros(1, int)
            self._tails[i] = [(S, np.flatnonzero(tail == S)) for S in np.unique(tail)]
        self._cache = {}

    def restrict(self, out: np.ndarray) -> np.ndarray:
        return out[self.cols]

    def _apply(self, mode: int, key, build, B: np.ndarray) -> np.ndarray:
        n, d = self.space.n_modes, self.d
        C = B.shape[1]
        T = B.reshape(d ** (mode - 1), d, d ** (n - mode), C)
        out = np.empty_like(T)
        for S, idx in self._tails[mode]:
            ck = (mode, key, int(S))
            if ck not in self._cache:
                self._cache[ck] = build(self.qp.q ** (S / 2.0))
            M = self._cache[ck]
            sub = np.moveaxis(T[:, :, idx, :], 1, 0)
            out[:, :, idx, :] = np.moveaxis((M @ sub.reshape(d, -1)).reshape(sub.shape), 0, 1)
        return out.reshape(B.shape)

    def _exp(self, c, X) -> np.ndarray:
        return qexp_operator(c, X, self.qp).toarray()

    def exp_a(self, i, s, B):
        return self._apply(i, ("a", s), lambda w: self._exp(s * w, self.a1), B)

    def exp_ad(self, i, t, B):
        return self._apply(i, ("ad", t), lambda w: self._exp(t * w, self.ad1), B)

    def exp_scale(self, i, c, B):
        # Q_i...Q_n = q**S * Q_mode
        return self._apply(i, ("Q", c), lambda w: self._exp(c * w * w, self.Q1), B)

    def exp_shifted(self, i, s, t, B):
        # s a_i + s t Q_i...Q_n = s (w a + t w^2 Q_mode)
        return self._apply(
            i, ("shift", s, t), lambda w: self._exp(s, w * self.a1 + t * w * w * self.Q1), B
        )

    def lhs_factor(self, i, s, t, B):
        """``exp_q(s a_i) exp_q(t a+_i) B``."""
        return self.exp_a(i, s, self.exp_ad(i, t, B))

    def eq21_factor(self, i, s, t, B):
        """``exp_q(t a+_i) exp_q(s a_i + s t Q_i..Q_n) B``."""
        return self.exp_ad(i, t, self.exp_shifted(i, s, t, B))

    def eq22_factor(self, i, s, t, B):
        """``exp_q(t a+_i) exp_q(s t Q_i..Q_n) exp_q(s a_i) B``."""
        return self.exp_ad(i, t, self.exp_scale(i, s * t, self.exp_a(i, s, B)))

    def product(self, factor, params: WeylParams, ordering: str) -> np.ndarray:
        modes = list(range(1, self.space.n_modes + 1))
        if ordering == "descending":
            modes.reverse()
        B = self.block
        # the leftmost factor acts last
        for i in reversed(modes):
            B = factor(i, params.s[i - 1], params.t[i - 1], B)
        return self.restrict(B)


def _residual(lhs: np.ndarray, rhs: np.ndarray) -> float:
    if lhs.size == 0:
        return 0.0
    return float(np.max(np.linalg.norm(lhs - rhs, axis=0)))


def _settled_workspace(space, qp, margin, params, step=4, max_padding=None, settle=1e-13):
    """Grow the padding until ``exp_q(s.a) exp_q(t.a^dag)`` stops changing on the sector."""
    max_padding = 4 * space.cutoff + 8 if max_padding is None else max_padding
    padding = max(step, space.cutoff // 2)
    prev = None
    while True:
        ws = _Workspace(space, qp, margin, padding)
        cur = ws.product(ws.lhs_factor, params, "ascending")
        if prev is not None and _residual(cur, prev) < settle * max(1.0, np.max(np.abs(cur))):
            return ws
        if padding >= max_padding:
            return ws
        prev = cur
        padding = min(padding + step, max_padding)


def check_weyl_relation(
    params: WeylParams,
    space: FockSpace,
    margin: int | None = None,
    orderings=ORDERINGS,
    padding: int | None = None,
    tol: float = WEYL_TOL,
):
    """Per-mode exponential reorderings and the full product relation for each ordering.

    ``padding=None`` picks the workspace padding automatically; ``padding=0``
    evaluates on the truncated space itself so the cutoff tail is visible.
    Returns a list of reports.
    """
    qp = params.qp
    if len(params.s) != space.n_modes:
        raise ValueError(f"{len(params.s)} amplitudes for a {space.n_modes}-mode space")
    margin = space.cutoff // 2 if margin is None else margin
    _require_margin(margin, 1, "the Weyl relation")
    if padding is None:
        ws = _settled_workspace(space, qp, margin, params)
        padding = ws.work.cutoff - space.cutoff
    else:
        ws = _Workspace(space, qp, margin, padding)
    sector = SafeSector(space, margin).describe()
    note = f"workspace cutoff {space.cutoff + padding}" if padding else "no workspace padding"
    n = space.n_modes
    reports = []
    for i in range(1, n + 1):
        s, t = params.s[i - 1], params.t[i - 1]
        lhs = ws.restrict(ws.lhs_factor(i, s, t, ws.block))
        for eq, factor, rhs_text in (
            ("Eq(21)", ws.eq21_factor, f"e(t a+{i}) e(s a{i} + st Q{i}..Q{n})"),
            ("Eq(22)", ws.eq22_factor, f"e(t a+{i}) e(st Q{i}..Q{n}) e(s a{i})"),
        ):
            rhs = ws.restrict(factor(i, s, t, ws.block))
            reports.append(CheckReport(
                relation=f"e(s a{i}) e(t a+{i}) = {rhs_text}",
                equation=eq, sector=sector, max_residual=_residual(lhs, rhs),
                tolerance=tol, note=note,
            ))
    for ordering in orderings:
        if ordering not in ORDERINGS:
            raise ValueError(f"ordering must be one of {ORDERINGS}")
        lhs = ws.product(ws.lhs_factor, params, ordering)
        rhs = ws.product(ws.eq22_factor, params, ordering)
        reports.append(CheckReport(
            relation=f"prod_i e(s_i a_i) e(t_i a+_i) = prod_i e(t_i a+_i) e(s_i t_i Q_i..Q_n) e(s_i a_i), {ordering} i",
            equation="Eq(23)", sector=sector, max_residual=_residual(lhs, rhs),
            tolerance=tol, note=note,
        ))
    return reports


def weyl_suite(
    params: WeylParams,
    space: FockSpace,
    margin: int | None = None,
    tol: float | None = None,
    degrees=(0, 1, 3),
    powers=(0, 1, 2),
):
    """Everything in the module for one parameter set."""
    qp = params.qp
    margin = space.cutoff // 2 if margin is None else margin
    t_ = lambda d: d if tol is None else min(d, tol)  # noqa: E731
    reports = []
    for i in range(1, space.n_modes + 1):
        t = params.t[i - 1]
        for d in degrees:
            if d + 1 <= margin:
                f = Polynomial(tuple(1.0 + 0.5 * k for k in range(d + 1)))
                reports.append(check_shift_identity(i, f, space, qp, d + 1, t_(SHIFT_TOL)))
        reports.append(check_exponential_shift(i, t, space, qp, margin, t_(EXP_SHIFT_TOL)))
        for m in powers:
            if m <= margin:
                reports.append(check_power_identity(i, t, m, space, qp, margin, t_(POWER_TOL)))
        reports.append(check_q_commutation(i, space, qp))
    reports.extend(check_weyl_relation(params, space, margin, tol=t_(WEYL_TOL)))
    return reports
