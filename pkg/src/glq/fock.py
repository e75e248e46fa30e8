"""Truncated multimode Fock space for the gl_q(n)-covariant oscillators.

The basis is the box ``0 <= n_i <= M`` for every mode, enumerated in
row-major order with mode 1 varying slowest, so that a product state is the
Kronecker product of its single-mode vectors.  Modes are labelled 1..n as in
the algebra; matrices are canonical ``scipy.sparse.csr_matrix`` objects.

Relations that move quanta up are only exact away from the cutoff.  Every
check therefore declares a :class:`SafeSector` and measures residuals on
sector rows and columns only.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .checks import CheckReport
from .qcore import QParam, _as_qparam, q_factorials, q_number

ALGEBRA_TOL = 1e-12
NUMBER_RELATION_TOL = 1e-14
BOSON_LIMIT_TOL = 1e-6


@dataclass(frozen=True)
class FockSpace:
    """``n_modes`` oscillators, each truncated at occupation ``cutoff`` (inclusive)."""

    n_modes: int
    cutoff: int

    def __post_init__(self):
        if int(self.n_modes) != self.n_modes or self.n_modes < 1:
            raise ValueError(f"n_modes must be a positive integer, got {self.n_modes!r}")
        if int(self.cutoff) != self.cutoff or self.cutoff < 1:
            raise ValueError(f"cutoff must be a positive integer, got {self.cutoff!r}")

    @property
    def shape(self) -> tuple:
        return (self.cutoff + 1,) * self.n_modes

    @property
    def dim(self) -> int:
        return (self.cutoff + 1) ** self.n_modes

    @cached_property
    def occupations(self) -> np.ndarray:
        """``(dim, n_modes)`` array; row ``k`` is the multi-index of basis vector ``k``."""
        occ = np.array(np.unravel_index(np.arange(self.dim), self.shape)).T
        occ.setflags(write=False)
        return occ

    def encode(self, nu) -> int:
        nu = tuple(int(v) for v in nu)
        if len(nu) != self.n_modes:
            raise ValueError(f"expected {self.n_modes} occupations, got {len(nu)}")
        if any(v < 0 or v > self.cutoff for v in nu):
            raise ValueError(f"occupations {nu} outside the cutoff {self.cutoff}")
        return int(np.ravel_multi_index(nu, self.shape))

    def decode(self, index: int) -> tuple:
        return tuple(int(v) for v in np.unravel_index(index, self.shape))

    def basis_vector(self, nu) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.encode(nu)] = 1.0
        return v

    def stride(self, mode: int) -> int:
        return (self.cutoff + 1) ** (self.n_modes - mode)

    def tail_quanta(self, mode: int) -> np.ndarray:
        """``sum_{k > mode} n_k`` for every basis vector."""
        return self.occupations[:, mode:].sum(axis=1)

    def check_mode(self, mode: int, allow_next: bool = False) -> None:
        top = self.n_modes + 1 if allow_next else self.n_modes
        if int(mode) != mode or not 1 <= mode <= top:
            raise ValueError(f"mode must be in 1..{top}, got {mode!r}")


@dataclass(frozen=True)
class SafeSector:
    """Basis vectors with every occupation at least ``margin`` below the cutoff."""

    space: FockSpace
    margin: int

    def __post_init__(self):
        if self.margin < 0:
            raise ValueError("margin must be nonnegative")

    @cached_property
    def mask(self) -> np.ndarray:
        return self.space.occupations.max(axis=1) + self.margin <= self.space.cutoff

    @cached_property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    def __contains__(self, nu) -> bool:
        return all(v + self.margin <= self.space.cutoff for v in nu)

    def describe(self) -> str:
        if self.margin == 0:
            return "full basis"
        return f"margin {self.margin} (n_i <= {self.space.cutoff - self.margin})"


def _canonical(m) -> sp.csr_matrix:
    m = sp.csr_matrix(m, dtype=complex)
    m.eliminate_zeros()
    m.sort_indices()
    return m


def _diagonal(values) -> sp.csr_matrix:
    return _canonical(sp.diags(np.asarray(values, dtype=complex), format="csr"))


def build_annihilator(mode: int, space: FockSpace, qp) -> sp.csr_matrix:
    """``a_i |..n_i..> = sqrt(q**(sum_{k>i} n_k) [n_i]) |..n_i - 1..>``."""
    space.check_mode(mode)
    qp = _as_qparam(qp)
    occ = space.occupations
    cols = np.flatnonzero(occ[:, mode - 1] >= 1)
    rows = cols - space.stride(mode)
    amp = np.sqrt(qp.q ** space.tail_quanta(mode)[cols] * q_number(occ[cols, mode - 1], qp))
    return _canonical(sp.csr_matrix((amp, (rows, cols)), shape=(space.dim, space.dim)))


def build_creator(mode: int, space: FockSpace, qp) -> sp.csr_matrix:
    """Adjoint of :func:`build_annihilator`; transitions past the cutoff are dropped."""
    return _canonical(build_annihilator(mode, space, qp).conj().T)


def build_number(mode: int, space: FockSpace) -> sp.csr_matrix:
    space.check_mode(mode)
    return _diagonal(space.occupations[:, mode - 1])


def build_scale(mode: int, space: FockSpace, qp) -> sp.csr_matrix:
    """``Q_i = q**N_i``."""
    space.check_mode(mode)
    return _diagonal(_as_qparam(qp).q ** space.occupations[:, mode - 1])


def build_scale_product(mode: int, space: FockSpace, qp) -> sp.csr_matrix:
    """``Q_i Q_{i+1} ... Q_n``; ``mode = n + 1`` gives the identity."""
    space.check_mode(mode, allow_next=True)
    return _diagonal(_as_qparam(qp).q ** space.tail_quanta(mode - 1))


def identity(space: FockSpace) -> sp.csr_matrix:
    return _diagonal(np.ones(space.dim))


def build_fock_state(nu, space: FockSpace, qp) -> np.ndarray:
    """Build ``|nu>`` by applying creators to the vacuum.

    ``(a_1^dag)^{n_1}`` acts first and ``(a_n^dag)^{n_n}`` last, then the result
    is divided by ``sqrt([n_1]!...[n_n]!)``.  The outcome should be the unit
    basis vector for ``nu``; the caller compares.
    """
    space.encode(nu)
    qp = _as_qparam(qp)
    facts = q_factorials(space.cutoff, qp)
    v = space.basis_vector((0,) * space.n_modes)
    norm = 1.0
    for mode, count in enumerate(nu, start=1):
        ad = build_creator(mode, space, qp)
        for _ in range(count):
            v = ad @ v
        norm *= facts[count]
    return v / np.sqrt(norm)


def sector_residual(diff, sector: SafeSector) -> float:
    """Largest column 2-norm of ``diff`` restricted to sector rows and columns."""
    idx = sector.indices
    if idx.size == 0:
        return 0.0
    block = diff[idx][:, idx]
    if sp.issparse(block):
        block = block.toarray()
    return float(np.max(np.linalg.norm(np.asarray(block), axis=0)))


def check_relation(
    lhs,
    rhs,
    sector: SafeSector,
    tol: float = ALGEBRA_TOL,
    relation: str = "",
    equation: str = "",
    expected: bool = True,
    note: str = "",
) -> CheckReport:
    """Compare two operators on ``sector`` and report the worst column residual."""
    if lhs.shape != rhs.shape or lhs.shape != (sector.space.dim, sector.space.dim):
        raise ValueError(
            f"dimension mismatch: {lhs.shape} vs {rhs.shape} on a space of dim {sector.space.dim}"
        )
    return CheckReport(
        relation=relation,
        equation=equation,
        sector=sector.describe(),
        max_residual=sector_residual(lhs - rhs, sector),
        tolerance=tol,
        expected=expected,
        note=note,
    )


def _edge_note(sector: SafeSector, needed: int) -> str:
    if sector.margin >= needed:
        return ""
    return (
        f"sector margin {sector.margin} < {needed} creator(s); "
        "any residual here comes from the cutoff, not the algebra"
    )


def algebra_suite(space: FockSpace, qp, margin: int | None = None, tol: float | None = None):
    """Check every defining relation of the algebra, the number-operator
    relation and the commutator formula on the truncated space.

    Each relation uses a sector whose margin equals the number of creators it
    contains, unless ``margin`` overrides them all.  The number-operator
    relation involves no net creation and is always checked on the full
    basis.
    """
    qp = _as_qparam(qp)
    q = qp.q
    n = space.n_modes
    a = {i: build_annihilator(i, space, qp) for i in range(1, n + 1)}
    ad = {i: build_creator(i, space, qp) for i in range(1, n + 1)}
    N = {i: build_number(i, space) for i in range(1, n + 1)}
    one = identity(space)
    sq = np.sqrt(q)
    reports = []

    def check(lhs, rhs, needed, relation, equation="Eq(1)", t=ALGEBRA_TOL):
        sector = SafeSector(space, needed if margin is None else margin)
        reports.append(
            check_relation(
                lhs, rhs, sector, tol=t if tol is None else min(t, tol),
                relation=relation, equation=equation, note=_edge_note(sector, needed),
            )
        )

    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            check(ad[i] @ ad[j], sq * (ad[j] @ ad[i]), 2, f"a+{i} a+{j} = sqrt(q) a+{j} a+{i}")
            check(a[i] @ a[j], (a[j] @ a[i]) / sq, 0, f"a{i} a{j} = q^(-1/2) a{j} a{i}")
        for j in range(1, n + 1):
            if j != i:
                check(a[i] @ ad[j], sq * (ad[j] @ a[i]), 1, f"a{i} a+{j} = sqrt(q) a+{j} a{i}")
        rhs = one + q * (ad[i] @ a[i])
        for k in range(i + 1, n + 1):
            rhs = rhs + (q - 1) * (ad[k] @ a[k])
        tail = f" + (q-1) sum_(k>{i}) a+k ak" if i < n else ""
        check(a[i] @ ad[i], rhs, 1, f"a{i} a+{i} = 1 + q a+{i} a{i}{tail}")
        for j in range(1, n + 1):
            d = 1.0 if i == j else 0.0
            check(N[i] @ a[j] - a[j] @ N[i], -d * a[j], 0, f"[N{i}, a{j}] = -delta a{j}")
            check(N[i] @ ad[j] - ad[j] @ N[i], d * ad[j], 1, f"[N{i}, a+{j}] = delta a+{j}")

    full = SafeSector(space, 0)
    for i in range(1, n + 1):
        tail = space.tail_quanta(i)
        expected = _diagonal(q**tail * q_number(space.occupations[:, i - 1], qp))
        reports.append(
            check_relation(
                ad[i] @ a[i], expected, full,
                tol=NUMBER_RELATION_TOL if tol is None else min(NUMBER_RELATION_TOL, tol),
                relation=f"a+{i} a{i} = q^(sum_(k>{i}) N_k) [N{i}]", equation="Eq(2)",
            )
        )
    for i in range(1, n + 1):
        check(a[i] @ ad[i] - ad[i] @ a[i], build_scale_product(i, space, qp), 1,
              f"[a{i}, a+{i}] = Q{i}...Q{n}", equation="Eq(7)")
    return reports


def fock_state_suite(space: FockSpace, qp, tol: float = ALGEBRA_TOL):
    """Rebuild every basis vector from the vacuum and report the worst deviation."""
    worst = 0.0
    for k in range(space.dim):
        nu = space.decode(k)
        v = build_fock_state(nu, space, qp)
        v[k] -= 1.0
        worst = max(worst, float(np.linalg.norm(v)))
    return CheckReport(
        relation="(a+n)^nn...(a+1)^n1 |0> / sqrt([n1]!...[nn]!) = |n1..nn>",
        equation="Eq(5)",
        sector="full basis",
        max_residual=worst,
        tolerance=tol,
    )


def boson_limit_suite(space: FockSpace, qp, margin: int = 2, tol: float = BOSON_LIMIT_TOL):
    """Compare the deformed operators with ordinary boson relations.

    Only meaningful for ``q`` close to 1, where every residual should shrink
    like ``(1 - q)`` times the occupation.
    """
    n = space.n_modes
    a = {i: build_annihilator(i, space, qp) for i in range(1, n + 1)}
    ad = {i: build_creator(i, space, qp) for i in range(1, n + 1)}
    one = identity(space)
    sector = SafeSector(space, margin)
    reports = []
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            d = one if i == j else 0 * one
            reports.append(check_relation(
                a[i] @ ad[j] - ad[j] @ a[i], d, sector, tol=tol,
                relation=f"[a{i}, a+{j}] = delta", equation="Eq(1) q->1",
            ))
            if i < j:
                reports.append(check_relation(
                    ad[i] @ ad[j], ad[j] @ ad[i], sector, tol=tol,
                    relation=f"[a+{i}, a+{j}] = 0", equation="Eq(1) q->1",
                ))
                reports.append(check_relation(
                    a[i] @ a[j], a[j] @ a[i], sector, tol=tol,
                    relation=f"[a{i}, a{j}] = 0", equation="Eq(1) q->1",
                ))
    return reports


__all__ = [
    "FockSpace",
    "QParam",
    "SafeSector",
    "algebra_suite",
    "boson_limit_suite",
    "build_annihilator",
    "build_creator",
    "build_fock_state",
    "build_number",
    "build_scale",
    "build_scale_product",
    "check_relation",
    "fock_state_suite",
    "identity",
    "sector_residual",
]
