"""Position, momentum and the q-deformed oscillator Hamiltonian in n dimensions.

Units are dimensionless (hbar = omega = m = 1).  With ``S_i = n_{i+1} + ... + n_n``
the mode Hamiltonian ``H_i = (a_i a_i^dag + a_i^dag a_i) / 2`` is diagonal in
the Fock basis with eigenvalue ``q^S_i ([n_i + 1] + [n_i]) / 2``.  Summing over
modes telescopes to ``E(nu) = [N] + (1/2) sum_i q^(n_i + ... + n_n)``.

The ladder form of ``H_i`` uses ``a a^dag``, which is wrong at the cutoff,
so energies are only claimed for labels with ``n_i <= M - 1``.
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
    _diagonal,
    build_annihilator,
    build_creator,
    build_scale_product,
    check_relation,
    identity,
)
from .qcore import _as_qparam, q_number

FORM_TOL = 1e-13
COMMUTATOR_TOL = 1e-11
SCALE_FORM_TOL = 1e-12
SPECTRUM_TOL = 1e-11
DEGENERACY_TOL = 1e-9
NEAR_DEGENERACY_TOL = 1e-3
CLASSICAL_SPECTRUM_TOL = 1e-4
CLASSICAL_COMMUTATOR_TOL = 1e-6
HERMITIAN_TOL = 1e-15

SPECTRUM_VARIANTS = ("corrected", "printed")


def build_position(mode: int, space: FockSpace, qp) -> sp.csr_matrix:
    """``X_i = (a_i + a_i^dag) / sqrt(2)``."""
    a = build_annihilator(mode, space, qp)
    return _canonical((a + a.conj().T) / np.sqrt(2.0))


def build_momentum(mode: int, space: FockSpace, qp) -> sp.csr_matrix:
    """``P_i = -i (a_i - a_i^dag) / sqrt(2)``."""
    a = build_annihilator(mode, space, qp)
    return _canonical(-1j * (a - a.conj().T) / np.sqrt(2.0))


def build_mode_hamiltonian(mode: int, space: FockSpace, qp, form: str = "ladder") -> sp.csr_matrix:
    if form == "ladder":
        a = build_annihilator(mode, space, qp)
        ad = build_creator(mode, space, qp)
        return _canonical((a @ ad + ad @ a) / 2)
    if form == "quadrature":
        X = build_position(mode, space, qp)
        P = build_momentum(mode, space, qp)
        return _canonical((P @ P + X @ X) / 2)
    raise ValueError(f"unknown Hamiltonian form {form!r}; use 'ladder' or 'quadrature'")


def build_hamiltonian(space: FockSpace, qp, form: str = "ladder") -> sp.csr_matrix:
    """Sum of the mode Hamiltonians in either the ladder or the quadrature form."""
    H = sp.csr_matrix((space.dim, space.dim), dtype=complex)
    for i in range(1, space.n_modes + 1):
        H = H + build_mode_hamiltonian(i, space, qp, form)
    return _canonical(H)


def hamiltonian_scale_form(space: FockSpace, qp) -> sp.csr_matrix:
    """``(Q - 1)/(q - 1) + (1/2) sum_i Q_i ... Q_n`` with ``Q = Q_1 ... Q_n``."""
    qp = _as_qparam(qp)
    total = space.occupations.sum(axis=1)
    values = q_number(total, qp).astype(float)
    for i in range(1, space.n_modes + 1):
        values = values + 0.5 * qp.q ** (space.occupations[:, i - 1] + space.tail_quanta(i))
    return _diagonal(values)


def _alpha(qp) -> float:
    return 2.0 / (qp.q + 1.0)


def commutator_rhs(mode: int, space: FockSpace, qp, hamiltonians=None) -> sp.csr_matrix:
    """Unrolled right-hand side: ``i a^(n-i+1) + i (q-1) sum_k a^(k-i+1) H_k``, ``a = 2/(q+1)``."""
    qp = _as_qparam(qp)
    n = space.n_modes
    alpha = _alpha(qp)
    if hamiltonians is None:
        hamiltonians = {k: build_mode_hamiltonian(k, space, qp) for k in range(mode, n + 1)}
    rhs = alpha ** (n - mode + 1) * identity(space)
    for k in range(mode, n + 1):
        rhs = rhs + (qp.q - 1.0) * alpha ** (k - mode + 1) * hamiltonians[k]
    return _canonical(1j * rhs)


def check_canonical_commutator(
    mode: int,
    space: FockSpace,
    qp,
    margin: int = 2,
    tol: float = COMMUTATOR_TOL,
) -> list[CheckReport]:
    """Compare ``[X_i, P_i]`` with the q-canonical right-hand side and with ``i Q_i...Q_n``."""
    qp = _as_qparam(qp)
    space.check_mode(mode)
    if margin < 2:
        raise ValueError(f"the canonical commutator needs a sector margin of at least 2, got {margin}")
    X = build_position(mode, space, qp)
    P = build_momentum(mode, space, qp)
    lhs = X @ P - P @ X
    sector = SafeSector(space, margin)
    n = space.n_modes
    return [
        check_relation(
            lhs, commutator_rhs(mode, space, qp), sector, tol=tol,
            relation=f"[X{mode}, P{mode}] = i((q+1)/2)^({mode}-n-1) + i(q-1) sum_k ((q+1)/2)^({mode}-k-1) H_k",
            equation="Eq(27)",
        ),
        check_relation(
            lhs, 1j * build_scale_product(mode, space, qp), sector, tol=min(tol, SCALE_FORM_TOL),
            relation=f"[X{mode}, P{mode}] = i Q{mode}...Q{n}", equation="Eq(7)",
        ),
    ]


@dataclass(frozen=True)
class SpectrumEntry:
    label: tuple[int, ...]
    energy_closed_form: float
    energy_numeric: float
    degeneracy_group: int
    energy_printed: float = float("nan")
    near_degeneracy_group: int = 0


def closed_form_energy(nu, qp, variant: str = "corrected") -> float:
    """Energy of the Fock label ``nu``.

    ``corrected`` uses the tail sum ``n_i + ... + n_n`` as the exponent of the
    i-th term; ``printed`` uses the total ``N`` for every term.
    """
    qp = _as_qparam(qp)
    nu = np.asarray(nu, dtype=int)
    total = int(nu.sum())
    base = float(q_number(total, qp))
    if variant == "corrected":
        tails = np.cumsum(nu[::-1])[::-1]
        return base + 0.5 * float(np.sum(qp.q**tails))
    if variant == "printed":
        return base + 0.5 * nu.size * qp.q**total
    raise ValueError(f"unknown spectrum variant {variant!r}; use one of {SPECTRUM_VARIANTS}")


def _groups(energies: np.ndarray, tol: float) -> np.ndarray:
    """Single-linkage ids on sorted energies: neighbours closer than ``tol`` share an id."""
    ids = np.zeros(energies.size, dtype=int)
    if energies.size:
        ids[1:] = np.cumsum(np.diff(energies) >= tol)
    return ids


def spectrum(
    space: FockSpace,
    qp,
    margin: int = 1,
    degeneracy_tol: float = DEGENERACY_TOL,
    near_tol: float = NEAR_DEGENERACY_TOL,
) -> list[SpectrumEntry]:
    """In-sector energies sorted ascending, ties broken by label."""
    qp = _as_qparam(qp)
    H = build_hamiltonian(space, qp)
    diag = H.diagonal().real
    idx = SafeSector(space, margin).indices
    labels = [tuple(int(v) for v in space.occupations[k]) for k in idx]
    numeric = diag[idx]
    order = sorted(range(len(idx)), key=lambda j: (numeric[j], labels[j]))
    numeric = numeric[order]
    labels = [labels[j] for j in order]
    groups = _groups(numeric, degeneracy_tol)
    near = _groups(numeric, near_tol)
    return [
        SpectrumEntry(
            label=lab,
            energy_closed_form=closed_form_energy(lab, qp),
            energy_numeric=float(e),
            degeneracy_group=int(g),
            energy_printed=closed_form_energy(lab, qp, "printed"),
            near_degeneracy_group=int(ng),
        )
        for lab, e, g, ng in zip(labels, numeric, groups, near)
    ]


def monotonicity_violations(entries) -> list[tuple[tuple[int, ...], int]]:
    """Pairs ``(label, mode)`` where adding one quantum to ``mode`` does not raise the energy."""
    energy = {e.label: e.energy_numeric for e in entries}
    bad = []
    for lab, e in energy.items():
        for i in range(len(lab)):
            up = lab[:i] + (lab[i] + 1,) + lab[i + 1:]
            if up in energy and not energy[up] > e:
                bad.append((lab, i + 1))
    return bad


def check_spectrum(space: FockSpace, qp, variant: str = "corrected", tol: float = SPECTRUM_TOL, margin: int = 1):
    entries = spectrum(space, qp, margin)
    if variant == "corrected":
        dev = [abs(e.energy_closed_form - e.energy_numeric) for e in entries]
        relation = "E(nu) = [N] + 1/2 sum_i q^(n_i+...+n_n)"
    else:
        dev = [abs(e.energy_printed - e.energy_numeric) for e in entries]
        relation = "E(nu) = [N] + (n/2) q^N"
    worst = int(np.argmax(dev)) if dev else 0
    note = ""
    if dev:
        w = entries[worst]
        note = f"worst label {w.label}: numeric {w.energy_numeric:.12g}"
    return CheckReport(
        relation=relation,
        equation="Eq(31)",
        sector=SafeSector(space, margin).describe(),
        max_residual=float(max(dev, default=0.0)),
        tolerance=tol,
        # the two closed forms coincide for a single mode
        expected=variant == "corrected" or space.n_modes == 1,
        note=note,
    )


def dense_spectrum_check(space: FockSpace, qp, tol: float = SPECTRUM_TOL) -> CheckReport:
    """Eigenvalues of the quadrature-form Hamiltonian against the closed form (one mode only)."""
    if space.n_modes != 1 or space.cutoff > 10:
        raise ValueError("the dense cross-check is limited to one mode and cutoff <= 10")
    H = build_hamiltonian(space, qp, "quadrature").toarray()
    idx = SafeSector(space, 1).indices
    numeric = np.linalg.eigvalsh(H[np.ix_(idx, idx)])
    closed = np.sort([closed_form_energy((m,), qp) for m in range(space.cutoff)])
    return CheckReport(
        relation="eigvalsh((P^2+X^2)/2) = [m] + q^m/2",
        equation="Eq(31)",
        sector=SafeSector(space, 1).describe(),
        max_residual=float(np.max(np.abs(numeric - closed))),
        tolerance=tol,
    )


def _off_diagonal(H, sector: SafeSector) -> float:
    idx = sector.indices
    block = H[idx][:, idx].tocoo()
    off = block.row != block.col
    return float(np.max(np.abs(block.data[off]), initial=0.0))


def qqm_suite(space: FockSpace, qp, margin: int | None = None, tol: float | None = None) -> list[CheckReport]:
    """Every identity of the q-deformed oscillator on one truncated space.

    ``margin`` replaces the default margins (2 for the quadrature relations,
    1 for the diagonal ones); ``tol`` can only tighten tolerances.
    """
    qp = _as_qparam(qp)
    n = space.n_modes
    t = (lambda d: d if tol is None else min(d, tol))
    m2 = 2 if margin is None else margin
    m1 = 1 if margin is None else margin
    s2, s1, full = SafeSector(space, m2), SafeSector(space, m1), SafeSector(space, 0)
    reports = []

    for i in range(1, n + 1):
        for name, op in (("X", build_position(i, space, qp)), ("P", build_momentum(i, space, qp))):
            reports.append(check_relation(
                op, op.conj().T, full, tol=t(HERMITIAN_TOL),
                relation=f"{name}{i} = {name}{i}^dag", equation="Eq(24)",
            ))

    ladder = {i: build_mode_hamiltonian(i, space, qp) for i in range(1, n + 1)}
    H = build_hamiltonian(space, qp)
    Hq = build_hamiltonian(space, qp, "quadrature")
    reports.append(check_relation(
        Hq, H, s2, tol=t(FORM_TOL), relation="(P^2+X^2)/2 = (a a^dag + a^dag a)/2 summed over modes",
        equation="Eq(26)",
    ))
    reports.append(CheckReport(
        relation="H has no off-diagonal elements", equation="Eq(26)", sector=s2.describe(),
        max_residual=_off_diagonal(Hq, s2), tolerance=t(FORM_TOL),
    ))

    alpha = _alpha(qp)
    for i in range(1, n + 1):
        if m2 >= 2:
            reports.extend(check_canonical_commutator(i, space, qp, m2, t(COMMUTATOR_TOL)))
        rhs = alpha ** (n - i + 1) * identity(space)
        for k in range(i, n + 1):
            rhs = rhs + (qp.q - 1.0) * alpha ** (k - i + 1) * ladder[k]
        reports.append(check_relation(
            build_scale_product(i, space, qp), rhs, s1, tol=t(SCALE_FORM_TOL),
            relation=f"Q{i}...Q{n} = ((q+1)/2)^({i}-n-1) + (q-1) sum_k ((q+1)/2)^({i}-k-1) H_k",
            equation="Eq(28)",
        ))

    reports.append(check_relation(
        hamiltonian_scale_form(space, qp), H, s1, tol=t(SCALE_FORM_TOL),
        relation="H = (Q-1)/(q-1) + 1/2 sum_i Q_i...Q_n", equation="Eq(29)",
    ))
    reports.append(check_spectrum(space, qp, "corrected", t(SPECTRUM_TOL), m1))
    reports.append(check_spectrum(space, qp, "printed", t(SPECTRUM_TOL), m1))
    if n == 1 and space.cutoff <= 10:
        reports.append(dense_spectrum_check(space, qp, t(SPECTRUM_TOL)))
    return reports


def classical_limit_suite(
    space: FockSpace,
    q: float = 1 - 1e-6,
    commutator_q: float | None = None,
    max_quanta: int = 4,
    spectrum_tol: float = CLASSICAL_SPECTRUM_TOL,
    commutator_tol: float = CLASSICAL_COMMUTATOR_TOL,
) -> list[CheckReport]:
    """Distance from the undeformed oscillator for labels with at most ``max_quanta`` quanta.

    The spectrum is compared with ``sum nu_i + n/2`` and ``[X_i, P_i]`` with
    ``i``.  Both distances are first order in ``1 - q``; the commutator one
    is ``1 - q^S`` for ``S`` tail quanta, so it can be probed at its own
    ``commutator_q``.
    """
    qp = _as_qparam(q)
    n = space.n_modes
    entries = [e for e in spectrum(space, qp) if sum(e.label) <= max_quanta]
    dev = max((abs(e.energy_numeric - (sum(e.label) + n / 2)) for e in entries), default=0.0)
    sector = f"margin 1, total quanta <= {max_quanta}"
    reports = [CheckReport(
        relation="E(nu) -> sum nu_i + n/2", equation="Eq(31) q->1", sector=sector,
        max_residual=float(dev), tolerance=spectrum_tol, note=f"q = {q!r}",
    )]
    keep = SafeSector(space, 2).mask & (space.occupations.sum(axis=1) <= max_quanta)
    idx = np.flatnonzero(keep)
    cq = q if commutator_q is None else commutator_q
    qp = _as_qparam(cq)
    for i in range(1, n + 1):
        X = build_position(i, space, qp)
        P = build_momentum(i, space, qp)
        diff = (X @ P - P @ X - 1j * identity(space))[idx][:, idx].toarray()
        worst = float(np.max(np.linalg.norm(diff, axis=0), initial=0.0))
        reports.append(CheckReport(
            relation=f"[X{i}, P{i}] -> i", equation="Eq(27) q->1",
            sector=f"margin 2, total quanta <= {max_quanta}",
            max_residual=worst, tolerance=commutator_tol, note=f"q = {cq!r}",
        ))
    return reports


__all__ = [
    "SpectrumEntry",
    "build_hamiltonian",
    "build_mode_hamiltonian",
    "build_momentum",
    "build_position",
    "check_canonical_commutator",
    "check_spectrum",
    "classical_limit_suite",
    "closed_form_energy",
    "commutator_rhs",
    "dense_spectrum_check",
    "hamiltonian_scale_form",
    "monotonicity_violations",
    "qqm_suite",
    "spectrum",
]
