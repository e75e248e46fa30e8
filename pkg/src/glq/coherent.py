"""Coherent states of the covariant oscillators and their resolution of identity.

The state with amplitudes ``z = (z_1, ..., z_n)`` has Fock coefficients
``c(z) z_1^{n_1}...z_n^{n_n} / sqrt([n_1]!...[n_n]!)``.  Its norm squared is
``|c|^2 prod_i exp_q(|z_i|^2)``, so the normalizing constant is
``prod_i exp_q(|z_i|^2)^(-1/2)``; the un-square-rooted, positive-exponent
constant is kept as the ``"printed"`` variant so the discrepancy can be shown.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .checks import CheckReport
from .fock import FockSpace, SafeSector, build_annihilator
from .qcore import (
    QDomainError,
    QParam,
    _as_qparam,
    inverse_q_exp_weight,
    jackson_integral,
    q_exp_series,
    q_factorials,
    q_number,
)

NORM_TOL = 1e-10
EIGEN_TOL = 1e-10
COMPLETENESS_TOL = 1e-8
TAIL_TOL = 1e-12

NORMALIZATIONS = ("corrected", "printed")
MEASURES = ("corrected", "printed")


class InsufficientCutoffError(ValueError):
    """The truncated space drops too much of the coherent state's norm."""


@dataclass(frozen=True)
class CoherentParams:
    z: tuple
    qp: QParam

    def __post_init__(self):
        z = tuple(complex(v) for v in np.atleast_1d(self.z))
        qp = _as_qparam(self.qp)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "qp", qp)
        for i, v in enumerate(z, start=1):
            if abs(v) ** 2 >= qp.radius:
                raise QDomainError(
                    f"|z_{i}|^2 = {abs(v)**2:g} must be below 1/(1-q) = {qp.radius:g}"
                )

    @property
    def n_modes(self) -> int:
        return len(self.z)

    def rescaled(self, mode: int) -> "CoherentParams":
        """Amplitudes ``(z_1..z_i, sqrt(q) z_{i+1}..sqrt(q) z_n)``."""
        s = np.sqrt(self.qp.q)
        return CoherentParams(
            tuple(v if k <= mode else s * v for k, v in enumerate(self.z, start=1)), self.qp
        )


def mode_coefficients(z: complex, cutoff: int, qp) -> np.ndarray:
    """Unnormalized single-mode coefficients ``z**m / sqrt([m]!)``, ``m = 0..cutoff``."""
    facts = q_factorials(cutoff, qp)
    return complex(z) ** np.arange(cutoff + 1) / np.sqrt(facts)


def normalization(params: CoherentParams, variant: str = "corrected") -> float:
    if variant not in NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
    e = np.prod([q_exp_series(abs(v) ** 2, params.qp).real for v in params.z])
    return float(e**-0.5 if variant == "corrected" else e)


def tail_bound(params: CoherentParams, cutoff: int) -> float:
    """Norm-squared fraction of the normalized state lost above ``cutoff``.

    Summed over modes, which bounds ``1 - prod_i (1 - tail_i)``.
    """
    qp = params.qp
    total = 0.0
    for v in params.z:
        r = abs(v) ** 2
        if r == 0.0:
            continue
        # term r**m/[m]! built up to m = cutoff + 1, then summed until negligible
        term = 1.0
        for m in range(1, cutoff + 2):
            term *= r / float(q_number(m, qp))
        tail = 0.0
        m = cutoff + 1
        while True:
            tail += term
            m += 1
            ratio = r / float(q_number(m, qp))
            term *= ratio
            if ratio < 1.0 and term / (1.0 - ratio) < 1e-6 * tail:
                tail += term / (1.0 - ratio)
                break
        total += tail / q_exp_series(r, qp).real
    return total


def required_cutoff(params: CoherentParams, tail_tol: float = TAIL_TOL, start: int = 1) -> int:
    cutoff = max(start, 1)
    while tail_bound(params, cutoff) >= tail_tol:
        cutoff += 1
    return cutoff


def coherent_coefficients(params: CoherentParams, space: FockSpace) -> np.ndarray:
    """Fock coefficients of the unnormalized series (``c = 1``)."""
    if params.n_modes != space.n_modes:
        raise ValueError(f"{params.n_modes} amplitudes for a {space.n_modes}-mode space")
    vecs = [mode_coefficients(v, space.cutoff, params.qp) for v in params.z]
    return reduce(np.kron, vecs)


def coherent_state(
    params: CoherentParams,
    space: FockSpace,
    normalization_variant: str = "corrected",
    tail_tol: float = TAIL_TOL,
) -> np.ndarray:
    """Coherent state vector on the truncated space.

    Raises :class:`InsufficientCutoffError` when the norm lost above the
    cutoff (see :func:`tail_bound`) is not below ``tail_tol``.
    """
    tail = tail_bound(params, space.cutoff)
    if tail >= tail_tol:
        raise InsufficientCutoffError(
            f"cutoff {space.cutoff} drops norm^2 {tail:.3e} >= {tail_tol:.1e}; "
            f"need cutoff >= {required_cutoff(params, tail_tol, space.cutoff)}"
        )
    return normalization(params, normalization_variant) * coherent_coefficients(params, space)


def check_normalization(
    params: CoherentParams,
    space: FockSpace,
    variant: str = "corrected",
    tol: float = NORM_TOL,
    tail_tol: float = TAIL_TOL,
) -> CheckReport:
    v = coherent_state(params, space, variant, tail_tol)
    printed = variant == "printed"
    return CheckReport(
        relation="<z|z> = 1 with c = prod exp_q(|z_i|^2)" + ("" if printed else "^(-1/2)"),
        equation="Eq(14)",
        sector=f"cutoff {space.cutoff}",
        max_residual=abs(float(np.vdot(v, v).real) - 1.0),
        tolerance=tol,
        expected=not printed,
        note="normalization exponent as printed" if printed else "",
    )


def check_eigen_relation(
    mode: int,
    params: CoherentParams,
    space: FockSpace,
    tol: float = EIGEN_TOL,
    tail_tol: float = TAIL_TOL,
) -> CheckReport:
    """``a_i |z> = z_i |z_1..z_i, sqrt(q) z_{i+1}..>`` on coefficients with total quanta <= M-1.

    Both sides carry the normalizing constant of ``|z>``: the relation is a
    statement about the series, and the rescaled state has a different norm.
    """
    space.check_mode(mode)
    c = normalization(params)
    lhs = build_annihilator(mode, space, params.qp) @ coherent_state(params, space, tail_tol=tail_tol)
    rhs = params.z[mode - 1] * c * coherent_coefficients(params.rescaled(mode), space)
    keep = space.occupations.sum(axis=1) <= space.cutoff - 1
    return CheckReport(
        relation=f"a{mode}|z> = z{mode}|z with sqrt(q)-rescaled tail>",
        equation="Eq(9)",
        sector=f"total quanta <= {space.cutoff - 1}",
        max_residual=float(np.linalg.norm((lhs - rhs)[keep])),
        tolerance=tol,
    )


def overlap(z: CoherentParams, w: CoherentParams, space: FockSpace, tail_tol: float = TAIL_TOL) -> complex:
    return complex(np.vdot(coherent_state(z, space, tail_tol=tail_tol), coherent_state(w, space, tail_tol=tail_tol)))


def overlap_closed_form(z: CoherentParams, w: CoherentParams) -> complex:
    """``c(z) c(w) prod_i exp_q(conj(z_i) w_i)``."""
    prod = np.prod([q_exp_series(np.conj(a) * b, z.qp) for a, b in zip(z.z, w.z)])
    return complex(normalization(z) * normalization(w) * prod)


@dataclass(frozen=True)
class CompletenessConfig:
    """Settings for the resolution-of-identity check.

    ``margin=None`` means half the cutoff.  ``measure="printed"`` uses the
    ``1/pi^2`` prefactor for every ``n`` instead of one ``1/pi`` per mode.
    """

    radial_tol: float = 1e-13
    margin: int | None = None
    measure: str = "corrected"
    tol: float = COMPLETENESS_TOL

    def __post_init__(self):
        if not self.radial_tol > 0:
            raise ValueError("radial_tol must be positive")
        if self.measure not in MEASURES:
            raise ValueError(f"measure must be one of {MEASURES}")


def mode_resolution(cutoff: int, qp, radial_tol: float = 1e-13) -> np.ndarray:
    """Single-mode ``(1/pi) int |z><z| exp_q(|z|^2)/exp_q(q|z|^2) d^2z`` with normalized ``|z>``.

    With ``z = sqrt(r) e^{i theta}`` and ``d^2z = dr dtheta / 2``: the phase
    integral is done exactly on ``2*cutoff + 1`` equispaced angles, the radial
    one by the Jackson sum over ``[0, 1/(1-q)]``.  The normalization
    ``exp_q(r)^-1`` cancels the measure's ``exp_q(r)``, which is what keeps the
    integrand finite at ``r = 1/(1-q)`` where ``exp_q(r)`` has its pole.
    """
    qp = _as_qparam(qp)
    m = np.arange(cutoff + 1)
    facts = q_factorials(cutoff, qp)
    n_phase = 2 * cutoff + 1
    theta = 2 * np.pi * np.arange(n_phase) / n_phase
    phases = np.exp(1j * np.outer(m, theta))
    angular = 2 * np.pi * (phases @ phases.conj().T) / n_phase  # int dtheta e^{i(m-m')theta}
    half_power = (m[:, None] + m[None, :]) / 2.0
    angular = angular / np.sqrt(np.outer(facts, facts))

    def integrand(r):
        w = inverse_q_exp_weight(r, qp)
        return (r[:, None, None] ** half_power) * w[:, None, None] * angular

    radial = jackson_integral(
        integrand, qp, tol=radial_tol, envelope=lambda r: 2 * np.pi * np.maximum(1.0, r**cutoff)
    )
    return radial / (2.0 * np.pi)


def resolved_identity(space: FockSpace, qp, cfg: CompletenessConfig = CompletenessConfig()) -> np.ndarray:
    """Dense matrix of the coherent-state integral on the truncated space.

    Both the projector and the weight factorize over modes, so the result
    is the Kronecker product of single-mode resolutions.
    """
    one = mode_resolution(space.cutoff, qp, cfg.radial_tol)
    out = reduce(np.kron, [one] * space.n_modes)
    if cfg.measure == "printed":
        out = out * np.pi ** (space.n_modes - 2)
    return out


def completeness_check(space: FockSpace, qp, cfg: CompletenessConfig = CompletenessConfig()) -> CheckReport:
    margin = space.cutoff // 2 if cfg.margin is None else cfg.margin
    sector = SafeSector(space, margin)
    resolved = resolved_identity(space, qp, cfg)
    diff = resolved - np.eye(space.dim)
    idx = sector.indices
    block = diff[np.ix_(idx, idx)]
    off = block - np.diag(np.diag(block))
    printed = cfg.measure == "printed"
    return CheckReport(
        relation="int |z><z| mu d^2z = I with measure "
        + ("1/pi^2 for every n" if printed else f"1/pi^{space.n_modes}"),
        equation="Eq(16)" if printed else "Eq(15)",
        sector=sector.describe(),
        max_residual=float(np.max(np.abs(block))) if idx.size else 0.0,
        tolerance=cfg.tol,
        expected=not printed or space.n_modes == 2,
        note=f"max off-diagonal {np.max(np.abs(off)) if idx.size else 0.0:.1e}"
        + ("; measure prefactor as printed" if printed else ""),
    )


def coherent_suite(
    params: CoherentParams,
    space: FockSpace,
    tol: float | None = None,
    tail_tol: float = TAIL_TOL,
):
    """Normalization (both constants) and the eigen-relation for every mode."""
    t = (lambda d: d if tol is None else min(d, tol))
    reports = [
        check_normalization(params, space, "corrected", t(NORM_TOL), tail_tol),
        check_normalization(params, space, "printed", t(NORM_TOL), tail_tol),
    ]
    for i in range(1, space.n_modes + 1):
        reports.append(check_eigen_relation(i, params, space, t(EIGEN_TOL), tail_tol))
    return reports


def completeness_suite(space: FockSpace, qp, tol: float | None = None, margin: int | None = None):
    """Resolution of identity with the per-mode measure, plus the printed ``1/pi^2`` variant."""
    t = COMPLETENESS_TOL if tol is None else min(COMPLETENESS_TOL, tol)
    return [
        completeness_check(space, qp, CompletenessConfig(margin=margin, tol=t)),
        completeness_check(space, qp, CompletenessConfig(margin=margin, tol=t, measure="printed")),
    ]
