"""gl_q(n)-covariant oscillators on a truncated multimode Fock space.

Submodules: :mod:`glq.qcore` (q-numbers, q-exponential, Jackson integral),
:mod:`glq.fock` (operators and the algebra suite), :mod:`glq.coherent`,
:mod:`glq.weyl`, :mod:`glq.qqm` (Hamiltonian and spectrum) and :mod:`glq.cli`.
"""

from .checks import CheckReport
from .coherent import CoherentParams, coherent_state, coherent_suite, completeness_suite
from .fock import (
    FockSpace,
    SafeSector,
    algebra_suite,
    build_annihilator,
    build_creator,
    build_number,
    build_scale,
    build_scale_product,
)
from .qcore import (
    Polynomial,
    QDomainError,
    QParam,
    QPoleError,
    SeriesConvergenceError,
    jackson_integral,
    q_derivative,
    q_exp_product,
    q_exp_series,
    q_factorial,
    q_number,
)
from .qqm import (
    SpectrumEntry,
    build_hamiltonian,
    build_momentum,
    build_position,
    check_canonical_commutator,
    hamiltonian_scale_form,
    qqm_suite,
    spectrum,
)
from .weyl import WeylParams, check_weyl_relation, weyl_suite

__version__ = "0.1.0"

__all__ = [
    "CheckReport",
    "CoherentParams",
    "FockSpace",
    "Polynomial",
    "QDomainError",
    "QParam",
    "QPoleError",
    "SafeSector",
    "SeriesConvergenceError",
    "SpectrumEntry",
    "WeylParams",
    "algebra_suite",
    "build_annihilator",
    "build_creator",
    "build_hamiltonian",
    "build_momentum",
    "build_number",
    "build_position",
    "build_scale",
    "build_scale_product",
    "check_canonical_commutator",
    "check_weyl_relation",
    "coherent_state",
    "coherent_suite",
    "completeness_suite",
    "hamiltonian_scale_form",
    "jackson_integral",
    "q_derivative",
    "q_exp_product",
    "q_exp_series",
    "q_factorial",
    "q_number",
    "qqm_suite",
    "spectrum",
    "weyl_suite",
]
