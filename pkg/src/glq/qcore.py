"""Scalar q-arithmetic and q-special functions.

All functions take a :class:`QParam` describing the deformation parameter
``0 < q < 1`` (a bare float is accepted too).  Results are double precision;
truncation tolerances are explicit keyword arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

SERIES_TOL = 1e-12
SERIES_MAX_TERMS = 10_000
SERIES_MIN_TERMS = 5
PRODUCT_MAX_FACTORS = 1_000_000
JACKSON_MAX_TERMS = 1_000_000


class QDomainError(ValueError):
    """Argument outside the region where a q-function is defined."""


class SeriesConvergenceError(QDomainError):
    """A series or product did not reach its tolerance within the term cap."""


class QPoleError(QDomainError):
    """Argument sits on a pole of the q-exponential product."""


@dataclass(frozen=True)
class QParam:
    """Deformation parameter with its derived convergence radius.

    ``radius = 1/(1-q)`` is both the limit of ``[x]`` as ``x -> inf`` and the
    first pole of the q-exponential.
    """

    q: float
    radius: float = field(init=False)

    def __post_init__(self):
        q = float(self.q)
        if not (0.0 < q < 1.0) or not math.isfinite(q):
            raise QDomainError(f"q must lie strictly inside (0, 1), got {self.q!r}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "radius", 1.0 / (1.0 - q))


def _as_qparam(qp) -> QParam:
    return qp if isinstance(qp, QParam) else QParam(qp)


def q_number(x, qp):
    """Return ``[x] = (q**x - 1)/(q - 1)``.

    Evaluated through ``expm1``/``log1p`` so that ``q`` close to 1 does not
    lose digits.  Accepts scalars or arrays.
    """
    qp = _as_qparam(qp)
    qm1 = qp.q - 1.0
    return np.expm1(np.multiply(x, math.log1p(qm1))) / qm1


def q_factorial(m: int, qp) -> float:
    """``[m]! = [1][2]...[m]`` with ``[0]! = 1``."""
    if int(m) != m or m < 0:
        raise ValueError(f"q_factorial needs a nonnegative integer, got {m!r}")
    qp = _as_qparam(qp)
    out = 1.0
    for k in range(1, int(m) + 1):
        out *= float(q_number(k, qp))
    return out


def q_factorials(m_max: int, qp) -> np.ndarray:
    """Array ``[0]!, [1]!, ..., [m_max]!``."""
    qp = _as_qparam(qp)
    nums = q_number(np.arange(1, m_max + 1), qp)
    return np.concatenate(([1.0], np.cumprod(nums)))


# Compensated (double-double) arithmetic for the series route.  Summing
# exp_q(x) for complex or negative x cancels by up to exp_q(|x|)/|exp_q(x)|,
# which reaches 1e9 inside the disc at q=0.9.

_SPLITTER = 134217729.0  # 2**27 + 1


def _two_sum(a: float, b: float):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _quick_two_sum(a: float, b: float):
    s = a + b
    return s, b - (s - a)


def _split(a: float):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a: float, b: float):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _dd_add(a, b):
    s, e = _two_sum(a[0], b[0])
    return _quick_two_sum(s, e + a[1] + b[1])


def _dd_mul_d(a, b: float):
    p, e = _two_prod(a[0], b)
    return _quick_two_sum(p, e + a[1] * b)


def _dd_div(a, b):
    q1 = a[0] / b[0]
    r = _dd_add(a, _dd_mul_d(b, -q1))
    q2 = r[0] / b[0]
    r = _dd_add(r, _dd_mul_d(b, -q2))
    return _dd_add(_quick_two_sum(q1, q2), (r[0] / b[0], 0.0))


def q_exp_series(x, qp, tol: float = SERIES_TOL, max_terms: int = SERIES_MAX_TERMS) -> complex:
    """Sum ``exp_q(x) = sum_n x**n / [n]!`` for ``|x| < 1/(1-q)``.

    Terms are accumulated until the geometric bound on the remaining tail
    drops below ``tol`` (after at least five terms).  Hitting ``max_terms``
    raises :class:`SeriesConvergenceError`, which is what happens for
    arguments pressed against the radius.

    The recursion for terms, the q-numbers and the running sum are carried
    in double-double precision and rounded once at the end.
    """
    qp = _as_qparam(qp)
    x = complex(x)
    ax = abs(x)
    if ax >= qp.radius:
        raise QDomainError(
            f"|x| = {ax:g} is outside the q-exponential series domain |x| < {qp.radius:g}"
        )
    xr, xi = x.real, x.imag
    q = qp.q
    qpow = (1.0, 0.0)  # q**n
    qnum = (0.0, 0.0)  # [n]
    tre, tim = (1.0, 0.0), (0.0, 0.0)
    sre, sim = (0.0, 0.0), (0.0, 0.0)
    for n in range(max_terms):
        sre, sim = _dd_add(sre, tre), _dd_add(sim, tim)
        qnum = _dd_add(qnum, qpow)
        qpow = _dd_mul_d(qpow, q)
        re = _dd_add(_dd_mul_d(tre, xr), _dd_mul_d(tim, -xi))
        im = _dd_add(_dd_mul_d(tre, xi), _dd_mul_d(tim, xr))
        tre, tim = _dd_div(re, qnum), _dd_div(im, qnum)
        # ratios |x|/[k] only decrease with k, so the next one bounds the tail
        ratio = ax / (qnum[0] + qpow[0])
        if n + 1 >= SERIES_MIN_TERMS and ratio < 1.0:
            if math.hypot(tre[0], tim[0]) / (1.0 - ratio) < tol:
                sre, sim = _dd_add(sre, tre), _dd_add(sim, tim)
                return complex(sre[0] + sre[1], sim[0] + sim[1])
    raise SeriesConvergenceError(
        f"exp_q series at |x| = {ax:g} did not converge in {max_terms} terms "
        f"(radius {qp.radius:g})"
    )


PRODUCT_TRUNCATION = 2.0**-53


def _product_factor_count(amax: float, qp: QParam) -> int:
    """Factors needed before the dropped tail ``sum_(k>=N) (1-q) q**k |x|`` is below rounding."""
    scale = amax
    if scale < PRODUCT_TRUNCATION:
        return 1
    return int(math.ceil(math.log(PRODUCT_TRUNCATION / scale) / math.log(qp.q))) + 1


def q_exp_inverse(x, qp, max_factors: int = PRODUCT_MAX_FACTORS):
    """``1/exp_q(x) = prod_n (1 - (1-q) q**n x)``, vectorised over ``x``.

    This is finite everywhere (it vanishes on the poles of ``exp_q``), so it is
    the form used for Jackson weights on the grid touching the radius.
    """
    qp = _as_qparam(qp)
    xa = np.asarray(x)
    amax = float(np.max(np.abs(xa))) if xa.size else 0.0
    nfac = _product_factor_count(amax, qp)
    if nfac > max_factors:
        raise SeriesConvergenceError(f"q-exponential product needs {nfac} factors")
    step = (1.0 - qp.q) * xa
    out = np.ones_like(step, dtype=np.result_type(step, float))
    for _ in range(nfac):
        out = out * (1.0 - step)
        step = step * qp.q
    return out if out.ndim else out[()]


def q_exp_product(x, qp, tol: float = SERIES_TOL, max_factors: int = PRODUCT_MAX_FACTORS) -> complex:
    """``exp_q(x)`` from its infinite product; valid off the pole grid ``x = q**-n/(1-q)``."""
    qp = _as_qparam(qp)
    x = complex(x)
    nfac = _product_factor_count(abs(x), qp)
    if nfac > max_factors:
        raise SeriesConvergenceError(f"q-exponential product needs {nfac} factors")
    out = 1 + 0j
    step = (1.0 - qp.q) * x
    for n in range(nfac):
        denom = 1.0 - step
        if abs(denom) < tol:
            raise QPoleError(
                f"x = {x} hits the pole of exp_q at factor n={n} "
                f"(poles at q**-n * {qp.radius:g})"
            )
        out /= denom
        step *= qp.q
    return out


@dataclass(frozen=True)
class Polynomial:
    """Polynomial with complex coefficients, ``coefficients[k]`` multiplying ``x**k``.

    Trailing zeros are trimmed on construction; the zero polynomial has
    ``coefficients == ()`` and degree ``-1``.
    """

    coefficients: tuple = ()

    def __post_init__(self):
        coeffs = [complex(c) for c in self.coefficients]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @classmethod
    def monomial(cls, n: int, c: complex = 1.0) -> "Polynomial":
        return cls((0,) * n + (c,))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x):
        out = np.zeros_like(np.asarray(x, dtype=complex))
        for c in reversed(self.coefficients):
            out = out * x + c
        return out if np.ndim(out) else complex(out)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        a, b = self.coefficients, other.coefficients
        n = max(len(a), len(b))
        a = a + (0,) * (n - len(a))
        b = b + (0,) * (n - len(b))
        return Polynomial(tuple(x + y for x, y in zip(a, b)))

    def scale(self, c: complex) -> "Polynomial":
        return Polynomial(tuple(c * a for a in self.coefficients))

    def dilate(self, factor: complex) -> "Polynomial":
        """Return ``x -> p(factor * x)``."""
        return Polynomial(tuple(a * factor**k for k, a in enumerate(self.coefficients)))


def q_derivative(f: Polynomial, qp) -> Polynomial:
    """q-derivative on coefficients: ``x**n -> [n] x**(n-1)``."""
    qp = _as_qparam(qp)
    coeffs = f.coefficients
    return Polynomial(tuple(float(q_number(k, qp)) * coeffs[k] for k in range(1, len(coeffs))))


def q_exp_polynomial(t: complex, degree: int, qp) -> Polynomial:
    """Truncation of ``exp_q(t x)`` to degree ``degree``."""
    facts = q_factorials(degree, qp)
    return Polynomial(tuple(t**k / facts[k] for k in range(degree + 1)))


def jackson_integral(
    f: Callable[[np.ndarray], np.ndarray],
    qp,
    tol: float = SERIES_TOL,
    upper: float | None = None,
    envelope: Callable[[np.ndarray], np.ndarray] | None = None,
    block: int = 4096,
    max_terms: int = JACKSON_MAX_TERMS,
):
    """Jackson q-integral of ``f`` over ``[0, upper]`` (default ``upper = 1/(1-q)``).

    Computes ``upper*(1-q) * sum_k q**k f(upper*q**k)``.  ``f`` is called on
    blocks of grid points and must be vectorised; it may return extra
    trailing axes (matrix-valued integrands are summed elementwise).

    The sum stops at the first ``k`` (at least five terms in) where
    ``upper*q**k * g(x_k) / (1-q) < tol``.  ``g`` is ``envelope`` when given,
    which must bound ``|f|`` on ``[0, x_k]`` and be nondecreasing; otherwise
    ``|f(x_k)|`` itself.  Pass an envelope whenever ``f`` can be tiny near the
    upper limit and grow further in, or the sum will stop early.
    """
    qp = _as_qparam(qp)
    q = qp.q
    a = qp.radius if upper is None else float(upper)
    pref = a * (1.0 - q)
    total = None
    k0 = 0
    while k0 < max_terms:
        k = np.arange(k0, min(k0 + block, max_terms))
        qk = q**k
        x = a * qk
        vals = np.asarray(f(x))
        terms = pref * qk.reshape((-1,) + (1,) * (vals.ndim - 1)) * vals
        if not np.all(np.isfinite(terms)):
            raise FloatingPointError("integrand is not finite on the Jackson grid")
        if envelope is None:
            bound = np.abs(terms).reshape(len(k), -1).max(axis=1)
        else:
            bound = pref * qk * np.asarray(envelope(x), dtype=float)
        small = np.nonzero((bound / (1.0 - q) < tol) & (k + 1 >= SERIES_MIN_TERMS))[0]
        if small.size:
            part = terms[: small[0] + 1].sum(axis=0)
            return part if total is None else total + part
        part = terms.sum(axis=0)
        total = part if total is None else total + part
        k0 += block
    raise SeriesConvergenceError(f"Jackson sum did not converge in {max_terms} terms")


def inverse_q_exp_weight(x, qp):
    """``1/exp_q(q x)``, the Jackson weight of the q-factorial integral.

    When ``x`` is a geometric run ``x[j+1] = q*x[j]`` (a block of the Jackson
    grid) the product factors are shared between neighbours: only the last
    point is evaluated in full, and ``w[j] = (1 - (1-q) q x[j]) * w[j+1]``.
    """
    qp = _as_qparam(qp)
    q = qp.q
    x = np.asarray(x, dtype=float)
    if x.ndim == 1 and x.size > 1 and np.allclose(x[1:], q * x[:-1], rtol=1e-13, atol=0.0):
        last = q_exp_inverse(q * x[-1], qp)
        factors = 1.0 - (1.0 - q) * q * x[:-1]
        tail = np.cumprod(factors[::-1])[::-1]
        return np.append(tail * last, last)
    return q_exp_inverse(q * x, qp)


def jackson_factorial(n: int, qp, tol: float = SERIES_TOL) -> float:
    """Jackson integral of ``x**n / exp_q(q x)`` over ``[0, 1/(1-q)]``; equals ``[n]!``."""
    qp = _as_qparam(qp)
    # 0 < 1/exp_q(qx) <= 1 on the grid, so x**n bounds the integrand
    return float(
        jackson_integral(
            lambda x: x**n * inverse_q_exp_weight(x, qp),
            qp,
            tol=tol,
            envelope=lambda x: x**n,
        )
    )
