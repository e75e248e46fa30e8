"""Residual reports shared by every verification routine."""

from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class CheckReport:
    """Outcome of comparing two sides of an identity.

    ``expected`` is False for the as-printed variants that are known to be
    wrong; such a check passes when the identity is shown NOT to hold.
    """

    relation: str
    equation: str
    sector: str
    max_residual: float
    tolerance: float
    expected: bool = True
    note: str = ""

    @property
    def holds(self) -> bool:
        return bool(self.max_residual < self.tolerance)

    @property
    def passed(self) -> bool:
        return self.holds == self.expected

    def to_dict(self) -> dict:
        d = asdict(self)
        d["holds"] = self.holds
        d["passed"] = self.passed
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CheckReport":
        return cls(
            relation=d["relation"],
            equation=d["equation"],
            sector=d["sector"],
            max_residual=d["max_residual"],
            tolerance=d["tolerance"],
            expected=d.get("expected", True),
            note=d.get("note", ""),
        )

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        verdict = "" if self.expected else " (as printed; expected to fail)"
        return (
            f"{status}  {self.equation:<8} {self.relation}{verdict}  "
            f"[{self.sector}] residual={self.max_residual:.3e} tol={self.tolerance:.0e}"
        )
