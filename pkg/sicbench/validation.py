"""
sicbench validation records

Structured pass/fail records shared by the SIC, MUB, matching and bench
validators. A report is a list of named checks, each with the measured
residual, the threshold it was held to and a pass flag.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional


@dataclass
class CheckResult:
    """One named check"""
    name: str
    measured: float
    threshold: float
    passed: bool
    detail: str = ""

    def to_dict(self) -> Dict[str, Any]:
        record = {
            'name': self.name,
            'measured': float(self.measured),
            'threshold': float(self.threshold),
            'passed': bool(self.passed),
        }
        if self.detail:
            record['detail'] = self.detail
        return record


@dataclass
class ValidationReport:
    """Ordered collection of checks about one subject"""
    subject: str
    checks: List[CheckResult] = field(default_factory=list)
    data: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def add(self, name: str, measured: float, threshold: float,
            passed: Optional[bool] = None, detail: str = "") -> CheckResult:
        """
        Append a check

        Args:
            name: Check name
            measured: Measured residual or value
            threshold: Tolerance the measurement is held to
            passed: Explicit verdict; defaults to measured <= threshold
            detail: Optional human-readable note

        Returns:
            The appended CheckResult
        """
        if passed is None:
            passed = bool(measured <= threshold)
        check = CheckResult(name, float(measured), float(threshold), bool(passed), detail)
        self.checks.append(check)
        return check

    def failed_checks(self) -> List[CheckResult]:
        return [check for check in self.checks if not check.passed]

    def check(self, name: str) -> CheckResult:
        for item in self.checks:
            if item.name == name:
                return item
        raise KeyError(name)

    def to_dict(self) -> Dict[str, Any]:
        record = {
            'subject': self.subject,
            'passed': self.passed,
            'checks': [check.to_dict() for check in self.checks],
        }
        if self.data:
            record['data'] = self.data
        return record
