"""Verification reports shared by the algebra and structure checkers."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Report:
    """Outcome of an exhaustive check; failures carry the first witnesses."""

    subject: str
    failures: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.passed

    def __str__(self) -> str:
        if self.passed:
            return f"{self.subject}: pass"
        lines = "\n  ".join(self.failures)
        return f"{self.subject}: FAIL\n  {lines}"

    def require(self) -> "Report":
        if not self.passed:
            raise AssertionError(str(self))
        return self
