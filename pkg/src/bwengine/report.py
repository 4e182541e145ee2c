from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass
class Report:
    """Outcome of an exhaustive check.  Truthy iff the check passed."""

    name: str
    ok: bool = True
    failures: list[str] = field(default_factory=list)
    details: dict[str, Any] = field(default_factory=dict)

    def fail(self, message: str) -> "Report":
        self.ok = False
        self.failures.append(message)
        return self

    @property
    def first_failure(self) -> str | None:
        return self.failures[0] if self.failures else None

    def __bool__(self) -> bool:
        return self.ok

    def merge(self, other: "Report", prefix: str = "") -> "Report":
        if not other.ok:
            self.ok = False
            self.failures.extend(prefix + f for f in other.failures)
        return self

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"check": self.name, "ok": self.ok}
        if self.failures:
            out["first_failure"] = self.failures[0]
            out["failures"] = self.failures[:20]
        if self.details:
            out["details"] = self.details
        return out
