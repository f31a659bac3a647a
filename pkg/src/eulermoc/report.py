"""Pass/fail reporting for property-check suites."""

from dataclasses import dataclass, field


@dataclass(frozen=True)
class CheckEntry:
    index: int
    passed: bool
    margin: float
    detail: str = ""


@dataclass
class CheckReport:
    """Result of one property suite over a constructed object.

    Failures are entries, not exceptions: callers decide whether a failed
    check is fatal.  ``notes`` records vacuous or skipped cases.
    """

    name: str
    entries: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def add(self, index, passed, margin, detail=""):
        self.entries.append(CheckEntry(index, passed, margin, detail))

    @property
    def passed(self):
        return all(e.passed for e in self.entries)

    @property
    def failures(self):
        return [e for e in self.entries if not e.passed]

    def min_margin(self):
        if not self.entries:
            return float("nan")
        return min(e.margin for e in self.entries)

    def summary(self):
        status = "pass" if self.passed else "FAIL"
        return (f"{self.name}: {status} ({len(self.entries)} checks, "
                f"{len(self.failures)} failures)")

    def lines(self):
        out = [self.summary()]
        for e in self.entries:
            flag = "ok " if e.passed else "BAD"
            out.append(f"  [{flag}] step {e.index}: margin={e.margin:.6e} {e.detail}")
        for n in self.notes:
            out.append(f"  note: {n}")
        return out
