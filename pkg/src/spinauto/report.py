"""Plain-text reports with a delimited machine-readable block."""
from __future__ import annotations

from dataclasses import dataclass, field

MACHINE_BEGIN = "--- machine ---"
MACHINE_END = "--- end machine ---"


@dataclass
class Check:
    name: str
    value: float
    tol: float
    passed: bool
    relation: str = "<="
    gating: bool = True


@dataclass
class Report:
    command: str
    scenario: dict = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    values: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def check(self, name: str, value: float, tol: float, *, relation: str = "<=", gating: bool = True) -> bool:
        value = float(value)
        if relation == "<=":
            ok = value <= tol
        elif relation == "<":
            ok = value < tol
        elif relation == ">=":
            ok = value >= tol
        elif relation == ">":
            ok = value > tol
        else:
            raise ValueError(relation)
        self.checks.append(Check(name, value, float(tol), bool(ok), relation, gating))
        return ok

    def measure(self, name: str, value: float, tol: float, *, relation: str = "<") -> bool:
        """A thresholded measurement that informs a verdict but does not fail the report."""
        return self.check(name, value, tol, relation=relation, gating=False)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.gating)

    def render(self) -> str:
        lines = [f"spinauto {self.command}"]
        for key, value in self.scenario.items():
            lines.append(f"  {key}: {value}")
        if self.checks:
            width = max(len(c.name) for c in self.checks)
            lines.append("checks:")
            for c in self.checks:
                if c.gating:
                    status = "PASS" if c.passed else "FAIL"
                else:
                    status = "true" if c.passed else "false"
                lines.append(f"  [{status}] {c.name:<{width}}  {c.value:.6e} {c.relation} {c.tol:.3e}")
        if self.values:
            lines.append("values:")
            for key, value in self.values.items():
                lines.append(f"  {key} = {_fmt(value)}")
        for note in self.notes:
            lines.append(f"note: {note}")
        lines.append(f"result: {'PASS' if self.passed else 'FAIL'}")
        lines.append(MACHINE_BEGIN)
        lines.extend(self.machine_lines())
        lines.append(MACHINE_END)
        return "\n".join(lines) + "\n"

    def machine_lines(self) -> list[str]:
        out = [f"command = {self.command}"]
        out += [f"scenario.{k} = {v}" for k, v in self.scenario.items()]
        for c in self.checks:
            out.append(f"check.{c.name}.value = {c.value!r}")
            out.append(f"check.{c.name}.tol = {c.tol!r}")
            out.append(f"check.{c.name}.relation = {c.relation}")
            out.append(f"check.{c.name}.{'pass' if c.gating else 'holds'} = {str(c.passed).lower()}")
        out += [f"value.{k} = {_fmt(v, machine=True)}" for k, v in self.values.items()]
        out.append(f"result = {'pass' if self.passed else 'fail'}")
        return out


def _fmt(value, machine: bool = False) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value) if machine else f"{value:.6e}"
    return str(value)


def parse_machine_block(text: str) -> dict[str, str]:
    """Key/value pairs from the machine block of a rendered report."""
    inside = False
    values: dict[str, str] = {}
    for line in text.splitlines():
        if line == MACHINE_BEGIN:
            inside = True
        elif line == MACHINE_END:
            inside = False
        elif inside:
            key, _, value = line.partition(" = ")
            values[key] = value
    return values


def machine_block(text: str) -> str:
    start = text.index(MACHINE_BEGIN)
    end = text.index(MACHINE_END) + len(MACHINE_END)
    return text[start:end]
