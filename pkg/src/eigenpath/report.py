"""Bound-verification records and the merged scoreboard."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable

# Scoreboard keys, one per verified inequality or identity.
ANCHORS = (
    "path_length_bound",        # L <= L* <= closed forms
    "local_rate_bound",         # ||ψ'||² <= (<ψ|H''|ψ> - E'')/(2Δ)
    "angle_bound",              # sin²α_j <= δs_j ∫ ||ψ'||²
    "discretization_infidelity",  # Σ sin²α_j <= ε
    "coherence_bound",          # c_j <= geometric series in ε'
    "fidelity_guarantee",       # Pr(q) >= 1 - ε - 2εε'/((1-ε)(1-ε'))
    "rm_total_cost",            # measured cost <= curvature cost bound
    "amplified_rm_cost",        # RM cost on the gap-amplified Hamiltonian
    "fixed_point_cost",         # fixed-point formula below amplified RM formula
    "qsa_cost",                 # q* <= cap and T_QSA <= older cost
    "thermodynamic_identity",   # ||∂_β ψ||² = Var(E)/4 = -∂_β<E>/4
    "amplified_gap",            # Δ' >= sqrt(Δ ||Π||)
)

SLACK_FLOOR = 1e-12


def slack(lhs: float, rhs: float) -> float:
    """Relative slack (rhs - lhs) / max(rhs, 1e-12) of an inequality lhs <= rhs."""
    return (rhs - lhs) / max(abs(rhs), SLACK_FLOOR)


@dataclass
class BoundCheck:
    """Outcome of one inequality evaluated on one or more instances."""

    name: str
    instances: int = 0
    violations: int = 0
    min_slack: float = math.inf
    max_slack: float = -math.inf

    @property
    def holds(self) -> bool:
        return self.violations == 0

    def record(self, lhs: float, rhs: float, ok: bool | None = None) -> "BoundCheck":
        """Add an instance of ``lhs <= rhs``; ``ok`` overrides the plain comparison."""
        sl = slack(lhs, rhs)
        self.instances += 1
        if ok is None:
            ok = lhs <= rhs
        if not ok:
            self.violations += 1
        self.min_slack = min(self.min_slack, sl)
        self.max_slack = max(self.max_slack, sl)
        return self

    def merge(self, other: "BoundCheck") -> "BoundCheck":
        return BoundCheck(self.name, self.instances + other.instances,
                          self.violations + other.violations,
                          min(self.min_slack, other.min_slack),
                          max(self.max_slack, other.max_slack))

    def to_dict(self) -> dict:
        return {"instances": self.instances, "violations": self.violations,
                "min_slack": _finite(self.min_slack), "max_slack": _finite(self.max_slack)}


def _finite(x):
    return x if math.isfinite(x) else None


@dataclass
class Scoreboard:
    entries: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(e.violations == 0 for e in self.entries.values())

    def to_dict(self) -> dict:
        return {"passed": self.passed,
                "entries": {k: self.entries[k].to_dict() for k in sorted(self.entries)}}

    def write(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def aggregate(*reports) -> Scoreboard:
    """Merge scoreboards and ``BoundCheck`` objects (nested iterables allowed)."""
    entries: dict = {}

    def add(check: BoundCheck):
        cur = entries.get(check.name)
        entries[check.name] = check.merge(BoundCheck(check.name)) if cur is None else cur.merge(check)

    def walk(item):
        if isinstance(item, Scoreboard):
            for c in item.entries.values():
                add(c)
        elif isinstance(item, BoundCheck):
            add(item)
        elif isinstance(item, Iterable):
            for sub in item:
                walk(sub)
        else:
            raise TypeError(f"cannot aggregate {type(item).__name__}")

    for r in reports:
        walk(r)
    return Scoreboard(entries)
