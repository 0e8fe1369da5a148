"""Qubit efficiency η = α/(β+γ) in exact rational arithmetic."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


def qubit_efficiency(alpha, beta, gamma):
    if beta + gamma == 0:
        raise ZeroDivisionError("beta + gamma must be positive")
    if beta + gamma < 0 or alpha < 0:
        raise ValueError("counts must be non-negative")
    return Fraction(alpha, beta + gamma)


@dataclass(frozen=True)
class EfficiencyRecord:
    """Resource counts as multiples of the input length ``unit``."""

    protocol_id: str
    label: str
    alpha: int
    beta: int
    gamma: int
    unit: str = "n"

    @property
    def eta(self):
        return qubit_efficiency(self.alpha, self.beta, self.gamma)

    def to_dict(self):
        u = self.unit

        def lin(k):
            return u if k == 1 else f"{k}{u}"

        return {
            "protocol": self.protocol_id,
            "label": self.label,
            "alpha": lin(self.alpha),
            "beta": lin(self.beta),
            "gamma": lin(self.gamma),
            "eta": f"{self.eta.numerator}/{self.eta.denominator}",
        }


_CATALOG = (
    ("this", "this work", 1, 64, 2, "L"),
    ("ref22", "Ref.[22]", 1, 80, 2, "n"),
    ("ref23", "Ref.[23]", 1, 58, 2, "n"),
    ("ref26", "Ref.[26]", 1, 8, 2, "n"),
    ("ref27b", "Ref.[27] (second protocol)", 1, 30, 2, "n"),
    ("ref28", "Ref.[28]", 1, 46, 2, "n"),
    ("ref29", "Ref.[29]", 1, 34, 2, "n"),
    ("ref31", "Ref.[31]", 1, 54, 4, "n"),
    ("ref32", "Ref.[32]", 1, 40, 2, "n"),
    ("ref33", "Ref.[33]", 1, 68, 2, "n"),
)


def efficiency_catalog():
    return [EfficiencyRecord(*row) for row in _CATALOG]


@dataclass(frozen=True)
class ResourceAudit:
    beta_observed: int
    gamma_observed: int
    match: bool


def resource_audit(outcome, L):
    """Compare the counters of a run with β = 64L, γ = 2L."""
    c = outcome.counters
    beta = c.qubits_prepared
    gamma = c.classical_bits
    return ResourceAudit(beta, gamma, outcome.completed and (beta, gamma) == (64 * L, 2 * L))
