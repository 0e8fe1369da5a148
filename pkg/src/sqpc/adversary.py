"""Eavesdroppers acting on the channel legs.

An attack is described by a frozen spec (``InterceptResend``,
``MeasureResend``, ``EntangleMeasure`` or ``NoAttack``); ``make_adversary``
turns it into an episode-local eavesdropper with ``reset`` and ``transit``.
The protocol engine calls ``transit(leg, phase, position, tokens, rng)`` on
every hop, which is the only access Eve has.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .protocol.particles import Fake, Slot, prepare_fresh, z_measure
from .protocol.types import Leg, Phase, ProtocolError
from .quantum import PROBE, fidelity, is_unitary


class Placement(enum.Enum):
    TPA_THEN_AB = "tpa_then_ab"
    TPA_THEN_BT = "tpa_then_bt"
    AB_THEN_BT = "ab_then_bt"


PLACEMENT_LEGS = {
    Placement.TPA_THEN_AB: (Leg.TP_TO_ALICE, Leg.ALICE_TO_BOB),
    Placement.TPA_THEN_BT: (Leg.TP_TO_ALICE, Leg.BOB_TO_TP),
    Placement.AB_THEN_BT: (Leg.ALICE_TO_BOB, Leg.BOB_TO_TP),
}

LEG_NUMBER = {Leg.TP_TO_ALICE: 1, Leg.ALICE_TO_BOB: 2, Leg.BOB_TO_TP: 3}


# ---------------------------------------------------------------- specs


@dataclass(frozen=True)
class NoAttack:
    @property
    def label(self):
        return "none"


@dataclass(frozen=True)
class InterceptResend:
    variant: int
    phase: Phase = Phase.S1

    def __post_init__(self):
        if self.variant not in (1, 2, 3):
            raise ValueError(f"intercept-resend variant must be 1, 2 or 3, got {self.variant}")
        object.__setattr__(self, "phase", Phase(self.phase))

    @property
    def label(self):
        return f"ir{self.variant}"


@dataclass(frozen=True)
class MeasureResend:
    leg: Leg
    phase: Phase = Phase.S1

    def __post_init__(self):
        object.__setattr__(self, "leg", Leg(self.leg))
        object.__setattr__(self, "phase", Phase(self.phase))

    @property
    def label(self):
        return f"mr-leg{LEG_NUMBER[self.leg]}"


@dataclass(frozen=True, eq=False)
class EntangleMeasure:
    """Apply ``u_first`` then ``u_second`` on (travelling qubit ⊗ probe).

    Both unitaries act on the local basis ``bit * probe_dim + e`` and share
    one probe register per χ system.  Pairs are attacked qubit by qubit.
    """

    u_first: np.ndarray
    u_second: np.ndarray
    probe_dim: int = 2
    placement: Placement = Placement.TPA_THEN_AB
    phase: Phase = Phase.S1
    name: str = "em"

    def __post_init__(self):
        dim = 2 * self.probe_dim
        for which in ("u_first", "u_second"):
            u = np.asarray(getattr(self, which), dtype=complex)
            if u.shape != (dim, dim):
                raise ValueError(f"{which} has shape {u.shape}, expected {(dim, dim)}")
            if not is_unitary(u):
                raise ValueError(f"{which} is not unitary within 1e-10")
            object.__setattr__(self, which, u)
        object.__setattr__(self, "placement", Placement(self.placement))
        object.__setattr__(self, "phase", Phase(self.phase))

    @property
    def label(self):
        return self.name


# ---------------------------------------------------------------- unitaries


def _probe_rotation(theta, probe_dim):
    r = np.eye(probe_dim, dtype=complex)
    c, s = np.cos(theta), np.sin(theta)
    r[0, 0], r[0, 1], r[1, 0], r[1, 1] = c, -s, s, c
    return r


def build_constrained_ue(theta_00, theta_11, probe_dim=2):
    """``|b⟩|E⟩ -> |b⟩ R(theta_bb)|E⟩``: never flips the travelling qubit."""
    if probe_dim < 2:
        raise ValueError("probe_dim must be at least 2")
    u = np.zeros((2 * probe_dim, 2 * probe_dim), dtype=complex)
    u[:probe_dim, :probe_dim] = _probe_rotation(theta_00, probe_dim)
    u[probe_dim:, probe_dim:] = _probe_rotation(theta_11, probe_dim)
    return u


def build_compensated_pair(theta_0, theta_1, total, probe_dim=2):
    """``(U_E, U_F)`` with U_F undoing U_E up to a common probe rotation ``total``.

    Reflected qubits see ``I ⊗ R(total)`` overall, so no check ever fires,
    yet U_E alone is not trivial.
    """
    return (
        build_constrained_ue(theta_0, theta_1, probe_dim),
        build_constrained_ue(total - theta_0, total - theta_1, probe_dim),
    )


def build_violating_ue(theta, probe_dim=2):
    """Rotation coupling ``|0,0⟩<->|1,1⟩`` and ``|1,0⟩<->|0,1⟩`` (λ01 = sin θ)."""
    if probe_dim < 2:
        raise ValueError("probe_dim must be at least 2")
    d = probe_dim
    c, s = np.cos(theta), np.sin(theta)
    u = np.eye(2 * d, dtype=complex)
    a, b = 0 * d + 0, 1 * d + 1  # |0,e0>, |1,e1>
    u[a, a], u[b, a], u[a, b], u[b, b] = c, s, -s, c
    a, b = 1 * d + 0, 0 * d + 1  # |1,e0>, |0,e1>
    u[a, a], u[b, a], u[a, b], u[b, b] = c, -s, s, c
    return u


def build_cnot_probe(probe_dim=2):
    """Copy the Z value of the travelling qubit into the probe."""
    if probe_dim < 2:
        raise ValueError("probe_dim must be at least 2")
    d = probe_dim
    u = np.eye(2 * d, dtype=complex)
    u[[d, d + 1]] = u[[d + 1, d]]
    return u


def identity_ue(probe_dim=2):
    return np.eye(2 * probe_dim, dtype=complex)


# ---------------------------------------------------------------- eavesdroppers


class InterceptResendEve:
    def __init__(self, spec):
        self.spec = spec
        self.reset()

    def reset(self):
        self.captured = {}
        self.kept = []

    def _swap_in(self, position, tokens):
        genuine = self.captured.pop((position, len(tokens)))
        self.kept.extend(tokens)
        return genuine

    def transit(self, leg, phase, position, tokens, rng):
        if phase is not self.spec.phase:
            return tokens
        v = self.spec.variant
        key = (position, len(tokens))
        if (v in (1, 2) and leg is Leg.TP_TO_ALICE) or (v == 3 and leg is Leg.ALICE_TO_BOB):
            self.captured[key] = tokens
            return [Fake(int(rng.random() < 0.5)) for _ in tokens]
        if (v == 1 and leg is Leg.ALICE_TO_BOB) or (v in (2, 3) and leg is Leg.BOB_TO_TP):
            return self._swap_in(position, tokens)
        return tokens

    def genuine_held(self):
        """Genuine particles still in Eve's hands (must be empty after an episode)."""
        held = [t for toks in self.captured.values() for t in toks]
        return [t for t in held + self.kept if isinstance(t, Slot)]


class MeasureResendEve:
    def __init__(self, spec):
        self.spec = spec
        self.reset()

    def reset(self):
        self.results = []

    def transit(self, leg, phase, position, tokens, rng):
        if phase is not self.spec.phase or leg is not self.spec.leg:
            return tokens
        out = []
        for t in tokens:
            bit = z_measure(t, rng)
            self.results.append(bit)
            out.append(prepare_fresh(t, bit, bit))
        return out

    def genuine_held(self):
        return []


class EntangleMeasureEve:
    def __init__(self, spec):
        self.spec = spec
        self.first, self.second = PLACEMENT_LEGS[spec.placement]
        self.reset()

    def reset(self):
        self.probed = {}

    def transit(self, leg, phase, position, tokens, rng):
        if phase is not self.spec.phase:
            return tokens
        if leg is self.first:
            u = self.spec.u_first
        elif leg is self.second:
            u = self.spec.u_second
        else:
            return tokens
        for t in tokens:
            if not isinstance(t, Slot):
                raise ProtocolError("entangle-measure needs a register-backed particle")
            system = t.system
            if system.state.probe_dim == 1:
                system.state = system.state.with_probe(self.spec.probe_dim)
                self.probed[position] = system
            system.state.apply_matrix((t.qubit, PROBE), u)
        return tokens

    def probe_density(self, position):
        return self.probed[position].state.probe_density()

    def genuine_held(self):
        return []


def make_adversary(attack):
    """Eavesdropper for a spec; ``None``/``NoAttack`` give the honest channel."""
    from .protocol.engine import PASS_THROUGH

    if attack is None or isinstance(attack, NoAttack):
        return PASS_THROUGH
    if isinstance(attack, InterceptResend):
        return InterceptResendEve(attack)
    if isinstance(attack, MeasureResend):
        return MeasureResendEve(attack)
    if isinstance(attack, EntangleMeasure):
        return EntangleMeasureEve(attack)
    if hasattr(attack, "transit") and hasattr(attack, "reset"):
        return attack
    raise TypeError(f"unsupported attack {attack!r}")


# ---------------------------------------------------------------- leakage


@dataclass
class ProbeSample:
    """Eve's probe state at the end of one episode plus the secrets it may reveal."""

    labels: dict
    rho: np.ndarray = field(repr=False)


class InsufficientEpisodes(ValueError):
    pass


def conditional_probe_states(samples, conditioning):
    """Average probe density matrices conditioned on ``labels[conditioning]`` = 0 and 1."""
    acc = {0: None, 1: None}
    counts = {0: 0, 1: 0}
    for s in samples:
        bit = s.labels.get(conditioning)
        if bit is None:
            continue
        acc[bit] = s.rho if acc[bit] is None else acc[bit] + s.rho
        counts[bit] += 1
    if not counts[0] or not counts[1]:
        raise InsufficientEpisodes(
            f"need episodes with {conditioning} = 0 and 1, got {counts[0]} and {counts[1]}"
        )
    return acc[0] / counts[0], acc[1] / counts[1], counts


class ProbeAccumulator:
    """Running sums of probe density matrices keyed by (label, bit)."""

    def __init__(self):
        self.sums = {}
        self.counts = {}

    def add(self, labels, rho):
        for name, bit in labels.items():
            key = (name, int(bit))
            if key in self.sums:
                self.sums[key] = self.sums[key] + rho
            else:
                self.sums[key] = np.array(rho, dtype=complex)
            self.counts[key] = self.counts.get(key, 0) + 1

    def labels(self):
        return sorted({name for name, _ in self.sums})

    def conditional(self, conditioning):
        keys = [(conditioning, 0), (conditioning, 1)]
        missing = [k for k in keys if not self.counts.get(k)]
        if missing:
            raise InsufficientEpisodes(f"no episodes with {missing[0][0]} = {missing[0][1]}")
        rho0, rho1 = (self.sums[k] / self.counts[k] for k in keys)
        return rho0, rho1, {0: self.counts[keys[0]], 1: self.counts[keys[1]]}


def probe_distinguishability(samples, conditioning):
    """Fidelity between Eve's probe states given the secret bit is 0 versus 1.

    ``samples`` is a ``ProbeAccumulator`` or an iterable of ``ProbeSample``.
    1 means the probe carries no information about the bit; 0 means the two
    conditional states are perfectly distinguishable.
    """
    if isinstance(samples, ProbeAccumulator):
        rho0, rho1, _ = samples.conditional(conditioning)
    else:
        rho0, rho1, _ = conditional_probe_states(samples, conditioning)
    return min(1.0, fidelity(rho0, rho1))
