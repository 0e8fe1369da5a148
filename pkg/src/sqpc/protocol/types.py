"""Modes, cases, records and outcomes of the circular comparison protocol."""
from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Optional


class ProtocolError(Exception):
    pass


class ConfigError(ProtocolError, ValueError):
    pass


class InsufficientSample(ProtocolError):
    """Random mode counts left too few positions to build m_a, m_b or K."""

    def __init__(self, what, have, need):
        super().__init__(f"insufficient sample for {what}: have {have}, need {need}")
        self.what = what
        self.have = have
        self.need = need


class Phase(enum.Enum):
    S1 = "s1"
    S3 = "s3"


class Leg(enum.Enum):
    TP_TO_ALICE = "tp->alice"
    ALICE_TO_BOB = "alice->bob"
    BOB_TO_TP = "bob->tp"


class ModeS1(enum.Enum):
    REFLECT = "reflect"
    MEASURE = "measure"


AliceModeS1 = BobModeS1 = ModeS1


class ModeS3(enum.Enum):
    REFLECT = "reflect"
    MEASURE2 = "measure2"


BobModeS3 = ModeS3


class PrepChoice(enum.Enum):
    AS_FOUND = "as_found"
    FROM_MA = "from_ma"


class AliceModeS3(NamedTuple):
    mode: ModeS3
    prep: Optional[PrepChoice] = None

    def validate(self):
        if (self.mode is ModeS3.MEASURE2) != (self.prep is not None):
            raise ConfigError(f"prep choice must be given iff MEASURE2: {self}")
        return self


class CaseS1(enum.Enum):
    C1 = 1  # reflect, reflect
    C2 = 2  # measure, measure
    C3 = 3  # reflect, measure
    C4 = 4  # measure, reflect


class CaseS3(enum.Enum):
    C1 = 1  # reflect, reflect
    C2 = 2  # reflect, measure2
    C3 = 3  # measure2, reflect
    C4 = 4  # measure2, measure2


class Sampling(enum.Enum):
    QUOTA = "quota"
    BERNOULLI = "bernoulli"


@dataclass(frozen=True)
class ProtocolConfig:
    L: int
    sampling: Sampling = Sampling.QUOTA
    error_threshold: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.L, int) or self.L < 1:
            raise ConfigError(f"L must be a positive integer, got {self.L!r}")
        if self.sampling is Sampling.QUOTA and (self.L < 2 or self.L % 2):
            raise ConfigError(f"QUOTA sampling needs an even L >= 2, got {self.L}")
        if not 0.0 <= self.error_threshold <= 1.0:
            raise ConfigError(f"error_threshold must lie in [0, 1], got {self.error_threshold}")

    def to_dict(self):
        return {
            "L": self.L,
            "sampling": self.sampling.value,
            "error_threshold": self.error_threshold,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class PrivateInputs:
    p_a: tuple
    p_b: tuple
    M_A: tuple
    M_B: tuple

    def __post_init__(self):
        L = len(self.p_a)
        if len(self.p_b) != L:
            raise ConfigError(f"p_a and p_b differ in length ({L} vs {len(self.p_b)})")
        if len(self.M_A) != 2 * L or len(self.M_B) != 4 * L:
            raise ConfigError("M_A and M_B must have lengths 2L and 4L")
        for name in ("p_a", "p_b", "M_A", "M_B"):
            if any(b not in (0, 1) for b in getattr(self, name)):
                raise ConfigError(f"{name} must contain only bits")

    @property
    def L(self):
        return len(self.p_a)


@dataclass
class ParticleRecordS1:
    position: int
    alice_mode: ModeS1
    bob_mode: ModeS1
    case: CaseS1
    alice_result: Optional[int] = None
    bob_result: Optional[int] = None
    tp_z_result: Optional[int] = None
    tp_bell_34: Optional[int] = None
    tp_z_s2: Optional[int] = None
    tp_fmb: Optional[tuple] = None
    used_for: str = "check"
    error: bool = False


@dataclass
class PairRecordS3:
    position: int
    alice_mode: AliceModeS3
    bob_mode: ModeS3
    case: CaseS3
    alice_results: Optional[tuple] = None
    alice_prepared: Optional[tuple] = None
    bob_results: Optional[tuple] = None
    bob_prepared: Optional[tuple] = None
    ma_bits_used: Optional[tuple] = None
    mb_bits_used: Optional[tuple] = None
    tp_bell_12: Optional[int] = None
    tp_z_pair: Optional[tuple] = None
    tp_fmb: Optional[tuple] = None
    error: bool = False


class Sender(enum.Enum):
    TP = "tp"
    ALICE = "alice"
    BOB = "bob"
    EVE = "eve"


class Visibility(enum.Enum):
    PUBLIC = "public"
    TP_ONLY = "tp_only"


@dataclass(frozen=True)
class Message:
    sender: Sender
    visibility: Visibility
    kind: str
    payload: object = None

    def to_dict(self):
        return {
            "sender": self.sender.value,
            "visibility": self.visibility.value,
            "kind": self.kind,
            "payload": self.payload,
        }


class Transcript:
    """Append-only log of classical messages."""

    def __init__(self):
        self._messages = []

    def __len__(self):
        return len(self._messages)

    def __iter__(self):
        return iter(self._messages)

    def send(self, sender, visibility, kind, payload=None):
        msg = Message(sender, visibility, kind, payload)
        self._messages.append(msg)
        return msg.payload

    def tp_view(self):
        return [m for m in self._messages if m.visibility in (Visibility.PUBLIC, Visibility.TP_ONLY)]

    def public_view(self):
        return [m for m in self._messages if m.visibility is Visibility.PUBLIC]

    def last(self, sender, kind):
        for m in reversed(self._messages):
            if m.sender is sender and m.kind == kind:
                return m.payload
        raise KeyError(f"no {kind!r} message from {sender.value}")

    def to_list(self):
        return [m.to_dict() for m in self._messages]


@dataclass(frozen=True)
class Abort:
    stage: Phase
    case: object
    error_rate: float
    errors: int
    checked: int

    def to_dict(self):
        return {
            "stage": self.stage.value,
            "case": f"C{self.case.value}",
            "error_rate": self.error_rate,
            "errors": self.errors,
            "checked": self.checked,
        }


@dataclass
class ResourceCounters:
    """``qubits_prepared`` includes the ``fresh_preparations`` made by the users."""

    qubits_prepared: int = 0
    fresh_preparations: int = 0
    classical_bits: int = 0

    def add_fresh(self, n):
        self.fresh_preparations += n
        self.qubits_prepared += n


@dataclass
class CaseStats:
    checked: int = 0
    errors: int = 0

    @property
    def error_rate(self):
        return self.errors / self.checked if self.checked else 0.0


@dataclass
class ProtocolOutcome:
    config: ProtocolConfig
    verdict: Optional[str] = None
    per_bit_c: Optional[tuple] = None
    abort: Optional[Abort] = None
    m_a: Optional[tuple] = None
    m_b: Optional[tuple] = None
    K: Optional[tuple] = None
    K_bob: Optional[tuple] = None
    tp_m_a: Optional[tuple] = None
    tp_m_b: Optional[tuple] = None
    g: Optional[tuple] = None
    f: Optional[tuple] = None
    inputs: Optional[PrivateInputs] = None
    s1_records: list = field(default_factory=list)
    s3_records: list = field(default_factory=list)
    s1_stats: dict = field(default_factory=dict)
    s3_stats: dict = field(default_factory=dict)
    counters: ResourceCounters = field(default_factory=ResourceCounters)
    transcript: Transcript = field(default_factory=Transcript)
    ma_overflow: int = 0
    mb_overflow: int = 0

    @property
    def completed(self):
        return self.verdict is not None

    def to_dict(self, include_transcript=False):
        def bits(seq):
            return None if seq is None else "".join(str(b) for b in seq)

        out = {
            "verdict": self.verdict,
            "c": bits(self.per_bit_c),
            "abort": None if self.abort is None else self.abort.to_dict(),
            "m_a": bits(self.m_a),
            "m_b": bits(self.m_b),
            "K": bits(self.K),
            "error_rates": {
                "s1": {f"C{c.value}": asdict(s) for c, s in self.s1_stats.items()},
                "s3": {f"C{c.value}": asdict(s) for c, s in self.s3_stats.items()},
            },
            "resources": asdict(self.counters),
        }
        if include_transcript:
            out["transcript"] = self.transcript.to_list()
        return out
