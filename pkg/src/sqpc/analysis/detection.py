"""Detection probabilities: closed forms and Monte Carlo estimators."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional

from .. import rng as rngmod
from ..adversary import (
    InterceptResend,
    MeasureResend,
    ProbeAccumulator,
    make_adversary,
)
from ..protocol import (
    AliceModeS3,
    CaseS1,
    CaseS3,
    ChiSystem,
    InsufficientSample,
    BitSource,
    ModeS1,
    ModeS3,
    Phase,
    PrepChoice,
    ProtocolConfig,
    Sampling,
    Streams,
    run_protocol,
    s1_check,
    s1_transit,
    s3_check,
    s3_transit,
)
from .oracles import intercept_resend_oracle, measure_resend_oracle

# per-unit detection probabilities claimed for the six intercept-resend variants
REFERENCE_PER_UNIT = {
    (Phase.S1, 1): Fraction(3, 16),
    (Phase.S1, 2): Fraction(1, 4),
    (Phase.S1, 3): Fraction(3, 16),
    (Phase.S3, 1): Fraction(3, 8),
    (Phase.S3, 2): Fraction(9, 16),
    (Phase.S3, 3): Fraction(3, 8),
}

# episodes sharing one counter-based generator
CHUNK = 1024


class ClosedForm(NamedTuple):
    per_unit: Fraction
    overall: float
    units: int

    @property
    def overall_exact(self):
        return 1 - (1 - self.per_unit) ** self.units


def units_per_run(phase, L):
    return 8 * L if Phase(phase) is Phase.S1 else 4 * L


def detection_closed_form(attack, L):
    """Published per-unit and whole-run detection probabilities of an
    intercept-resend attack; ``L`` may be ``math.inf``."""
    if not isinstance(attack, InterceptResend):
        raise ValueError(f"no closed form for {attack!r}")
    p = REFERENCE_PER_UNIT[(attack.phase, attack.variant)]
    if L == math.inf:
        return ClosedForm(p, 1.0, math.inf)
    n = units_per_run(attack.phase, L)
    return ClosedForm(p, float(1 - (1 - p) ** n), n)


def oracle_per_unit(attack, phase):
    """Exact per-unit detection probability from the independent oracles, or ``None``."""
    if isinstance(attack, InterceptResend):
        return intercept_resend_oracle(attack.variant, attack.phase.value)[0]
    if isinstance(attack, MeasureResend):
        return measure_resend_oracle(attack.phase)[1]
    if attack is None:
        return Fraction(0)
    return None


# ---------------------------------------------------------------- episodes


def _coin(rng):
    return rng.random() < 0.5


def s1_episode(adversary, rng, modes=None):
    """One S1 position: mode lottery, transit, TP check.

    Returns ``(record, system, error)`` where ``error`` is ``None`` for a
    Case-3/4 position the user kept private.
    """
    system = ChiSystem(0)
    if modes is None:
        modes = (ModeS1.MEASURE if _coin(rng) else ModeS1.REFLECT,
                 ModeS1.MEASURE if _coin(rng) else ModeS1.REFLECT)
    streams = Streams.single(rng)
    rec, tok = s1_transit(system, modes[0], modes[1], 0, adversary, streams)
    case = rec.case
    if case is CaseS1.C2:
        announced = (rec.alice_result, rec.bob_result)
    elif case is CaseS1.C3:
        announced = rec.bob_result if _coin(rng) else None
    elif case is CaseS1.C4:
        announced = rec.alice_result if _coin(rng) else None
    else:
        announced = None
    err = s1_check(rec, system, tok, case, announced, rng)
    return rec, system, err


def s3_episode(adversary, rng, modes=None):
    """One S3 pair: mode and prep lottery, fresh M_A/M_B bits, transit, TP check."""
    system = ChiSystem(0)
    if modes is None:
        if _coin(rng):
            alice = AliceModeS3(ModeS3.MEASURE2,
                                PrepChoice.FROM_MA if _coin(rng) else PrepChoice.AS_FOUND)
        else:
            alice = AliceModeS3(ModeS3.REFLECT)
        modes = (alice, ModeS3.MEASURE2 if _coin(rng) else ModeS3.REFLECT)
    ma = BitSource([int(_coin(rng)), int(_coin(rng))], name="M_A")
    mb = BitSource([int(_coin(rng)), int(_coin(rng))], name="M_B")
    streams = Streams.single(rng)
    rec, toks = s3_transit(system, modes[0], modes[1], 0, adversary, streams, ma, mb)
    case = rec.case
    if case is CaseS3.C2:
        announced = {"results": rec.bob_results, "mb": rec.bob_prepared}
    elif case is CaseS3.C3:
        announced = {"results": rec.alice_results}
    elif case is CaseS3.C4:
        announced = {"results": rec.alice_results, "mb": rec.bob_prepared}
        if rec.alice_mode.prep is PrepChoice.AS_FOUND:
            announced["published"] = (rec.alice_results, rec.bob_results)
    else:
        announced = None
    err = s3_check(rec, system, toks, case, announced, rng)
    return rec, system, err


def probe_labels(rec, err):
    """Secrets of one episode that Eve's probe may be correlated with."""
    if isinstance(rec.case, CaseS1):
        if err is None and rec.case is CaseS1.C4:
            return [{"m_a": rec.alice_result}]
        if err is None and rec.case is CaseS1.C3:
            return [{"m_b": rec.bob_result}]
        return []
    if rec.case is CaseS3.C4 and rec.alice_mode.prep is PrepChoice.FROM_MA:
        k = rec.alice_prepared
        return [{"K": k[0], "K_parity": k[0] ^ k[1]}, {"K": k[1]}]
    return []


# ---------------------------------------------------------------- estimators


@dataclass
class DetectionEstimate:
    attack: object
    phase: Phase
    episodes: int
    detections: int
    per_case: dict
    reference: Optional[Fraction] = None
    oracle: Optional[Fraction] = None
    probe: Optional[ProbeAccumulator] = field(default=None, repr=False)
    genuine_leaks: int = 0

    @property
    def per_unit_rate(self):
        return self.detections / self.episodes

    @property
    def stderr(self):
        p = self.per_unit_rate
        return math.sqrt(p * (1 - p) / self.episodes)

    def within(self, value, sigmas=3.0):
        """Is ``value`` within ``sigmas`` standard errors (binomial at ``value``)?"""
        value = float(value)
        sd = math.sqrt(value * (1 - value) / self.episodes)
        return abs(self.per_unit_rate - value) <= sigmas * sd

    def case_rate(self, case):
        n, d = self.per_case[case]
        return d / n if n else float("nan")

    def to_dict(self):
        def frac(x):
            return None if x is None else f"{x.numerator}/{x.denominator}"

        return {
            "attack": getattr(self.attack, "label", "none"),
            "phase": self.phase.value,
            "episodes": self.episodes,
            "detections": self.detections,
            "per_unit_rate": self.per_unit_rate,
            "stderr": self.stderr,
            "reference": frac(self.reference),
            "oracle": frac(self.oracle),
            "per_case": {f"C{c.value}": {"episodes": n, "detections": d}
                         for c, (n, d) in self.per_case.items()},
        }


def reference_value(attack):
    if isinstance(attack, InterceptResend):
        return REFERENCE_PER_UNIT[(attack.phase, attack.variant)]
    if attack is None:
        return Fraction(0)
    return None


def detection_rate_mc(attack, phase, episodes, seed, collect_probe=False):
    """Per-unit detection frequency over single-position episodes.

    Episode ``i`` draws from the counter-based generator of chunk
    ``i // CHUNK``, so results are a pure function of ``(attack, phase,
    episodes, seed)``.
    """
    phase = Phase(phase)
    if attack is not None and getattr(attack, "phase", phase) is not phase:
        raise ValueError(f"attack targets {attack.phase.value}, estimator runs {phase.value}")
    episode = s1_episode if phase is Phase.S1 else s3_episode
    cases = CaseS1 if phase is Phase.S1 else CaseS3
    adversary = make_adversary(attack)
    probe = ProbeAccumulator() if collect_probe else None
    counts = {c: [0, 0] for c in cases}
    detections = 0
    leaks = 0
    rng = None
    for i in range(episodes):
        if i % CHUNK == 0:
            rng = rngmod.substream(seed, i // CHUNK, rngmod.EPISODE)
        adversary.reset()
        rec, system, err = episode(adversary, rng)
        counts[rec.case][0] += 1
        if err:
            counts[rec.case][1] += 1
            detections += 1
        leaks += len(getattr(adversary, "genuine_held", lambda: [])())
        if probe is not None and system.state.probe_dim > 1:
            rho = system.state.probe_density()
            for labels in probe_labels(rec, err):
                probe.add(labels, rho)
    return DetectionEstimate(
        attack=attack,
        phase=phase,
        episodes=episodes,
        detections=detections,
        per_case={c: tuple(v) for c, v in counts.items()},
        reference=reference_value(attack),
        oracle=oracle_per_unit(attack, phase),
        probe=probe,
        genuine_leaks=leaks,
    )


@dataclass
class AbortEstimate:
    attack: object
    L: int
    runs: int
    aborts: int
    shortfalls: int
    reference: Optional[float] = None
    oracle: Optional[float] = None

    @property
    def rate(self):
        return self.aborts / self.runs

    @property
    def stderr(self):
        p = self.rate
        return math.sqrt(p * (1 - p) / self.runs)

    def within(self, value, sigmas=3.0):
        value = float(value)
        sd = math.sqrt(value * (1 - value) / self.runs)
        return abs(self.rate - value) <= sigmas * max(sd, 1.0 / self.runs)

    def to_dict(self):
        return {
            "attack": getattr(self.attack, "label", "none"),
            "L": self.L,
            "runs": self.runs,
            "aborts": self.aborts,
            "shortfalls": self.shortfalls,
            "rate": self.rate,
            "stderr": self.stderr,
            "reference": self.reference,
            "oracle": self.oracle,
        }


def abort_rate_mc(attack, L, runs, seed, sampling=Sampling.BERNOULLI):
    """Fraction of full protocol runs that abort under ``attack``.

    Runs whose security checks pass but whose random counts cannot fill
    m_a, m_b or K are counted as not aborted (and tallied in ``shortfalls``).
    """
    config = ProtocolConfig(L=L, sampling=sampling, seed=seed)
    bits = "0" * L
    aborts = shortfalls = 0
    for i in range(runs):
        try:
            out = run_protocol(bits, bits, config, attack, run_index=i)
        except InsufficientSample:
            shortfalls += 1
            continue
        aborts += out.abort is not None
    reference = oracle = None
    if isinstance(attack, InterceptResend):
        reference = detection_closed_form(attack, L).overall
        n = units_per_run(attack.phase, L)
        oracle = float(1 - (1 - oracle_per_unit(attack, attack.phase)) ** n)
    return AbortEstimate(attack, L, runs, aborts, shortfalls, reference, oracle)


__all__ = [
    "CHUNK",
    "REFERENCE_PER_UNIT",
    "AbortEstimate",
    "ClosedForm",
    "DetectionEstimate",
    "abort_rate_mc",
    "detection_closed_form",
    "detection_rate_mc",
    "oracle_per_unit",
    "probe_labels",
    "reference_value",
    "s1_episode",
    "s3_episode",
    "units_per_run",
]
