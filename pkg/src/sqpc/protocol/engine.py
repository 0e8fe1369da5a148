"""Party state machines for one protocol run.

TP, Alice and Bob interact only through travelling tokens (see
``particles``) and the ``Transcript``.  Every hop between parties goes through
``adversary.transit`` so an eavesdropper can act on each leg.  TP's checks
take the announced values as arguments and read nothing else besides TP's own
registers.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

from .. import rng as rngmod
from ..quantum import FmbOutcome, eq6_consistent, eq7_consistent
from .modes import classify_case_s1, classify_case_s3, sample_modes
from .particles import ChiSystem, Slot, load_into, prepare_fresh, z_measure
from .types import (
    Abort,
    CaseS1,
    CaseS3,
    CaseStats,
    ConfigError,
    InsufficientSample,
    Leg,
    ModeS1,
    ModeS3,
    PairRecordS3,
    ParticleRecordS1,
    Phase,
    PrepChoice,
    PrivateInputs,
    ProtocolConfig,
    ProtocolError,
    ProtocolOutcome,
    ResourceCounters,
    Sampling,
    Sender,
    Transcript,
    Visibility,
)

log = logging.getLogger(__name__)

EQUAL = "EQUAL"
NOT_EQUAL = "NOT_EQUAL"
CHI00 = FmbOutcome(0, 0)
PUBLIC, TP_ONLY = Visibility.PUBLIC, Visibility.TP_ONLY
TP, ALICE, BOB = Sender.TP, Sender.ALICE, Sender.BOB


@dataclass
class Streams:
    """Random streams of one run, one per actor (plus modes and measurement)."""

    modes: object
    quantum: object
    alice: object
    bob: object
    eve: object
    tp: object

    @classmethod
    def for_run(cls, seed, index=0):
        tags = (rngmod.RUN_MODES, rngmod.RUN_QUANTUM, rngmod.RUN_ALICE,
                rngmod.RUN_BOB, rngmod.RUN_EVE, rngmod.RUN_TP)
        return cls(*(rngmod.substream(seed, index, t) for t in tags))

    @classmethod
    def single(cls, rng):
        return cls(rng, rng, rng, rng, rng, rng)


class PassThrough:
    """The honest channel."""

    def reset(self):
        pass

    def transit(self, leg, phase, position, tokens, rng):
        return tokens


PASS_THROUGH = PassThrough()


def _hop(adversary, leg, phase, position, tokens, rng):
    out = adversary.transit(leg, phase, position, tokens, rng)
    if len(out) != len(tokens):
        raise ProtocolError(f"{leg.value} delivered {len(out)} particles, expected {len(tokens)}")
    return out


@dataclass
class Preparation:
    L: int
    systems: list

    @property
    def s1(self):
        return [Slot(s, 0) for s in self.systems]

    @property
    def s2(self):
        return [Slot(s, 1) for s in self.systems]

    @property
    def s3(self):
        return [(Slot(s, 2), Slot(s, 3)) for s in self.systems]

    @property
    def s1_systems(self):
        """Systems whose qubit 0 travels (the first 8L)."""
        return self.systems[: 8 * self.L]

    @property
    def s3_systems(self):
        """Systems whose qubits 2 and 3 travel (the last 4L)."""
        return self.systems[8 * self.L:]


def tp_prepare(L, counters=None):
    if L < 1:
        raise ConfigError(f"L must be positive, got {L}")
    if counters is not None:
        counters.qubits_prepared += 48 * L
    return Preparation(L, [ChiSystem(i) for i in range(12 * L)])


# ---------------------------------------------------------------- S1 phase


def s1_transit(system, alice_mode, bob_mode, position, adversary, streams, counters=None):
    """Carry one S1 particle around the circle; returns the record and the returned token."""
    rec = ParticleRecordS1(position, alice_mode, bob_mode, classify_case_s1(alice_mode, bob_mode))
    q = streams.quantum
    tok = _hop(adversary, Leg.TP_TO_ALICE, Phase.S1, position, [Slot(system, 0)], streams.eve)[0]
    if alice_mode is ModeS1.MEASURE:
        rec.alice_result = bit = z_measure(tok, q)
        tok = prepare_fresh(tok, bit, bit)
        if counters is not None:
            counters.add_fresh(1)
    tok = _hop(adversary, Leg.ALICE_TO_BOB, Phase.S1, position, [tok], streams.eve)[0]
    if bob_mode is ModeS1.MEASURE:
        rec.bob_result = bit = z_measure(tok, q)
        tok = prepare_fresh(tok, bit, bit)
        if counters is not None:
            counters.add_fresh(1)
    tok = _hop(adversary, Leg.BOB_TO_TP, Phase.S1, position, [tok], streams.eve)[0]
    return rec, tok


def s1_check(rec, system, token, case, announced, rng):
    """TP's check of one S1 position.

    ``announced`` is what the users told TP: ``(alice_bit, bob_bit)`` in Case
    2, the announced bit (or ``None`` when the position was kept private) in
    Cases 3 and 4, ignored in Case 1.  Returns ``True`` on a detected error,
    ``False`` on a pass and ``None`` when the position was not checked.
    """
    state = system.state
    if case is CaseS1.C1:
        load_into(system, 0, token, rng)
        rec.tp_fmb = tuple(state.measure_fmb((0, 1, 2, 3), rng))
        return rec.tp_fmb != CHI00

    rec.tp_z_result = z_measure(token, rng)
    if case is CaseS1.C2:
        alice_bit, bob_bit = announced
    else:
        alice_bit = bob_bit = announced
        if announced is None:
            return None
    rec.tp_bell_34 = int(state.measure_bell((2, 3), rng))
    rec.tp_z_s2 = state.measure_z(1, rng)
    ok = eq6_consistent(alice_bit, rec.tp_z_s2, rec.tp_bell_34)
    ok = ok and alice_bit == bob_bit == rec.tp_z_result
    return not ok


def _choose_checks(positions, L, sampling, rng):
    """Positions a user announces for checking; the rest stay private."""
    if sampling is Sampling.QUOTA:
        if len(positions) != 2 * L:
            raise ProtocolError(f"quota violated: {len(positions)} positions, expected {2 * L}")
        picked = rng.choice(len(positions), size=L, replace=False)
        return sorted(positions[i] for i in picked)
    return [p for p in positions if rng.random() < 0.5]


def _first_abort(stats, threshold, phase):
    for case, s in stats.items():
        if s.checked and s.error_rate > threshold:
            return Abort(phase, case, s.error_rate, s.errors, s.checked)
    return None


@dataclass
class S1Result:
    records: list
    stats: dict
    abort: object = None
    m_a: tuple = ()
    m_b: tuple = ()
    tp_m_a: tuple = ()
    tp_m_b: tuple = ()

    def require_private(self, L):
        if len(self.m_a) < L:
            raise InsufficientSample("m_a (S1 Case 4)", len(self.m_a), L)
        if len(self.m_b) < L:
            raise InsufficientSample("m_b (S1 Case 3)", len(self.m_b), L)


def run_s1_phase(prep, modes, config, streams, adversary=PASS_THROUGH,
                 transcript=None, counters=None, defer_shortfall=False):
    """Steps 1-3 for the 8L travelling S1 particles.

    Raises ``InsufficientSample`` when too few private positions remain,
    unless ``defer_shortfall`` is set (the caller then checks
    ``S1Result.require_private`` after the remaining security checks).
    """
    L = config.L
    transcript = Transcript() if transcript is None else transcript
    systems = prep.s1_systems
    if len(modes) != len(systems):
        raise ConfigError(f"need {len(systems)} S1 mode pairs, got {len(modes)}")

    records, returned = [], []
    for i, (a, b) in enumerate(modes):
        rec, tok = s1_transit(systems[i], a, b, i, adversary, streams, counters)
        records.append(rec)
        returned.append(tok)

    transcript.send(TP, PUBLIC, "s1_received", len(records))
    a_meas = set(transcript.send(ALICE, PUBLIC, "s1_measure_positions",
                                 [r.position for r in records if r.alice_mode is ModeS1.MEASURE]))
    b_meas = set(transcript.send(BOB, PUBLIC, "s1_measure_positions",
                                 [r.position for r in records if r.bob_mode is ModeS1.MEASURE]))
    # TP's own view of the cases, from the announcements only
    cases = [
        classify_case_s1(ModeS1.MEASURE if i in a_meas else ModeS1.REFLECT,
                         ModeS1.MEASURE if i in b_meas else ModeS1.REFLECT)
        for i in range(len(records))
    ]
    by_case = {c: [i for i, k in enumerate(cases) if k is c] for c in CaseS1}

    a_c2 = dict(transcript.send(ALICE, TP_ONLY, "s1_c2_results",
                                [(i, records[i].alice_result) for i in by_case[CaseS1.C2]]))
    b_c2 = dict(transcript.send(BOB, TP_ONLY, "s1_c2_results",
                                [(i, records[i].bob_result) for i in by_case[CaseS1.C2]]))
    b_checks = _choose_checks(by_case[CaseS1.C3], L, config.sampling, streams.bob)
    b_c3 = dict(transcript.send(BOB, TP_ONLY, "s1_c3_checks",
                                [(i, records[i].bob_result) for i in b_checks]))
    a_checks = _choose_checks(by_case[CaseS1.C4], L, config.sampling, streams.alice)
    a_c4 = dict(transcript.send(ALICE, TP_ONLY, "s1_c4_checks",
                                [(i, records[i].alice_result) for i in a_checks]))

    stats = {c: CaseStats() for c in CaseS1}
    for i, case in enumerate(cases):
        if case is CaseS1.C2:
            announced = (a_c2[i], b_c2[i])
        elif case is CaseS1.C3:
            announced = b_c3.get(i)
        elif case is CaseS1.C4:
            announced = a_c4.get(i)
        else:
            announced = None
        err = s1_check(records[i], systems[i], returned[i], case, announced, streams.tp)
        if err is None:
            records[i].used_for = "private"
            continue
        records[i].error = err
        stats[case].checked += 1
        stats[case].errors += err

    result = S1Result(records, stats, _first_abort(stats, config.error_threshold, Phase.S1))
    transcript.send(TP, PUBLIC, "s1_check_result", "abort" if result.abort else "pass")
    if result.abort:
        return result

    # private halves, ascending position
    priv_b = [i for i in by_case[CaseS1.C3] if i not in b_c3][:L]
    priv_a = [i for i in by_case[CaseS1.C4] if i not in a_c4][:L]
    result.m_b = tuple(records[i].bob_result for i in priv_b)
    result.m_a = tuple(records[i].alice_result for i in priv_a)
    result.tp_m_b = tuple(records[i].tp_z_result for i in priv_b)
    result.tp_m_a = tuple(records[i].tp_z_result for i in priv_a)
    for i in by_case[CaseS1.C3] + by_case[CaseS1.C4]:
        if i not in priv_a and i not in priv_b and records[i].used_for == "private":
            records[i].used_for = "spare"
    if not defer_shortfall:
        result.require_private(L)
    return result


# ---------------------------------------------------------------- S3 phase


class BitSource:
    """A user's random string (M_A or M_B), consumed in ascending order.

    When ``overflow_rng`` is given the string is extended with fresh coins
    once exhausted (only possible under BERNOULLI sampling); otherwise
    exhaustion raises ``InsufficientSample``.
    """

    def __init__(self, bits, overflow_rng=None, name="M_A"):
        self.name = name
        self.bits = list(bits)
        self.cursor = 0
        self.overflow = 0
        self._rng = overflow_rng

    def take(self):
        if self.cursor >= len(self.bits):
            if self._rng is None:
                raise InsufficientSample(self.name, len(self.bits), self.cursor + 1)
            self.bits.append(int(self._rng.random() < 0.5))
            self.overflow += 1
        self.cursor += 1
        return self.cursor - 1, self.bits[self.cursor - 1]


def s3_transit(system, alice, bob, position, adversary, streams, ma_source, mb_source, counters=None):
    """Carry one S3 pair around the circle; returns the record and the two returned tokens."""
    rec = PairRecordS3(position, alice, bob, classify_case_s3(alice, bob))
    q = streams.quantum
    toks = _hop(adversary, Leg.TP_TO_ALICE, Phase.S3, position,
                [Slot(system, 2), Slot(system, 3)], streams.eve)
    if alice.mode is ModeS3.MEASURE2:
        found = tuple(z_measure(t, q) for t in toks)
        if alice.prep is PrepChoice.FROM_MA:
            used = [ma_source.take() for _ in toks]
            rec.ma_bits_used = tuple(i for i, _ in used)
            bits = tuple(b for _, b in used)
        else:
            bits = found
        rec.alice_results, rec.alice_prepared = found, bits
        toks = [prepare_fresh(t, f, b) for t, f, b in zip(toks, found, bits)]
        if counters is not None:
            counters.add_fresh(2)
    toks = _hop(adversary, Leg.ALICE_TO_BOB, Phase.S3, position, toks, streams.eve)
    if bob is ModeS3.MEASURE2:
        found = tuple(z_measure(t, q) for t in toks)
        used = [mb_source.take() for _ in toks]
        rec.mb_bits_used = tuple(i for i, _ in used)
        bits = tuple(b for _, b in used)
        rec.bob_results, rec.bob_prepared = found, bits
        toks = [prepare_fresh(t, f, b) for t, f, b in zip(toks, found, bits)]
        if counters is not None:
            counters.add_fresh(2)
    toks = _hop(adversary, Leg.BOB_TO_TP, Phase.S3, position, toks, streams.eve)
    return rec, toks


def s3_check(rec, system, tokens, case, announced, rng):
    """TP's check of one S3 pair; returns ``True`` on a detected error.

    ``announced`` holds the users' announcements for this pair:
    ``"results"`` (Bob's in Case 2, Alice's in Cases 3 and 4), ``"mb"``
    (Bob's M_B bits, Cases 2 and 4) and, for Case-4 pairs Alice re-prepared
    as found, ``"published"`` = (Alice's results, Bob's results).
    """
    state = system.state
    if case is CaseS3.C1:
        load_into(system, 2, tokens[0], rng)
        load_into(system, 3, tokens[1], rng)
        rec.tp_fmb = tuple(state.measure_fmb((0, 1, 2, 3), rng))
        return rec.tp_fmb != CHI00

    rec.tp_bell_12 = int(state.measure_bell((0, 1), rng))
    ok = eq7_consistent(rec.tp_bell_12, *announced["results"])
    if case is CaseS3.C3:
        # the pair Bob reflected is not inspected
        return not ok
    rec.tp_z_pair = tuple(z_measure(t, rng) for t in tokens)
    ok = ok and rec.tp_z_pair == tuple(announced["mb"])
    if case is CaseS3.C4 and "published" in announced:
        a_pub, b_pub = announced["published"]
        ok = ok and tuple(a_pub) == tuple(b_pub)
    return not ok


@dataclass
class S3Result:
    records: list
    stats: dict
    abort: object = None
    K: tuple = ()
    K_bob: tuple = ()
    ma_overflow: int = 0
    mb_overflow: int = 0

    def require_key(self, L):
        if len(self.K) < L:
            raise InsufficientSample("K (S3 Case 4, FROM_MA)", len(self.K), L)


def run_s3_phase(prep, modes, inputs, config, streams, adversary=PASS_THROUGH,
                 transcript=None, counters=None, defer_shortfall=False):
    """Steps 4-5 for the 4L travelling S3 pairs; builds K."""
    L = config.L
    transcript = Transcript() if transcript is None else transcript
    systems = prep.s3_systems
    if len(modes) != len(systems):
        raise ConfigError(f"need {len(systems)} S3 mode pairs, got {len(modes)}")
    bernoulli = config.sampling is Sampling.BERNOULLI
    ma_src = BitSource(inputs.M_A, streams.alice if bernoulli else None, "M_A")
    mb_src = BitSource(inputs.M_B, streams.bob if bernoulli else None, "M_B")

    records, returned = [], []
    for j, (a, b) in enumerate(modes):
        a.validate()
        rec, toks = s3_transit(systems[j], a, b, j, adversary, streams, ma_src, mb_src, counters)
        records.append(rec)
        returned.append(toks)

    transcript.send(TP, PUBLIC, "s3_received", len(records))
    a_meas = set(transcript.send(ALICE, PUBLIC, "s3_measure_positions",
                                 [r.position for r in records if r.alice_mode.mode is ModeS3.MEASURE2]))
    b_meas = set(transcript.send(BOB, PUBLIC, "s3_measure_positions",
                                 [r.position for r in records if r.bob_mode is ModeS3.MEASURE2]))
    m2, r3 = ModeS3.MEASURE2, ModeS3.REFLECT
    cases = [classify_case_s3(m2 if j in a_meas else r3, m2 if j in b_meas else r3)
             for j in range(len(records))]
    by_case = {c: [j for j, k in enumerate(cases) if k is c] for c in CaseS3}

    b_res = dict(transcript.send(BOB, TP_ONLY, "s3_c2_results",
                                 [(j, records[j].bob_results) for j in by_case[CaseS3.C2]]))
    a_res = dict(transcript.send(ALICE, TP_ONLY, "s3_results",
                                 [(j, records[j].alice_results)
                                  for j in by_case[CaseS3.C3] + by_case[CaseS3.C4]]))
    mb = dict(transcript.send(BOB, TP_ONLY, "s3_mb_bits",
                              [(j, records[j].bob_prepared)
                               for j in by_case[CaseS3.C2] + by_case[CaseS3.C4]]))
    as_found = [j for j in by_case[CaseS3.C4] if records[j].alice_mode.prep is PrepChoice.AS_FOUND]
    a_pub = dict(transcript.send(ALICE, PUBLIC, "s3_c4_as_found",
                                 [(j, records[j].alice_results) for j in as_found]))
    b_pub = dict(transcript.send(BOB, PUBLIC, "s3_c4_as_found",
                                 [(j, records[j].bob_results) for j in a_pub]))

    stats = {c: CaseStats() for c in CaseS3}
    for j, case in enumerate(cases):
        announced = {}
        if case is CaseS3.C2:
            announced = {"results": b_res[j], "mb": mb[j]}
        elif case is CaseS3.C3:
            announced = {"results": a_res[j]}
        elif case is CaseS3.C4:
            announced = {"results": a_res[j], "mb": mb[j]}
            if j in a_pub:
                announced["published"] = (a_pub[j], b_pub[j])
        err = s3_check(records[j], systems[j], returned[j], case, announced, streams.tp)
        records[j].error = err
        stats[case].checked += 1
        stats[case].errors += err

    result = S3Result(records, stats, _first_abort(stats, config.error_threshold, Phase.S3),
                      ma_overflow=ma_src.overflow, mb_overflow=mb_src.overflow)
    transcript.send(TP, PUBLIC, "s3_check_result", "abort" if result.abort else "pass")
    if result.abort:
        return result

    key_pairs = [j for j in by_case[CaseS3.C4] if records[j].alice_mode.prep is PrepChoice.FROM_MA]
    result.K = tuple(b for j in key_pairs for b in records[j].alice_prepared)[:L]
    result.K_bob = tuple(b for j in key_pairs for b in records[j].bob_results)[:L]
    if not defer_shortfall:
        result.require_key(L)
    return result


# ---------------------------------------------------------------- Steps 6-7


def _xor(*seqs):
    n = len(seqs[0])
    if any(len(s) != n for s in seqs):
        raise ValueError(f"length mismatch: {[len(s) for s in seqs]}")
    return tuple(int(sum(bits) % 2) for bits in zip(*seqs))


def compute_g(p_a, K, m_a):
    return _xor(p_a, K, m_a)


def compute_f(p_b, K, m_b):
    return _xor(p_b, K, m_b)


def tp_compare(g, f, m_a, m_b):
    c = _xor(g, f, m_a, m_b)
    return c, (EQUAL if not any(c) else NOT_EQUAL)


def parse_bits(bits, name="bits"):
    """Accept a ``"0101"`` string or an iterable of 0/1 and return a tuple of ints."""
    if isinstance(bits, str):
        if not bits or set(bits) - {"0", "1"}:
            raise ConfigError(f"{name} must be a non-empty string over {{0,1}}, got {bits!r}")
        return tuple(int(ch) for ch in bits)
    out = tuple(int(b) for b in bits)
    if any(b not in (0, 1) for b in out):
        raise ConfigError(f"{name} must contain only bits")
    return out


def draw_private_inputs(p_a, p_b, streams):
    L = len(p_a)
    M_A = tuple(int(b) for b in streams.alice.integers(0, 2, size=2 * L))
    M_B = tuple(int(b) for b in streams.bob.integers(0, 2, size=4 * L))
    return PrivateInputs(p_a, p_b, M_A, M_B)


def run_protocol(p_a, p_b, config, attack=None, streams=None, *, run_index=0, modes=None):
    """Run Steps 1-7 once.

    ``attack`` is an attack spec from ``sqpc.adversary`` (or any object with
    ``transit``/``reset``); ``None`` means an honest channel.  Streams default
    to the per-run substreams of ``(config.seed, run_index)``.  ``modes``
    overrides the mode lottery with an ``(s1, s3)`` pair.

    Returns a ``ProtocolOutcome``; an attack detection is reported through
    ``outcome.abort``.  Raises ``InsufficientSample`` when a completed run
    cannot fill m_a, m_b or K (BERNOULLI sampling only).
    """
    from ..adversary import make_adversary

    p_a, p_b = parse_bits(p_a, "p_a"), parse_bits(p_b, "p_b")
    if not (len(p_a) == len(p_b) == config.L):
        raise ConfigError(f"inputs must have length L={config.L}, got {len(p_a)} and {len(p_b)}")
    streams = Streams.for_run(config.seed, run_index) if streams is None else streams
    adversary = make_adversary(attack)
    adversary.reset()

    counters = ResourceCounters()
    transcript = Transcript()
    inputs = draw_private_inputs(p_a, p_b, streams)
    out = ProtocolOutcome(config=config, inputs=inputs, counters=counters, transcript=transcript)

    s1_modes, s3_modes = sample_modes(config, streams.modes) if modes is None else modes
    prep = tp_prepare(config.L, counters)
    s1 = run_s1_phase(prep, s1_modes, config, streams, adversary, transcript, counters,
                      defer_shortfall=True)
    out.s1_records, out.s1_stats = s1.records, s1.stats
    if s1.abort:
        out.abort = s1.abort
        return out
    s3 = run_s3_phase(prep, s3_modes, inputs, config, streams, adversary, transcript, counters,
                      defer_shortfall=True)
    out.s3_records, out.s3_stats = s3.records, s3.stats
    out.ma_overflow, out.mb_overflow = s3.ma_overflow, s3.mb_overflow
    if s3.abort:
        out.abort = s3.abort
        return out

    s1.require_private(config.L)
    s3.require_key(config.L)
    out.m_a, out.m_b, out.tp_m_a, out.tp_m_b = s1.m_a, s1.m_b, s1.tp_m_a, s1.tp_m_b
    out.K, out.K_bob = s3.K, s3.K_bob

    out.g = transcript.send(ALICE, TP_ONLY, "g", compute_g(p_a, s3.K, s1.m_a))
    out.f = transcript.send(BOB, TP_ONLY, "f", compute_f(p_b, s3.K_bob, s1.m_b))
    counters.classical_bits += len(out.g) + len(out.f)
    out.per_bit_c, out.verdict = tp_compare(out.g, out.f, s1.tp_m_a, s1.tp_m_b)
    transcript.send(TP, PUBLIC, "verdict", out.verdict)
    log.debug("run %d finished: %s", run_index, out.verdict)
    return out
