import itertools

import pytest

from sqpc.protocol import (
    EQUAL,
    NOT_EQUAL,
    AliceModeS3,
    BitSource,
    CaseS1,
    CaseS3,
    ChiSystem,
    ConfigError,
    Fake,
    InsufficientSample,
    ModeS1,
    ModeS3,
    PrepChoice,
    PrivateInputs,
    ProtocolConfig,
    ProtocolError,
    Sampling,
    Sender,
    Slot,
    Streams,
    Transcript,
    Visibility,
    classify_case_s1,
    classify_case_s3,
    compute_f,
    compute_g,
    load_into,
    parse_bits,
    run_protocol,
    s1_modes_for,
    s3_modes_for,
    sample_modes,
    tp_compare,
    tp_prepare,
)
from sqpc import rng as rngmod

R, M = ModeS1.REFLECT, ModeS1.MEASURE
R3, M2 = ModeS3.REFLECT, ModeS3.MEASURE2


# ---------------------------------------------------------------- configuration


@pytest.mark.parametrize("kwargs", [{"L": 0}, {"L": 3}, {"L": 1}, {"L": 2, "error_threshold": 1.5},
                                    {"L": 2.0}])
def test_config_rejects_bad_values(kwargs):
    with pytest.raises(ConfigError):
        ProtocolConfig(**kwargs)


def test_bernoulli_allows_odd_l():
    assert ProtocolConfig(L=3, sampling=Sampling.BERNOULLI).L == 3


def test_private_inputs_lengths():
    PrivateInputs((0, 1), (1, 1), (0,) * 4, (1,) * 8)
    with pytest.raises(ConfigError):
        PrivateInputs((0, 1), (1,), (0,) * 4, (1,) * 8)
    with pytest.raises(ConfigError):
        PrivateInputs((0, 1), (1, 1), (0,) * 3, (1,) * 8)
    with pytest.raises(ConfigError):
        PrivateInputs((0, 2), (1, 1), (0,) * 4, (1,) * 8)


@pytest.mark.parametrize("bits", ["", "10a1", "2"])
def test_parse_bits_rejects_malformed(bits):
    with pytest.raises(ConfigError):
        parse_bits(bits)


def test_run_rejects_length_mismatch():
    with pytest.raises(ConfigError):
        run_protocol("10", "1010", ProtocolConfig(L=4))


# ---------------------------------------------------------------- cases and modes


def test_case_tables():
    assert classify_case_s1(R, R) is CaseS1.C1
    assert classify_case_s1(M, M) is CaseS1.C2
    assert classify_case_s1(R, M) is CaseS1.C3
    assert classify_case_s1(M, R) is CaseS1.C4
    assert classify_case_s1("measure", "reflect") is CaseS1.C4
    assert classify_case_s3(AliceModeS3(R3), R3) is CaseS3.C1
    assert classify_case_s3(AliceModeS3(R3), M2) is CaseS3.C2
    assert classify_case_s3(AliceModeS3(M2, PrepChoice.AS_FOUND), R3) is CaseS3.C3
    assert classify_case_s3(AliceModeS3(M2, PrepChoice.FROM_MA), M2) is CaseS3.C4
    for case in CaseS1:
        assert classify_case_s1(*s1_modes_for(case)) is case
    for case in CaseS3:
        assert classify_case_s3(*s3_modes_for(case, PrepChoice.FROM_MA)) is case


def test_measure_mode_needs_prep_choice():
    with pytest.raises(ConfigError):
        s3_modes_for(CaseS3.C4)


def test_quota_modes_have_exact_counts():
    cfg = ProtocolConfig(L=4)
    s1, s3 = sample_modes(cfg, rngmod.substream(1, 0))
    assert len(s1) == 32 and len(s3) == 16
    counts = {c: sum(classify_case_s1(*m) is c for m in s1) for c in CaseS1}
    assert all(v == 8 for v in counts.values())
    counts3 = {c: sum(classify_case_s3(*m) is c for m in s3) for c in CaseS3}
    assert all(v == 4 for v in counts3.values())
    from_ma = sum(a.prep is PrepChoice.FROM_MA for a, b in s3 if classify_case_s3(a, b) is CaseS3.C4)
    assert from_ma == 2


def test_bernoulli_modes_lengths():
    s1, s3 = sample_modes(ProtocolConfig(L=3, sampling=Sampling.BERNOULLI), rngmod.substream(1, 0))
    assert len(s1) == 24 and len(s3) == 12


# ---------------------------------------------------------------- honest runs


@pytest.mark.parametrize("pa,pb,c,verdict", [("1010", "1010", "0000", EQUAL),
                                             ("1010", "1011", "0001", NOT_EQUAL),
                                             ("0000", "1111", "1111", NOT_EQUAL)])
def test_honest_run_verdicts(pa, pb, c, verdict):
    out = run_protocol(pa, pb, ProtocolConfig(L=4, seed=7))
    assert out.verdict == verdict
    assert "".join(map(str, out.per_bit_c)) == c
    assert out.abort is None and out.completed


def test_all_l2_inputs():
    cfg = ProtocolConfig(L=2, seed=3)
    for i, (pa, pb) in enumerate(itertools.product(itertools.product((0, 1), repeat=2), repeat=2)):
        out = run_protocol(pa, pb, cfg, run_index=i)
        assert out.per_bit_c == tuple(a ^ b for a, b in zip(pa, pb))


def test_shared_secrets_agree():
    out = run_protocol("0110", "0011", ProtocolConfig(L=4, seed=11))
    assert out.K == out.K_bob
    assert out.m_a == out.tp_m_a and out.m_b == out.tp_m_b
    assert out.g == compute_g(out.inputs.p_a, out.K, out.m_a)
    assert out.f == compute_f(out.inputs.p_b, out.K, out.m_b)
    assert out.ma_overflow == out.mb_overflow == 0


def test_quota_case_counts_in_run():
    L = 4
    out = run_protocol("0000", "0000", ProtocolConfig(L=L, seed=2))
    s1 = {c: s.checked for c, s in out.s1_stats.items()}
    assert s1 == {CaseS1.C1: 2 * L, CaseS1.C2: 2 * L, CaseS1.C3: L, CaseS1.C4: L}
    assert all(s.checked == L and s.errors == 0 for s in out.s3_stats.values())


@pytest.mark.parametrize("L", [2, 4, 8])
def test_resource_counters(L):
    out = run_protocol("0" * L, "1" * L, ProtocolConfig(L=L))
    assert out.counters.qubits_prepared == 64 * L
    assert out.counters.fresh_preparations == 16 * L
    assert out.counters.classical_bits == 2 * L


def test_deterministic_per_seed_and_index():
    cfg = ProtocolConfig(L=4, seed=21)
    a = run_protocol("0101", "0111", cfg).to_dict(include_transcript=True)
    b = run_protocol("0101", "0111", cfg).to_dict(include_transcript=True)
    c = run_protocol("0101", "0111", cfg, run_index=1).to_dict(include_transcript=True)
    assert a == b
    assert a != c


def test_transcript_keeps_private_data_from_tp():
    out = run_protocol("1101", "0100", ProtocolConfig(L=4, seed=4))
    kinds = [m.kind for m in out.transcript]
    assert kinds[-1] == "verdict"
    assert out.transcript.last(Sender.TP, "verdict") == out.verdict
    assert {"g", "f", "s1_c2_results", "s3_mb_bits"} <= set(kinds)
    for m in out.transcript:
        assert m.sender is not Sender.EVE
        assert m.kind not in ("p_a", "p_b", "K", "M_A")
    # TP sees everything that was sent; nothing is hidden from the public log but TP-only data
    assert len(out.transcript.tp_view()) == len(out.transcript)
    public = out.transcript.public_view()
    assert all(m.visibility is Visibility.PUBLIC for m in public)
    assert not any(m.kind in ("g", "f") for m in public)


def test_transcript_api():
    t = Transcript()
    assert t.send(Sender.ALICE, Visibility.TP_ONLY, "x", 3) == 3
    with pytest.raises(KeyError):
        t.last(Sender.BOB, "x")
    assert t.to_list() == [{"sender": "alice", "visibility": "tp_only", "kind": "x", "payload": 3}]


def test_bernoulli_runs_complete_or_report_shortfall():
    cfg = ProtocolConfig(L=1, sampling=Sampling.BERNOULLI, seed=5)
    completed = shortfalls = 0
    for i in range(60):
        try:
            out = run_protocol("1", "0", cfg, run_index=i)
        except InsufficientSample as exc:
            assert exc.have < exc.need
            shortfalls += 1
            continue
        assert out.per_bit_c == (1,)
        completed += 1
    assert completed > 0 and shortfalls > 0


# ---------------------------------------------------------------- helpers


def test_tp_compare_xor():
    c, verdict = tp_compare((1, 0), (0, 0), (1, 1), (0, 1))
    assert c == (0, 0) and verdict == EQUAL
    with pytest.raises(ValueError):
        tp_compare((1,), (0, 0), (1, 1), (0, 1))


def test_bit_source_order_and_overflow():
    src = BitSource((1, 0))
    assert src.take() == (0, 1) and src.take() == (1, 0)
    with pytest.raises(InsufficientSample):
        src.take()
    grow = BitSource((1,), overflow_rng=rngmod.substream(0, 0))
    grow.take()
    idx, bit = grow.take()
    assert idx == 1 and bit in (0, 1) and grow.overflow == 1


def test_tp_prepare_partition():
    prep = tp_prepare(2)
    assert len(prep.systems) == 24
    assert len(prep.s1_systems) == 16 and len(prep.s3_systems) == 8
    assert prep.s3[0] == (Slot(prep.systems[0], 2), Slot(prep.systems[0], 3))


def test_load_into_rejects_foreign_particle():
    a, b = ChiSystem(0), ChiSystem(1)
    with pytest.raises(ProtocolError):
        load_into(a, 0, Slot(b, 0), rngmod.substream(0, 0))
    load_into(a, 0, Fake(1), rngmod.substream(0, 0))
    assert a.state.probabilities((0,), [[1, 0], [0, 1]])[1] == pytest.approx(1.0)


def test_streams_are_per_actor():
    s = Streams.for_run(3, 0)
    draws = [g.random() for g in (s.modes, s.quantum, s.alice, s.bob, s.eve, s.tp)]
    assert len(set(draws)) == 6
