"""Mode lotteries and case classification."""
from __future__ import annotations

from .types import (
    AliceModeS3,
    CaseS1,
    CaseS3,
    ConfigError,
    ModeS1,
    ModeS3,
    PrepChoice,
    Sampling,
)

R, M = ModeS1.REFLECT, ModeS1.MEASURE
R3, M2 = ModeS3.REFLECT, ModeS3.MEASURE2

_S1_CASES = {(R, R): CaseS1.C1, (M, M): CaseS1.C2, (R, M): CaseS1.C3, (M, R): CaseS1.C4}
_S1_MODES = {case: modes for modes, case in _S1_CASES.items()}
_S3_CASES = {(R3, R3): CaseS3.C1, (R3, M2): CaseS3.C2, (M2, R3): CaseS3.C3, (M2, M2): CaseS3.C4}
_S3_MODES = {case: modes for modes, case in _S3_CASES.items()}


def classify_case_s1(alice, bob):
    try:
        return _S1_CASES[(alice, bob)]
    except KeyError:
        return _S1_CASES[(ModeS1(alice), ModeS1(bob))]


def classify_case_s3(alice, bob):
    mode = alice.mode if isinstance(alice, AliceModeS3) else alice
    try:
        return _S3_CASES[(mode, bob)]
    except KeyError:
        return _S3_CASES[(ModeS3(mode), ModeS3(bob))]


def s1_modes_for(case):
    return _S1_MODES[case]


def s3_modes_for(case, prep=None):
    a, b = _S3_MODES[case]
    if a is M2 and prep is None:
        raise ConfigError(f"{case} needs a prep choice for Alice")
    return AliceModeS3(a, prep if a is M2 else None), b


def _coin(rng):
    return rng.random() < 0.5


def sample_modes(config, rng):
    """Draw the S1 and S3 mode assignments for one run.

    Returns ``(s1, s3)``: ``s1`` is a list of ``(alice, bob)`` for the 8L
    travelling S1 particles and ``s3`` a list of ``(AliceModeS3, bob)`` for
    the 4L travelling S3 pairs.
    """
    L = config.L
    if config.sampling is Sampling.QUOTA:
        s1_cases = [c for c in CaseS1 for _ in range(2 * L)]
        order = rng.permutation(len(s1_cases))
        s1 = [_S1_MODES[s1_cases[i]] for i in order]
        s3_plan = []
        for case in CaseS3:
            if _S3_MODES[case][0] is M2:
                s3_plan += [(case, PrepChoice.FROM_MA)] * (L // 2)
                s3_plan += [(case, PrepChoice.AS_FOUND)] * (L // 2)
            else:
                s3_plan += [(case, None)] * L
        order = rng.permutation(len(s3_plan))
        s3 = [s3_modes_for(*s3_plan[i]) for i in order]
        return s1, s3

    s1 = [(M if _coin(rng) else R, M if _coin(rng) else R) for _ in range(8 * L)]
    s3 = []
    for _ in range(4 * L):
        if _coin(rng):
            prep = PrepChoice.FROM_MA if _coin(rng) else PrepChoice.AS_FOUND
            alice = AliceModeS3(M2, prep)
        else:
            alice = AliceModeS3(R3)
        s3.append((alice, M2 if _coin(rng) else R3))
    return s1, s3
