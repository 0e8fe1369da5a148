"""Independent reference values.

Nothing here calls the state-vector simulator or the protocol engine:

* ``intercept_resend_oracle`` enumerates every classical branch of an
  intercept-resend episode with exact fractions.  Intercept-resend only ever
  involves Z-basis values, and TP's Bell/Z correlation checks pass exactly
  when the announced bits equal the Z value the genuine qubit(s) collapsed
  to, so a classical model is exact.
* ``dephasing_oracle`` builds the χ-type density matrix with plain numpy,
  dephases the travelling qubits and reads off the probability that TP's
  four-qubit check does not return the original state.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache

import numpy as np

# travelling qubit(s) per phase
_UNITS = {"s1": 1, "s3": 2}
_HALF = Fraction(1, 2)

# (alice measures, bob measures) per case number
_S1_MODES = {1: (False, False), 2: (True, True), 3: (False, True), 4: (True, False)}
_S3_MODES = {1: (False, False), 2: (False, True), 3: (True, False), 4: (True, True)}


class _Episode:
    """Classical bookkeeping for one intercept-resend branch."""

    def __init__(self, g):
        self.g = g  # Z value the genuine qubit(s) collapse to
        self.slot = None  # current classical content of the genuine slot(s); None = untouched

    def read(self, tok):
        kind, val = tok
        if kind == "fake":
            return val
        if self.slot is None:
            self.slot = self.g
        return self.slot

    def prepare(self, tok, bits):
        if tok[0] == "fake":
            return ("fake", bits)
        self.slot = bits
        return tok


def _eve(variant, leg, tok, fake, store):
    if (variant in (1, 2) and leg == 1) or (variant == 3 and leg == 2):
        store.append(tok)
        return ("fake", fake)
    if (variant == 1 and leg == 2) or (variant in (2, 3) and leg == 3):
        return store.pop()
    return tok


def _s1_branch(variant, case, g, fake, checked):
    a_meas, b_meas = _S1_MODES[case]
    ep, store = _Episode(g), []
    tok = _eve(variant, 1, ("genuine", None), fake, store)
    a = b = None
    if a_meas:
        a = ep.read(tok)
        tok = ep.prepare(tok, a)
    tok = _eve(variant, 2, tok, fake, store)
    if b_meas:
        b = ep.read(tok)
        tok = ep.prepare(tok, b)
    tok = _eve(variant, 3, tok, fake, store)
    if case == 1:
        if tok[0] == "genuine" and ep.slot is None:
            return False
        raise NotImplementedError("returned particle disturbed in a both-reflect position")
    tp_z = ep.read(tok)
    if case == 2:
        return not (a == ep.g and a == b == tp_z)
    if not checked:
        return False
    announced = b if case == 3 else a
    return not (announced == ep.g and announced == tp_z)


def _s3_branch(variant, case, g, fake, from_ma, ma, mb):
    a_meas, b_meas = _S3_MODES[case]
    ep, store = _Episode(g), []
    tok = _eve(variant, 1, ("genuine", None), fake, store)
    a = b = None
    if a_meas:
        a = ep.read(tok)
        tok = ep.prepare(tok, ma if from_ma else a)
    tok = _eve(variant, 2, tok, fake, store)
    if b_meas:
        b = ep.read(tok)
        tok = ep.prepare(tok, mb)
    tok = _eve(variant, 3, tok, fake, store)
    if case == 1:
        if tok[0] == "genuine" and ep.slot is None:
            return False
        raise NotImplementedError("returned pair disturbed in a both-reflect position")
    if case == 2:
        return not (b == ep.g and ep.read(tok) == mb)
    if case == 3:
        return a != ep.g
    ok = a == ep.g and ep.read(tok) == mb
    if not from_ma:
        ok = ok and a == b
    return not ok


@lru_cache(maxsize=None)
def intercept_resend_oracle(variant, phase):
    """Exact per-unit detection probability and its per-case breakdown.

    Returns ``(total, {case: conditional detection probability})`` for
    variant 1-3 on ``phase`` ``"s1"`` or ``"s3"`` under uniform mode,
    check-subset and fake-state lotteries.
    """
    phase = getattr(phase, "value", phase)
    if variant not in (1, 2, 3) or phase not in _UNITS:
        raise ValueError(f"unsupported intercept-resend attack ({variant}, {phase})")
    n = _UNITS[phase]
    bit_tuples = list(itertools.product((0, 1), repeat=n))
    w = Fraction(1, len(bit_tuples))
    per_case = {}
    for case in (1, 2, 3, 4):
        p = Fraction(0)
        for g, fake in itertools.product(bit_tuples, bit_tuples):
            if phase == "s1":
                branches = [(_HALF, dict(checked=c)) for c in (True, False)]
                weight_pair = w * w
                for bw, kw in branches:
                    p += weight_pair * bw * _s1_branch(variant, case, g[0], fake[0], **kw)
            else:
                for from_ma, ma, mb in itertools.product((True, False), bit_tuples, bit_tuples):
                    p += w * w * _HALF * w * w * _s3_branch(variant, case, g, fake, from_ma, ma, mb)
        per_case[case] = p
    return sum(per_case.values()) / 4, per_case


# ---------------------------------------------------------------- dephasing

_CHI_TERMS = {"0000": 1, "0110": 1, "1001": 1, "1111": -1,
              "0011": 1, "0101": -1, "1010": 1, "1100": 1}


def chi_vector():
    v = np.zeros(16)
    for ket, sign in _CHI_TERMS.items():
        v[int(ket, 2)] = sign
    return v / np.linalg.norm(v)


def dephasing_oracle(qubits):
    """Probability that the χ-type state fails TP's four-qubit check after
    the given (0-based) qubits are measured in Z and not otherwise disturbed.

    Returned as an exact fraction recovered from the double-precision result.
    """
    chi = chi_vector()
    rho = np.outer(chi, chi)
    for q in qubits:
        shift = 3 - q
        mask = np.array([(i >> shift) & 1 for i in range(16)])
        rho = rho * (mask[:, None] == mask[None, :])
    survive = float(chi @ rho @ chi)
    return Fraction(1 - survive).limit_denominator(1 << 10)


def measure_resend_oracle(phase):
    """``(p_star, per_unit)``: Case-1 conditional and overall per-unit detection."""
    phase = getattr(phase, "value", phase)
    travelling = (0,) if phase == "s1" else (2, 3)
    p_star = dephasing_oracle(travelling)
    return p_star, p_star / 4
