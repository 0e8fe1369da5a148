"""Correctness sweeps and TP-ignorance statistics over honest runs."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .. import rng as rngmod
from ..protocol import EQUAL, NOT_EQUAL, CaseS3, PrepChoice, ProtocolConfig, Sampling, run_protocol

PASS, FAIL = "PASS", "FAIL"


def _bits(s):
    return "".join(str(b) for b in s)


@dataclass
class CorrectnessReport:
    passed: bool
    runs: int
    aborts: int
    counterexample: Optional[dict] = None

    @property
    def conclusion(self):
        return PASS if self.passed else FAIL

    def to_dict(self):
        return {"conclusion": self.conclusion, "runs": self.runs, "aborts": self.aborts,
                "counterexample": self.counterexample}


def _check_run(p_a, p_b, config, run_index):
    out = run_protocol(p_a, p_b, config, run_index=run_index)
    expected = tuple(a ^ b for a, b in zip(p_a, p_b))
    verdict = EQUAL if not any(expected) else NOT_EQUAL
    if out.abort is not None or out.per_bit_c != expected or out.verdict != verdict:
        return out, {
            "p_a": _bits(p_a), "p_b": _bits(p_b), "run_index": run_index,
            "c": None if out.per_bit_c is None else _bits(out.per_bit_c),
            "verdict": out.verdict,
            "abort": None if out.abort is None else out.abort.to_dict(),
        }
    return out, None


def correctness_sweep(L, trials, seed, sampling=Sampling.QUOTA):
    """Exhaustive L=2 inputs plus ``trials`` random honest runs at ``L``.

    Stops at the first run whose c differs from p_a XOR p_b (or whose
    verdict disagrees, or which aborts) and returns it as the counterexample.
    """
    runs = aborts = 0
    index = 0
    cfg2 = ProtocolConfig(L=2, sampling=sampling, seed=seed)
    for p_a, p_b in itertools.product(itertools.product((0, 1), repeat=2), repeat=2):
        out, bad = _check_run(p_a, p_b, cfg2, index)
        index += 1
        runs += 1
        aborts += out.abort is not None
        if bad:
            return CorrectnessReport(False, runs, aborts, bad)
    cfg = ProtocolConfig(L=L, sampling=sampling, seed=seed)
    draw = rngmod.substream(seed, 0, rngmod.PARAMS)
    for _ in range(trials):
        p_a = tuple(int(b) for b in draw.integers(0, 2, size=L))
        p_b = tuple(int(b) for b in draw.integers(0, 2, size=L))
        out, bad = _check_run(p_a, p_b, cfg, index)
        index += 1
        runs += 1
        aborts += out.abort is not None
        if bad:
            return CorrectnessReport(False, runs, aborts, bad)
    return CorrectnessReport(True, runs, aborts)


@dataclass
class IndependenceReport:
    """TP-side statistics over honest runs.

    ``statistic`` is the largest deviation of any per-bit mean of
    ``g_i XOR m_a^i`` from 1/2 (``threshold`` = 3 binomial standard errors);
    ``correlation`` is the Pearson correlation between K bits and TP's Z
    results on the same Case-4 qubits (``correlation_threshold`` = 3/sqrt(n)).
    """

    statistic: float
    threshold: float
    trials: int
    conclusion: str
    means: dict = field(default_factory=dict)
    correlation: float = 0.0
    correlation_threshold: float = 0.0
    correlation_samples: int = 0
    mb_mismatches: int = 0

    def to_dict(self):
        return {
            "statistic": self.statistic,
            "threshold": self.threshold,
            "trials": self.trials,
            "conclusion": self.conclusion,
            "means": self.means,
            "correlation": self.correlation,
            "correlation_threshold": self.correlation_threshold,
            "correlation_samples": self.correlation_samples,
            "mb_mismatches": self.mb_mismatches,
        }


def tp_ignorance_test(L, trials, seed, p_b=None):
    """For every p_a in {0,1}^L, ``trials`` honest runs with fixed p_b.

    (a) TP can form ``g_i XOR m_a^i = p_a^i XOR k_i``; its per-bit mean must
    be 1/2 within 3 standard errors.  (b) TP's Z results on the returned
    Case-4 key qubits must equal Bob's M_B bits and be uncorrelated with K.
    """
    if L < 2 or trials < 1:
        raise ValueError("need L >= 2 and trials >= 1")
    config = ProtocolConfig(L=L, sampling=Sampling.QUOTA, seed=seed)
    p_b = (0,) * L if p_b is None else tuple(p_b)
    threshold = 3 * 0.5 / math.sqrt(trials)
    means = {}
    k_bits, z_bits = [], []
    mismatches = 0
    index = 0
    for p_a in itertools.product((0, 1), repeat=L):
        sums = np.zeros(L)
        for _ in range(trials):
            out = run_protocol(p_a, p_b, config, run_index=index)
            index += 1
            sums += np.bitwise_xor(out.g, out.tp_m_a)
            for rec in out.s3_records:
                if rec.case is CaseS3.C4 and rec.alice_mode.prep is PrepChoice.FROM_MA:
                    k_bits.extend(rec.alice_prepared)
                    z_bits.extend(rec.tp_z_pair)
                    mismatches += rec.tp_z_pair != rec.bob_prepared
        means[_bits(p_a)] = [float(m) for m in sums / trials]
    statistic = max(abs(m - 0.5) for row in means.values() for m in row)
    k, z = np.array(k_bits, float), np.array(z_bits, float)
    corr = float(np.corrcoef(k, z)[0, 1]) if k.std() > 0 and z.std() > 0 else 0.0
    corr_threshold = 3 / math.sqrt(len(k))
    ok = statistic <= threshold and abs(corr) <= corr_threshold and mismatches == 0
    return IndependenceReport(
        statistic=statistic,
        threshold=threshold,
        trials=trials,
        conclusion=PASS if ok else FAIL,
        means=means,
        correlation=corr,
        correlation_threshold=corr_threshold,
        correlation_samples=len(k),
        mb_mismatches=int(mismatches),
    )
