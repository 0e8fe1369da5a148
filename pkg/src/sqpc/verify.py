"""Self-verification suite behind ``sqpc verify``.

``quick`` runs the algebraic identities, small correlation samples and the
exhaustive L=2 correctness sweep.  ``full`` adds every Monte Carlo check at
production sample sizes.  Each check compares against an independent
oracle or an exact invariant; comparisons with published figures are listed
separately under ``published`` and do not affect the exit status.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng as rngmod
from .adversary import (
    EntangleMeasure,
    InterceptResend,
    MeasureResend,
    build_cnot_probe,
    build_constrained_ue,
    build_violating_ue,
    identity_ue,
    probe_distinguishability,
)
from .analysis import (
    REFERENCE_PER_UNIT,
    abort_rate_mc,
    chi_vector,
    correctness_sweep,
    detection_closed_form,
    detection_rate_mc,
    efficiency_catalog,
    intercept_resend_oracle,
    measure_resend_oracle,
    resource_audit,
    tp_ignorance_test,
    units_per_run,
)
from .protocol import Leg, Phase, ProtocolConfig, Sampling, run_protocol
from .quantum import (
    EQ8_LITERAL_QUBITS,
    FMB_QUBITS,
    decompose_eq6,
    decompose_eq7,
    eq6_consistent,
    eq7_consistent,
    fmb_gram,
    prepare_chi00,
)

PASS, FAIL = "PASS", "FAIL"

EXPECTED_ETAS = ("1/66", "1/82", "1/60", "1/10", "1/32", "1/48", "1/36", "1/58", "1/42", "1/70")


@dataclass
class Check:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self):
        return {"name": self.name, "status": PASS if self.passed else FAIL, **self.detail}


@dataclass
class VerifyReport:
    level: str
    seed: int
    checks: list = field(default_factory=list)
    published: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def to_dict(self):
        return {
            "level": self.level,
            "seed": self.seed,
            "status": PASS if self.passed else FAIL,
            "checks": [c.to_dict() for c in self.checks],
            "published": self.published,
        }


def _frac(x):
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------- algebra


def check_chi_amplitudes(tol=1e-12):
    # the reference vector is an independent literal kept with the oracles
    err = float(np.max(np.abs(prepare_chi00().amps - chi_vector())))
    return Check("chi00 amplitudes", err <= tol, {"max_error": err, "tolerance": tol})


def check_fmb_gram(pauli_qubits=FMB_QUBITS, tol=1e-10):
    err = float(np.max(np.abs(fmb_gram(pauli_qubits) - np.eye(16))))
    name = f"FMB Gram = I (Paulis on qubits {pauli_qubits[0] + 1},{pauli_qubits[1] + 1})"
    return Check(name, err <= tol, {"max_error": err, "tolerance": tol})


def check_decompositions(tol=1e-12):
    chi = prepare_chi00().amps
    e6 = float(np.max(np.abs(decompose_eq6().amps - chi)))
    e7 = float(np.max(np.abs(decompose_eq7().amps - chi)))
    return Check("Z-Bell expansions re-sum to chi00", max(e6, e7) <= tol,
                 {"error_z12_bell34": e6, "error_bell12_z34": e7, "tolerance": tol})


def sample_correlations(samples, seed):
    """Count eq6/eq7 violations over ``samples`` fresh χ states each."""
    v6 = v7 = 0
    rng = None
    for i in range(samples):
        if i % 1024 == 0:
            rng = rngmod.substream(seed, i // 1024, rngmod.PARAMS + 1)
        s = prepare_chi00()
        z1, z2 = s.measure_z(0, rng), s.measure_z(1, rng)
        v6 += not eq6_consistent(z1, z2, s.measure_bell((2, 3), rng))
        s = prepare_chi00()
        b12 = s.measure_bell((0, 1), rng)
        v7 += not eq7_consistent(b12, s.measure_z(2, rng), s.measure_z(3, rng))
    return v6, v7


def check_correlations(samples, seed):
    v6, v7 = sample_correlations(samples, seed)
    return Check("Z/Bell correlation tables", v6 == 0 and v7 == 0,
                 {"samples": samples, "violations_eq6": v6, "violations_eq7": v7})


def check_correctness(L, trials, seed):
    r = correctness_sweep(L, trials, seed)
    return Check(f"c = p_a XOR p_b (L=2 exhaustive + {trials} runs at L={L})",
                 r.passed and r.aborts == 0, r.to_dict())


def check_efficiency():
    etas = tuple(r.to_dict()["eta"] for r in efficiency_catalog())
    return Check("qubit-efficiency catalog", etas == EXPECTED_ETAS,
                 {"etas": list(etas)})


def check_resource_audit(seed, Ls=(2, 4, 8)):
    rows = {}
    ok = True
    for L in Ls:
        out = run_protocol("0" * L, "1" * L, ProtocolConfig(L=L, seed=seed))
        a = resource_audit(out, L)
        rows[str(L)] = {"beta": a.beta_observed, "gamma": a.gamma_observed, "match": a.match}
        ok = ok and a.match
    return Check("resource audit beta = 64L, gamma = 2L", ok, {"runs": rows})


# ---------------------------------------------------------------- Monte Carlo


def check_intercept_resend(episodes, seed, report):
    for phase in (Phase.S1, Phase.S3):
        for v in (1, 2, 3):
            attack = InterceptResend(v, phase)
            est = detection_rate_mc(attack, phase, episodes, seed)
            oracle = intercept_resend_oracle(v, phase.value)[0]
            report.checks.append(Check(
                f"intercept-resend v{v} {phase.value} vs oracle",
                est.within(oracle) and est.genuine_leaks == 0,
                {"estimate": est.per_unit_rate, "stderr": est.stderr,
                 "oracle": _frac(oracle), "episodes": episodes},
            ))
            published = REFERENCE_PER_UNIT[(phase, v)]
            report.published.append({
                "name": f"intercept-resend v{v} {phase.value}",
                "published": _frac(published),
                "oracle": _frac(oracle),
                "estimate": est.per_unit_rate,
                "agrees": est.within(published),
            })


def check_measure_resend(episodes, seed, report):
    for phase, leg in ((Phase.S1, Leg.TP_TO_ALICE), (Phase.S3, Leg.ALICE_TO_BOB)):
        est = detection_rate_mc(MeasureResend(leg, phase), phase, episodes, seed)
        p_star, per_unit = measure_resend_oracle(phase)
        first = next(iter(est.per_case))
        n1, d1 = est.per_case[first]
        others = sum(d for c, (_, d) in est.per_case.items() if c is not first)
        sd = math.sqrt(float(p_star) * (1 - float(p_star)) / n1)
        ok = others == 0 and abs(d1 / n1 - float(p_star)) <= 3 * sd
        report.checks.append(Check(
            f"measure-resend {phase.value} leg {leg.value}",
            ok,
            {"case1_rate": d1 / n1, "p_star": _frac(p_star), "detections_other_cases": others,
             "per_unit_rate": est.per_unit_rate, "per_unit_oracle": _frac(per_unit),
             "episodes": episodes},
        ))


def check_abort_rates(runs, seed, report):
    for attack, L in ((InterceptResend(2, Phase.S1), 1), (InterceptResend(2, Phase.S1), 2),
                      (InterceptResend(2, Phase.S3), 1)):
        est = abort_rate_mc(attack, L, runs, seed, Sampling.BERNOULLI)
        report.checks.append(Check(
            f"abort rate {attack.label} {attack.phase.value} L={L} vs oracle",
            est.within(est.oracle),
            {"rate": est.rate, "stderr": est.stderr, "oracle": est.oracle, "runs": runs,
             "shortfalls": est.shortfalls},
        ))
        report.published.append({
            "name": f"abort rate {attack.label} {attack.phase.value} L={L}",
            "published": est.reference,
            "oracle": est.oracle,
            "estimate": est.rate,
            "agrees": est.within(est.reference),
        })


def constrained_draws(n, seed):
    """``n`` parameter pairs (θ, φ) for the constrained entangle-measure family."""
    rng = rngmod.substream(seed, 0, rngmod.PARAMS)
    return [tuple(float(x) for x in rng.uniform(0, 2 * np.pi, size=2)) for _ in range(n)]


def constrained_attack(theta, phi, phase):
    return EntangleMeasure(build_constrained_ue(theta, theta), build_constrained_ue(phi, phi),
                           phase=phase, name="em-constrained")


def check_entangle_constrained(draws, episodes, seed, report):
    worst_fid, detections = 1.0, 0
    for theta, phi in constrained_draws(draws, seed):
        s1 = detection_rate_mc(constrained_attack(theta, phi, Phase.S1), Phase.S1, episodes,
                               seed, collect_probe=True)
        s3 = detection_rate_mc(constrained_attack(theta, phi, Phase.S3), Phase.S3, episodes,
                               seed, collect_probe=True)
        detections += s1.detections + s3.detections
        fids = [probe_distinguishability(s1.probe, "m_a"),
                probe_distinguishability(s1.probe, "m_b"),
                probe_distinguishability(s3.probe, "K")]
        worst_fid = min(worst_fid, *fids)
    report.checks.append(Check(
        "constrained entangle-measure: zero error, zero leakage",
        detections == 0 and worst_fid >= 1 - 1e-10,
        {"draws": draws, "episodes": episodes, "detections": detections,
         "min_fidelity": worst_fid},
    ))


def violating_grid(points=8):
    return [float(x) for x in np.linspace(np.pi / 2 / points, np.pi / 2, points)]


def check_entangle_violating(episodes, seed, report):
    rates = []
    for theta in violating_grid():
        attack = EntangleMeasure(build_violating_ue(theta), identity_ue(), name="em-violating")
        rates.append(detection_rate_mc(attack, Phase.S1, episodes, seed).per_unit_rate)
    report.checks.append(Check(
        "violating entangle-measure: positive detection",
        all(r > 0 for r in rates),
        {"theta": violating_grid(), "rates": rates, "episodes": episodes},
    ))


def check_cnot_probe(episodes, seed, report):
    attack = EntangleMeasure(build_cnot_probe(), identity_ue(), name="em-cnot")
    est = detection_rate_mc(attack, Phase.S1, episodes, seed, collect_probe=True)
    p_star = float(measure_resend_oracle(Phase.S1)[0])
    first = next(iter(est.per_case))
    n1, d1 = est.per_case[first]
    others = sum(d for c, (_, d) in est.per_case.items() if c is not first)
    fid = probe_distinguishability(est.probe, "m_a")
    sd = math.sqrt(p_star * (1 - p_star) / n1)
    report.checks.append(Check(
        "CNOT probe: dephasing-equivalent, full m_a copy",
        others == 0 and abs(d1 / n1 - p_star) <= 3 * sd and fid <= 1e-10,
        {"case1_rate": d1 / n1, "p_star": p_star, "fidelity_m_a": fid, "episodes": episodes},
    ))


def check_tp_ignorance(trials, seed):
    r = tp_ignorance_test(2, trials, seed)
    return Check("TP ignorance (L=2)", r.conclusion == PASS, r.to_dict())


# ---------------------------------------------------------------- driver


def run_verify(level="quick", seed=0):
    if level not in ("quick", "full"):
        raise ValueError(f"level must be 'quick' or 'full', got {level!r}")
    report = VerifyReport(level, seed)
    report.checks += [check_chi_amplitudes(), check_fmb_gram(), check_decompositions(),
                      check_efficiency()]
    literal = check_fmb_gram(EQ8_LITERAL_QUBITS)
    report.published.append({"name": literal.name, "max_error": literal.detail["max_error"],
                             "agrees": literal.passed})
    if level == "quick":
        report.checks.append(check_correlations(1000, seed))
        report.checks.append(check_correctness(2, 0, seed))
        return report
    report.checks.append(check_correlations(100_000, seed))
    report.checks.append(check_correctness(8, 500, seed))
    report.checks.append(check_resource_audit(seed))
    check_intercept_resend(100_000, seed, report)
    check_measure_resend(100_000, seed, report)
    check_abort_rates(10_000, seed, report)
    check_entangle_constrained(20, 10_000, seed, report)
    check_entangle_violating(10_000, seed, report)
    check_cnot_probe(10_000, seed, report)
    report.checks.append(check_tp_ignorance(10_000, seed))
    return report


__all__ = ["Check", "VerifyReport", "run_verify", "constrained_draws", "constrained_attack",
           "violating_grid", "sample_correlations", "units_per_run", "detection_closed_form"]
