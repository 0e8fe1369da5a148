"""Command-line front end: ``sqpc run | attack | efficiency | verify``.

Every command emits one report object (schema version "1").  JSON is the
machine format; ``--pretty`` renders the same report as indented text.
Exit codes: 0 success, 1 usage/config error or failed verification,
2 protocol aborted because an attack was detected.
"""
from __future__ import annotations

import argparse
import json
import sys
import time

from . import __version__
from .adversary import (
    EntangleMeasure,
    InterceptResend,
    MeasureResend,
    build_cnot_probe,
    build_violating_ue,
    identity_ue,
    probe_distinguishability,
)
from .analysis import (
    PASS,
    FAIL,
    detection_closed_form,
    detection_rate_mc,
    efficiency_catalog,
    measure_resend_oracle,
)
from .protocol import (
    ConfigError,
    InsufficientSample,
    Leg,
    Phase,
    ProtocolConfig,
    ProtocolError,
    Sampling,
    run_protocol,
)
from .verify import constrained_attack, constrained_draws, run_verify

SCHEMA_VERSION = "1"
EXIT_OK, EXIT_ERROR, EXIT_ABORT = 0, 1, 2

IR_TYPES = {"ir1": 1, "ir2": 2, "ir3": 3}
MR_TYPES = {"mr-leg1": Leg.TP_TO_ALICE, "mr-leg2": Leg.ALICE_TO_BOB, "mr-leg3": Leg.BOB_TO_TP}
EM_TYPES = ("em-constrained", "em-cnot", "em-violating")
ATTACK_TYPES = (*IR_TYPES, *MR_TYPES, *EM_TYPES)
# probe conditionings reported per phase
CONDITIONING = {Phase.S1: ("m_a", "m_b"), Phase.S3: ("K",)}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _flag(ok):
    return PASS if ok else FAIL


def _frac(x):
    return None if x is None else f"{x.numerator}/{x.denominator}"


def build_attack(kind, phase, seed=0, theta=None, phi=None):
    """Attack spec for a CLI ``--type``/``--attack`` name."""
    if kind is None or kind == "none":
        return None
    phase = Phase(phase)
    if kind in IR_TYPES:
        return InterceptResend(IR_TYPES[kind], phase)
    if kind in MR_TYPES:
        return MeasureResend(MR_TYPES[kind], phase)
    if kind == "em-constrained":
        if theta is None or phi is None:
            t, p = constrained_draws(1, seed)[0]
            theta = t if theta is None else theta
            phi = p if phi is None else phi
        return constrained_attack(theta, phi, phase)
    if kind == "em-cnot":
        return EntangleMeasure(build_cnot_probe(), identity_ue(), phase=phase, name="em-cnot")
    if kind == "em-violating":
        theta = 1.0 if theta is None else theta
        return EntangleMeasure(build_violating_ue(theta), identity_ue(), phase=phase,
                               name="em-violating")
    raise ConfigError(f"unknown attack type {kind!r}")


# ---------------------------------------------------------------- commands


def cmd_run(args):
    config = ProtocolConfig(L=args.L, sampling=Sampling(args.sampling), seed=args.seed)
    attack = build_attack(args.attack, args.phase, args.seed)
    out = run_protocol(args.pa, args.pb, config, attack)
    result = out.to_dict(include_transcript=args.transcript)
    result["attack"] = None if attack is None else attack.label
    echo = config.to_dict()
    echo.update(attack=args.attack, phase=args.phase if attack else None)
    return echo, result, EXIT_OK if out.completed else EXIT_ABORT


def _attack_phase(attack, phase, args):
    est = detection_rate_mc(attack, phase, args.episodes, args.seed,
                            collect_probe=isinstance(attack, EntangleMeasure))
    row = est.to_dict()
    if est.reference is not None:
        row["reference_check"] = _flag(est.within(est.reference))
    if est.oracle is not None:
        row["oracle_check"] = _flag(est.within(est.oracle))
    if isinstance(attack, InterceptResend):
        cf = detection_closed_form(attack, args.L)
        row["closed_form"] = {"L": args.L, "units": cf.units, "per_unit": _frac(cf.per_unit),
                              "overall": cf.overall}
    if isinstance(attack, MeasureResend) or getattr(attack, "name", "") == "em-cnot":
        p_star = measure_resend_oracle(phase)[0]
        first = next(iter(est.per_case))
        n, d = est.per_case[first]
        others = sum(v[1] for c, v in est.per_case.items() if c is not first)
        row["both_reflect"] = {"rate": d / n if n else None, "p_star": _frac(p_star),
                               "other_case_detections": others}
    if est.probe is not None:
        row["leakage_fidelity"] = {
            c: probe_distinguishability(est.probe, c) for c in CONDITIONING[phase]
        }
    return row


def cmd_attack(args):
    if args.type.startswith("em-") and args.phase is None:
        phases = (Phase.S1, Phase.S3)
    else:
        phases = (Phase(args.phase or "s1"),)
    if args.episodes < 1:
        raise ConfigError("--episodes must be positive")
    theta, phi = args.theta, args.phi
    if args.type == "em-constrained":
        theta, phi = _em_params(args)
    elif args.type == "em-violating" and theta is None:
        theta = 1.0
    result = {}
    for phase in phases:
        attack = build_attack(args.type, phase, args.seed, theta, phi)
        result[phase.value] = _attack_phase(attack, phase, args)
    if args.type in ("em-constrained", "em-violating"):
        result["parameters"] = {"theta": theta, "phi": phi}
    echo = {"type": args.type, "phase": args.phase, "episodes": args.episodes, "L": args.L,
            "seed": args.seed}
    return echo, result, EXIT_OK


def _em_params(args):
    t, p = constrained_draws(1, args.seed)[0]
    return (t if args.theta is None else args.theta, p if args.phi is None else args.phi)


def cmd_efficiency(args):
    rows = [r.to_dict() for r in efficiency_catalog()]
    return {}, {"catalog": rows}, EXIT_OK


def cmd_verify(args):
    report = run_verify(args.level, args.seed)
    return {"level": args.level}, report.to_dict(), EXIT_OK if report.passed else EXIT_ERROR


# ---------------------------------------------------------------- plumbing


def build_parser():
    p = _Parser(prog="sqpc", description="Semiquantum private comparison simulator.")
    p.add_argument("--version", action="version", version=f"sqpc {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, seed=True):
        fmt = sp.add_mutually_exclusive_group()
        fmt.add_argument("--json", dest="pretty", action="store_false", help="JSON output (default)")
        fmt.add_argument("--pretty", dest="pretty", action="store_true", help="human-readable output")
        sp.set_defaults(pretty=False)
        sp.add_argument("--out", help="also write the JSON report to this file")
        if seed:
            sp.add_argument("--seed", type=int, default=0, help="master seed")

    run = sub.add_parser("run", help="execute the protocol once")
    run.add_argument("--L", type=int, required=True)
    run.add_argument("--pa", required=True, help="Alice's private bitstring")
    run.add_argument("--pb", required=True, help="Bob's private bitstring")
    run.add_argument("--sampling", choices=[s.value for s in Sampling], default="quota")
    run.add_argument("--attack", choices=("none", *ATTACK_TYPES[:6], "em-cnot"), default="none")
    run.add_argument("--phase", choices=("s1", "s3"), default="s1", help="phase attacked")
    run.add_argument("--transcript", action="store_true", help="include the message log")
    common(run)
    run.set_defaults(func=cmd_run)

    att = sub.add_parser("attack", help="estimate per-unit detection for an attack")
    att.add_argument("--type", choices=ATTACK_TYPES, required=True)
    att.add_argument("--phase", choices=("s1", "s3"))
    att.add_argument("--episodes", type=int, default=100_000)
    att.add_argument("--L", type=int, default=1, help="run length for the closed-form overall value")
    att.add_argument("--theta", type=float, help="entangle-measure parameter")
    att.add_argument("--phi", type=float, help="second entangle-measure parameter")
    common(att)
    att.set_defaults(func=cmd_attack)

    eff = sub.add_parser("efficiency", help="print the qubit-efficiency catalog")
    common(eff, seed=False)
    eff.set_defaults(func=cmd_efficiency, seed=0)

    ver = sub.add_parser("verify", help="run the self-verification suite")
    ver.add_argument("--level", choices=("quick", "full"), default="quick")
    common(ver)
    ver.set_defaults(func=cmd_verify)
    return p


def render_json(report):
    return json.dumps(report, sort_keys=True, indent=2)


def _pretty_lines(obj, indent=0):
    pad = "  " * indent
    if isinstance(obj, dict):
        for k in obj:
            v = obj[k]
            if isinstance(v, (dict, list)) and v:
                yield f"{pad}{k}:"
                yield from _pretty_lines(v, indent + 1)
            else:
                yield f"{pad}{k}: {v}"
    elif isinstance(obj, list):
        for item in obj:
            if isinstance(item, dict):
                yield f"{pad}-"
                yield from _pretty_lines(item, indent + 1)
            else:
                yield f"{pad}- {item}"
    else:
        yield f"{pad}{obj}"


def render_pretty(report):
    head = [f"sqpc {report['command']}  seed={report['seed']}  ({report['timing_ms']} ms)"]
    result = report["result"]
    if report["command"] == "efficiency":
        width = max(len(r["label"]) for r in result["catalog"])
        body = [f"{r['label']:<{width}}  {r['eta']:>5}   alpha={r['alpha']} beta={r['beta']} "
                f"gamma={r['gamma']}" for r in result["catalog"]]
    else:
        body = list(_pretty_lines(result))
    return "\n".join(head + body)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_ERROR
    start = time.perf_counter()
    try:
        config, result, code = args.func(args)
    except InsufficientSample as exc:
        print(f"sqpc {args.command}: insufficient sample: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ProtocolError, ValueError) as exc:
        print(f"sqpc {args.command}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": args.command,
        "seed": args.seed,
        "config": config,
        "result": result,
        "timing_ms": int(round((time.perf_counter() - start) * 1000)),
    }
    text = render_json(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(render_pretty(report) if args.pretty else text)
    return code


if __name__ == "__main__":
    sys.exit(main())
