"""Compare the compiled and numpy kernel backends.

Times the three raw kernels on a 4-qubit state with a 2-dim probe, then
end-to-end episode throughput of the detection estimator and honest
protocol runs.  Usage::

    python3 benchmarks/bench_backends.py [--repeat N] [--json]
"""
import argparse
import json
import timeit

import numpy as np

from sqpc.adversary import InterceptResend
from sqpc.analysis import detection_rate_mc
from sqpc.protocol import Phase, ProtocolConfig, run_protocol
from sqpc.quantum import BELL_BASIS, FMB_BASIS, available_backends, backend, use_backend
from sqpc.quantum.state import gather_indices


def _kernel_cases():
    amps = np.full(32, 1 / np.sqrt(32), dtype=complex)
    bell = gather_indices(4, 2, (2, 3))
    fmb = gather_indices(4, 2, (0, 1, 2, 3))
    mat = np.kron(np.eye(2), np.array([[0, 1], [1, 0]], dtype=complex))
    k = lambda: backend.kernels  # noqa: E731, resolved after the backend switch

    return {
        "apply_matrix(2q)": lambda: k().apply_matrix(amps.copy(), *bell, mat),
        "outcome_probabilities(bell)": lambda: k().outcome_probabilities(amps, *bell, BELL_BASIS),
        "measure(fmb)": lambda: k().measure(amps.copy(), *fmb, FMB_BASIS, 0.3, 1e-12),
    }


def _workloads():
    cfg = ProtocolConfig(L=4, seed=1)
    return {
        "s1 IR episodes x2000": lambda: detection_rate_mc(
            InterceptResend(1, Phase.S1), Phase.S1, 2000, 3),
        "s3 IR episodes x2000": lambda: detection_rate_mc(
            InterceptResend(1, Phase.S3), Phase.S3, 2000, 3),
        "honest runs L=4 x50": lambda: [
            run_protocol("0101", "0110", cfg, run_index=i) for i in range(50)],
    }


def bench(repeat):
    rows = []
    for name in available_backends():
        use_backend(name)
        for label, fn in _kernel_cases().items():
            n = 2000
            t = min(timeit.repeat(fn, number=n, repeat=repeat)) / n
            rows.append({"backend": name, "case": label, "seconds": t})
        for label, fn in _workloads().items():
            t = min(timeit.repeat(fn, number=1, repeat=repeat))
            rows.append({"backend": name, "case": label, "seconds": t})
    use_backend("compiled" if "compiled" in available_backends() else "python")
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()
    rows = bench(args.repeat)
    if args.json:
        print(json.dumps(rows, indent=2))
        return
    by_case = {}
    for r in rows:
        by_case.setdefault(r["case"], {})[r["backend"]] = r["seconds"]
    print(f"{'case':32} {'python':>12} {'compiled':>12} {'speedup':>8}")
    for case, t in by_case.items():
        py, c = t.get("python"), t.get("compiled")
        speed = f"{py / c:7.1f}x" if py and c else "     n/a"
        fmt = lambda x: f"{x * 1e6:10.1f}us" if x is not None and x < 1e-2 else (  # noqa: E731
            f"{x:11.3f}s" if x is not None else f"{'-':>12}")
        print(f"{case:32} {fmt(py)} {fmt(c)} {speed}")


if __name__ == "__main__":
    main()
