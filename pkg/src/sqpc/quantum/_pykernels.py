"""Pure-numpy fallback for the compiled state-vector kernels.

Signatures and sampling semantics mirror ``_ckernels`` exactly so that either
backend can be swapped in at import time.
"""
import math

import numpy as np


def apply_matrix(amps, base, off, mat):
    idx = base[:, None] + off[None, :]
    amps[idx] = amps[idx] @ mat.T


def _coefficients(amps, base, off, basis):
    idx = base[:, None] + off[None, :]
    return idx, amps[idx] @ basis.conj().T


def outcome_probabilities(amps, base, off, basis):
    _, coeff = _coefficients(amps, base, off, basis)
    return [float(p) for p in (coeff.real**2 + coeff.imag**2).sum(axis=0)]


def measure(amps, base, off, basis, u, cutoff):
    idx, coeff = _coefficients(amps, base, off, basis)
    probs = [float(p) for p in (coeff.real**2 + coeff.imag**2).sum(axis=0)]
    probs = [0.0 if p < cutoff else p for p in probs]
    total = sum(probs)
    if total < cutoff:
        raise ArithmeticError("degenerate state norm during measurement")
    target = u * total
    cum = 0.0
    chosen = -1
    for j, p in enumerate(probs):
        if p == 0.0:
            continue
        cum += p
        chosen = j
        if target < cum:
            break
    c = coeff[:, chosen] / math.sqrt(probs[chosen])
    amps[idx] = np.outer(c, basis[chosen])
    return chosen
