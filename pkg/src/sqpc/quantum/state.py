"""Dense state vectors for up to four protocol qubits plus an adversary probe.

Basis convention: for ``n`` qubits and a probe of dimension ``d`` the ket
``|q0 q1 ... q(n-1)>|e>`` sits at flat index
``(q0 * 2**(n-1) + ... + q(n-1)) * d + e``.  Qubit indices in this package are
0-based, so qubit 0 is the first particle of a chi-type state.
"""
from __future__ import annotations

import enum
import math
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from . import backend

PROBE = "probe"

# Qubits carrying the Pauli labels (y, z) of the four-particle measurement basis.
# Paulis on particles 1 and 3 do not give a basis (X1 X3 stabilises chi00, so
# only eight distinct states arise); particles 1 and 2 do.
FMB_QUBITS = (0, 1)
EQ8_LITERAL_QUBITS = (0, 2)
PROB_CUTOFF = 1e-12
NORM_TOL = 1e-10

SQRT2 = math.sqrt(2.0)
CHI_AMP = 1.0 / (2.0 * SQRT2)

PAULI = (
    np.array([[1, 0], [0, 1]], dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    # |0><1| - |1><0|, i.e. -iY, kept exactly as the protocol defines it
    np.array([[0, 1], [-1, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


class BellOutcome(enum.IntEnum):
    PHI_PLUS = 0
    PHI_MINUS = 1
    PSI_PLUS = 2
    PSI_MINUS = 3

    @property
    def label(self):
        return _BELL_LABELS[self]


_BELL_LABELS = {0: "phi+", 1: "phi-", 2: "psi+", 3: "psi-"}


class FmbOutcome(NamedTuple):
    y: int
    z: int

    @property
    def index(self):
        return 4 * self.y + self.z

    @classmethod
    def from_index(cls, index):
        return cls(index // 4, index % 4)


@lru_cache(maxsize=None)
def gather_indices(num_qubits, probe_dim, targets):
    """Return ``(base, off)`` index arrays addressing ``targets`` in a state.

    ``off`` enumerates the local basis of the targets in the order given
    (first target most significant); ``base`` enumerates every assignment
    of the remaining subsystems.
    """
    dims = [2] * num_qubits + ([probe_dim] if probe_dim > 1 else [])
    strides = [1] * len(dims)
    for k in range(len(dims) - 2, -1, -1):
        strides[k] = strides[k + 1] * dims[k + 1]
    slots = []
    for t in targets:
        if t == PROBE:
            if probe_dim == 1:
                raise ValueError("state has no probe register")
            slots.append(num_qubits)
        else:
            if not 0 <= t < num_qubits:
                raise IndexError(f"qubit {t} out of range for {num_qubits} qubits")
            slots.append(t)
    if len(set(slots)) != len(slots):
        raise ValueError(f"repeated target in {targets}")

    def enumerate_offsets(subset):
        offs = [0]
        for s in subset:
            offs = [o + x * strides[s] for o in offs for x in range(dims[s])]
        return np.array(offs, dtype=np.intp)

    rest = [s for s in range(len(dims)) if s not in slots]
    return enumerate_offsets(rest), enumerate_offsets(slots)


def _as_basis(basis, dim):
    if isinstance(basis, np.ndarray) and basis.dtype == complex and basis.flags.c_contiguous:
        b = basis
    else:
        b = np.ascontiguousarray(basis, dtype=complex)
    if b.ndim != 2 or b.shape[1] != dim:
        raise ValueError(f"basis shape {b.shape} does not match {dim} local amplitudes")
    return b


class StateVector:
    """Amplitudes of ``num_qubits`` qubits tensored with a ``probe_dim`` register.

    Methods named ``apply_*``/``measure_*``/``reset_*`` act in place; the
    module-level functions of the same name return new states.
    """

    __slots__ = ("num_qubits", "probe_dim", "amps")

    def __init__(self, num_qubits, amps, probe_dim=1):
        amps = np.ascontiguousarray(amps, dtype=complex)
        if amps.shape != (2**num_qubits * probe_dim,):
            raise ValueError(
                f"expected {2**num_qubits * probe_dim} amplitudes, got {amps.shape}"
            )
        self.num_qubits = num_qubits
        self.probe_dim = probe_dim
        self.amps = amps

    def __repr__(self):
        return (
            f"StateVector(num_qubits={self.num_qubits}, probe_dim={self.probe_dim}, "
            f"norm={self.norm():.12f})"
        )

    def copy(self):
        return StateVector(self.num_qubits, self.amps.copy(), self.probe_dim)

    def norm(self):
        return float(np.vdot(self.amps, self.amps).real)

    def amplitude(self, bits, probe=0):
        """Amplitude of the computational ket given as a bit string or sequence."""
        if isinstance(bits, str):
            bits = [int(b) for b in bits]
        index = 0
        for b in bits:
            index = 2 * index + int(b)
        return complex(self.amps[index * self.probe_dim + probe])

    def inner(self, other):
        """<self|other>"""
        return complex(np.vdot(self.amps, other.amps))

    def qubit_amps(self):
        """Amplitudes as a ``(2**n, probe_dim)`` array."""
        return self.amps.reshape(2**self.num_qubits, self.probe_dim)

    def apply_matrix(self, targets, matrix):
        base, off = gather_indices(self.num_qubits, self.probe_dim, tuple(targets))
        matrix = np.ascontiguousarray(matrix, dtype=complex)
        if matrix.shape != (len(off), len(off)):
            raise ValueError(
                f"operator shape {matrix.shape} does not match {len(off)} local amplitudes"
            )
        backend.kernels.apply_matrix(self.amps, base, off, matrix)
        return self

    def apply_pauli(self, qubit, op):
        return self.apply_matrix((qubit,), PAULI[int(op)])

    def measure_basis(self, targets, basis, rng):
        """Projective measurement onto the rows of ``basis``; returns the row index."""
        base, off = gather_indices(self.num_qubits, self.probe_dim, tuple(targets))
        basis = _as_basis(basis, len(off))
        return backend.kernels.measure(
            self.amps, base, off, basis, float(rng.random()), PROB_CUTOFF
        )

    def probabilities(self, targets, basis):
        base, off = gather_indices(self.num_qubits, self.probe_dim, tuple(targets))
        basis = _as_basis(basis, len(off))
        return backend.kernels.outcome_probabilities(self.amps, base, off, basis)

    def measure_z(self, qubit, rng):
        return self.measure_basis((qubit,), Z_BASIS, rng)

    def measure_bell(self, pair, rng):
        q0, q1 = pair
        if q0 == q1:
            raise ValueError("Bell measurement needs two distinct qubits")
        return BellOutcome(self.measure_basis((q0, q1), BELL_BASIS, rng))

    def measure_fmb(self, quad, rng):
        if len(set(quad)) != 4:
            raise ValueError("FMB measurement needs four distinct qubits")
        return FmbOutcome.from_index(self.measure_basis(tuple(quad), FMB_BASIS, rng))

    def reset_qubit(self, qubit, bit, rng):
        """Replace ``qubit`` by a fresh ``|bit>``.

        The old qubit is measured in Z and discarded, which is equivalent to
        tracing it out when nothing else ever touches it again.
        """
        found = self.measure_z(qubit, rng)
        if found != bit:
            self.apply_matrix((qubit,), PAULI[1])
        return found

    def with_probe(self, probe_dim):
        """Tensor on a probe register initialised to ``|0>``."""
        if self.probe_dim != 1:
            raise ValueError("state already carries a probe register")
        probe = np.zeros(probe_dim, dtype=complex)
        probe[0] = 1.0
        return StateVector(self.num_qubits, np.kron(self.amps, probe), probe_dim)

    def probe_density(self):
        """Reduced density matrix of the probe register."""
        m = self.qubit_amps()
        return m.T @ m.conj()

    def qubit_density(self):
        """Reduced density matrix of the qubits with the probe traced out."""
        m = self.qubit_amps()
        return m @ m.conj().T


def _state(num_qubits, amps, probe_dim=1):
    return StateVector(num_qubits, np.asarray(amps, dtype=complex), probe_dim)


def prepare_z(bit):
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    return _state(1, [1, 0] if bit == 0 else [0, 1])


_BELL_AMPS = {
    BellOutcome.PHI_PLUS: (1, 0, 0, 1),
    BellOutcome.PHI_MINUS: (1, 0, 0, -1),
    BellOutcome.PSI_PLUS: (0, 1, 1, 0),
    BellOutcome.PSI_MINUS: (0, 1, -1, 0),
}


def bell_state(outcome):
    return _state(2, np.array(_BELL_AMPS[BellOutcome(outcome)]) / SQRT2)


# (ket, sign) terms of the chi-type state
CHI00_TERMS = (
    ("0000", 1),
    ("0011", 1),
    ("1100", 1),
    ("1111", -1),
    ("0101", -1),
    ("0110", 1),
    ("1001", 1),
    ("1010", 1),
)


def prepare_chi00():
    amps = np.zeros(16, dtype=complex)
    for ket, sign in CHI00_TERMS:
        amps[int(ket, 2)] = sign * CHI_AMP
    return _state(4, amps)


def apply_pauli(state, qubit, op):
    if not 0 <= qubit < state.num_qubits:
        raise IndexError(f"qubit {qubit} out of range for {state.num_qubits} qubits")
    return state.copy().apply_pauli(qubit, op)


def fmb_state(y, z, pauli_qubits=FMB_QUBITS):
    """``sigma^y`` and ``sigma^z`` on ``pauli_qubits`` applied to chi00."""
    if y not in range(4) or z not in range(4):
        raise ValueError(f"FMB labels must lie in 0..3, got ({y}, {z})")
    qy, qz = pauli_qubits
    return prepare_chi00().apply_pauli(qy, y).apply_pauli(qz, z)


def tensor(a, b):
    """Tensor product of two probe-free states (``a`` supplies the leading qubits)."""
    if a.probe_dim != 1 or b.probe_dim != 1:
        raise ValueError("tensor() only supports probe-free states")
    return _state(a.num_qubits + b.num_qubits, np.kron(a.amps, b.amps))


def measure_z(state, qubit, rng):
    out = state.copy()
    return out.measure_z(qubit, rng), out


def measure_bell(state, pair, rng):
    out = state.copy()
    return out.measure_bell(pair, rng), out


def measure_fmb(state, quad, rng):
    out = state.copy()
    return out.measure_fmb(quad, rng), out


Z_BASIS = np.eye(2, dtype=complex)
BELL_BASIS = np.array([bell_state(b).amps for b in BellOutcome])
FMB_BASIS = np.array([fmb_state(y, z).amps for y in range(4) for z in range(4)])

_EQ6 = {(0, 0, BellOutcome.PHI_PLUS), (1, 1, BellOutcome.PHI_MINUS),
        (0, 1, BellOutcome.PSI_MINUS), (1, 0, BellOutcome.PSI_PLUS)}
_EQ7 = {(BellOutcome.PHI_PLUS, 0, 0), (BellOutcome.PHI_MINUS, 1, 1),
        (BellOutcome.PSI_MINUS, 0, 1), (BellOutcome.PSI_PLUS, 1, 0)}


def eq6_consistent(z1, z2, bell34):
    """Z values of particles 1, 2 versus the Bell outcome on particles 3, 4."""
    return (int(z1), int(z2), BellOutcome(bell34)) in _EQ6


def eq7_consistent(bell12, z3, z4):
    """Bell outcome on particles 1, 2 versus the Z values of particles 3, 4."""
    return (BellOutcome(bell12), int(z3), int(z4)) in _EQ7


def fidelity(rho, sigma):
    """Uhlmann fidelity ``(tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``."""
    w, v = np.linalg.eigh(rho)
    sqrt_rho = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    inner = sqrt_rho @ sigma @ sqrt_rho
    ev = np.linalg.eigvalsh((inner + inner.conj().T) / 2)
    return float(np.sum(np.sqrt(np.clip(ev, 0.0, None))) ** 2)


def is_unitary(matrix, tol=NORM_TOL):
    matrix = np.asarray(matrix, dtype=complex)
    return bool(
        matrix.ndim == 2
        and matrix.shape[0] == matrix.shape[1]
        and np.allclose(matrix.conj().T @ matrix, np.eye(len(matrix)), atol=tol, rtol=0)
    )


def decompose_eq6():
    """Rebuild the chi-type state from its (Z12) x (Bell34) expansion."""
    terms = ((0, 0, BellOutcome.PHI_PLUS, 1), (1, 1, BellOutcome.PHI_MINUS, 1),
             (0, 1, BellOutcome.PSI_MINUS, -1), (1, 0, BellOutcome.PSI_PLUS, 1))
    amps = np.zeros(16, dtype=complex)
    for z1, z2, bell, sign in terms:
        amps += sign * 0.5 * tensor(tensor(prepare_z(z1), prepare_z(z2)), bell_state(bell)).amps
    return _state(4, amps)


def decompose_eq7():
    """Rebuild the chi-type state from its (Bell12) x (Z34) expansion."""
    terms = ((BellOutcome.PHI_PLUS, 0, 0, 1), (BellOutcome.PHI_MINUS, 1, 1, 1),
             (BellOutcome.PSI_MINUS, 0, 1, -1), (BellOutcome.PSI_PLUS, 1, 0, 1))
    amps = np.zeros(16, dtype=complex)
    for bell, z3, z4, sign in terms:
        amps += sign * 0.5 * tensor(bell_state(bell), tensor(prepare_z(z3), prepare_z(z4))).amps
    return _state(4, amps)


def fmb_gram(pauli_qubits=FMB_QUBITS):
    states = np.array(
        [fmb_state(y, z, pauli_qubits).amps for y in range(4) for z in range(4)]
    )
    return states.conj() @ states.T

