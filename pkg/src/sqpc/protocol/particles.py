"""Travelling-particle tokens.

A token in flight is either a ``Slot`` (a qubit of one of TP's registers) or a
``Fake`` (a classical Z-basis state Eve injected).  Parties act on tokens only
through the helpers below, so the same code path serves honest and attacked
runs.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..quantum import prepare_chi00
from .types import ProtocolError


class ChiSystem:
    """One of TP's four-qubit registers; ``state`` may later grow a probe."""

    __slots__ = ("index", "state")

    def __init__(self, index, state=None):
        self.index = index
        self.state = prepare_chi00() if state is None else state

    def __repr__(self):
        return f"ChiSystem({self.index})"


@dataclass(frozen=True)
class Slot:
    system: ChiSystem
    qubit: int


@dataclass(frozen=True)
class Fake:
    bit: int


def z_measure(token, rng):
    if isinstance(token, Fake):
        return token.bit
    return token.system.state.measure_z(token.qubit, rng)


def prepare_fresh(token, found, bit):
    """Replace a just-measured token (Z result ``found``) by a fresh ``|bit⟩``.

    A measured slot is already a product factor ``|found⟩``, so re-preparing
    it in place is equivalent to discarding it and emitting a new qubit.
    """
    if isinstance(token, Fake):
        return Fake(bit)
    if found != bit:
        token.system.state.apply_pauli(token.qubit, 1)
    return token


def load_into(system, qubit, token, rng):
    """Put a returned token back into ``system`` at ``qubit`` for a joint check."""
    if isinstance(token, Fake):
        # the genuine qubit never came back: trace it out, insert the fake
        system.state.reset_qubit(qubit, token.bit, rng)
        return
    if token.system is not system or token.qubit != qubit:
        raise ProtocolError(f"particle {token} returned in place of {system}[{qubit}]")


def is_genuine(token):
    return isinstance(token, Slot)


__all__ = ["ChiSystem", "Slot", "Fake", "z_measure", "prepare_fresh", "load_into", "is_genuine"]
