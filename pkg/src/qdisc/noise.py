"""Two-qubit noise channels in Kraus form and noisy discrimination error probabilities.

The noisy pipeline is: prepare phi+, apply the noise to both qubits,
then possibly apply the perturbation to the first qubit, then measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from qdisc import bayes
from qdisc.core import (
    I2,
    PAULI,
    DimensionError,
    DomainError,
    as_operator,
    bell_state,
    perturb,
)

LABELS = ("bit_flip", "phase_flip", "bit_phase_flip", "depolarizing")


@dataclass(frozen=True)
class KrausChannel:
    operators: tuple[np.ndarray, ...]
    label: str

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def completeness_error(self) -> float:
        total = sum(e.conj().T @ e for e in self.operators)
        return float(np.abs(total - np.eye(self.dim)).max())

    def __call__(self, rho) -> np.ndarray:
        return apply_channel(rho, self)


def _probability(x: float, name: str) -> float:
    x = float(x)
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"{name} = {x!r} is not a probability")
    return x


def _pauli_pair_flip(p: float, q: float, axis: int, label: str) -> KrausChannel:
    # p and q weight the *identity* on the first and second qubit respectively
    p = _probability(p, "p")
    q = _probability(q, "q")
    s = PAULI[axis]
    ops = (
        math.sqrt(p * q) * np.kron(I2, I2),
        math.sqrt(p * (1 - q)) * np.kron(I2, s),
        math.sqrt((1 - p) * q) * np.kron(s, I2),
        math.sqrt((1 - p) * (1 - q)) * np.kron(s, s),
    )
    return KrausChannel(ops, label)


def bit_flip_channel(p: float, q: float) -> KrausChannel:
    return _pauli_pair_flip(p, q, 1, "bit_flip")


def phase_flip_channel(p: float, q: float) -> KrausChannel:
    return _pauli_pair_flip(p, q, 3, "phase_flip")


def bit_phase_flip_channel(p: float, q: float) -> KrausChannel:
    return _pauli_pair_flip(p, q, 2, "bit_phase_flip")


def depolarizing_channel(p: float) -> KrausChannel:
    """Kraus form of rho -> (p/4) I + (1 - p) rho on two qubits.

    Uses the uniform twirl over the 16 Pauli pairs (each with weight p/16),
    which maps any state to I/4, plus the remaining 1 - p on the identity.
    """
    p = _probability(p, "p")
    ops = []
    for i in range(4):
        for j in range(4):
            w = p / 16 + (1 - p if i == j == 0 else 0.0)
            ops.append(math.sqrt(w) * np.kron(PAULI[i], PAULI[j]))
    return KrausChannel(tuple(ops), "depolarizing")


def make_channel(label: str, params: Sequence[float]) -> KrausChannel:
    params = tuple(params)
    if label == "depolarizing":
        if len(params) != 1:
            raise DomainError("depolarizing noise takes one parameter p")
        return depolarizing_channel(*params)
    makers = {
        "bit_flip": bit_flip_channel,
        "phase_flip": phase_flip_channel,
        "bit_phase_flip": bit_phase_flip_channel,
    }
    if label not in makers:
        raise DomainError(f"unknown noise {label!r}; expected one of {LABELS}")
    if len(params) != 2:
        raise DomainError(f"{label} noise takes two parameters p, q")
    return makers[label](*params)


def apply_channel(rho, channel: KrausChannel) -> np.ndarray:
    rho = as_operator(rho, "state")
    if rho.shape[0] != channel.dim:
        raise DimensionError(f"channel acts on dimension {channel.dim}, state has {rho.shape[0]}")
    return sum(e @ rho @ e.conj().T for e in channel.operators)


def noisy_pair(channel: KrausChannel, lam: float, rho0=None, axis: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """(noisy state, noisy-then-perturbed state) for the noisy pipeline."""
    rho0 = bell_state("phi+") if rho0 is None else rho0
    noisy = apply_channel(rho0, channel)
    return noisy, perturb(noisy, lam, axis)


def pipeline_pe(label: str, params: Sequence[float], lam: float, rho0=None) -> float:
    """Error probability of the noisy pipeline computed by direct diagonalization."""
    noisy, perturbed = noisy_pair(make_channel(label, params), lam, rho0)
    return bayes.helstrom_pe(noisy, perturbed).pe


def pe_noisy(label: str, params: Sequence[float], lam: float) -> float:
    """Closed-form equal-prior error probability for a phi+ probe under noise."""
    params = tuple(params)
    s = abs(math.sin(lam))
    if label == "depolarizing":
        if len(params) != 1:
            raise DomainError("depolarizing noise takes one parameter p")
        p = _probability(params[0], "p")
        return 0.5 * (1.0 - (1 - p) * s)
    if label not in LABELS:
        raise DomainError(f"unknown noise {label!r}; expected one of {LABELS}")
    if len(params) != 2:
        raise DomainError(f"{label} noise takes two parameters p, q")
    p = _probability(params[0], "p")
    q = _probability(params[1], "q")
    if label == "bit_flip":
        return 0.5 * (1.0 - abs((2 * p - 1) * (2 * q - 1)) * s)
    # phase and bit-phase flips only mix states the perturbation cannot tell apart
    return 0.5 * (1.0 - s)


def phase_flip_weights(p: float, q: float) -> tuple[float, float]:
    """Weights of phi+ and phi- after phase-flip noise on phi+.

    The second weight follows from trace preservation, p + q - 2pq.
    """
    p = _probability(p, "p")
    q = _probability(q, "q")
    w0 = p * q + (1 - p) * (1 - q)
    return w0, 1.0 - w0
