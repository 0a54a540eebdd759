"""Generalized Pauli (Weyl-Heisenberg) operators on an N-dimensional register.

X_a shifts the standard basis by the field element a, Z_b multiplies
|j> by the additive character omega_p^Tr(b*j).  Labels compose exactly
(phases kept as rational exponents of omega_p); dense complex matrices
are only produced on demand.  Basis states are indexed by the integer
encoding of GF(N) elements, zero first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import GF


@dataclass(frozen=True)
class PauliLabel:
    """A scalar multiple of X_a Z_b.

    The operator denoted is omega_p^(phase_num/phase_den) X_a Z_b with
    phase_den in {1, 2}; half-integral exponents occur only for p = 2,
    where omega_2^(1/2) is fixed to +i.
    """

    a: int
    b: int
    phase_num: int = 0
    phase_den: int = 1

    def __post_init__(self):
        if self.phase_den not in (1, 2):
            raise ValueError("phase denominator must be 1 or 2")

    @staticmethod
    def identity() -> "PauliLabel":
        return PauliLabel(0, 0, 0, 1)


def normalize_phase(p: int, num: int, den: int) -> tuple[int, int]:
    """Reduce a phase exponent num/den modulo p (den in {1, 2})."""
    if den == 2 and num % 2 == 0:
        num, den = num // 2, 1
    return num % (p * den), den


def phase_value(p: int, num: int, den: int) -> complex:
    """Complex value of omega_p^(num/den) with the +i branch for p = 2."""
    return np.exp(2j * np.pi * num / (p * den))


def add_phases(p: int, ph1: tuple[int, int], ph2: tuple[int, int]) -> tuple[int, int]:
    n1, d1 = ph1
    n2, d2 = ph2
    d = max(d1, d2)
    num = n1 * (d // d1) + n2 * (d // d2)
    return normalize_phase(p, num, d)


def pauli_matrix(gf: GF, label: PauliLabel) -> np.ndarray:
    """Dense N x N complex matrix of the labelled operator."""
    N, p = gf.N, gf.p
    gf._check(label.a, label.b)
    ph = phase_value(p, *normalize_phase(p, label.phase_num, label.phase_den))
    m = np.zeros((N, N), dtype=np.complex128)
    omega = np.exp(2j * np.pi / p)
    for j in range(N):
        m[gf.add(label.a, j), j] = ph * omega ** gf.trace(gf.mul(label.b, j))
    return m


def pauli_compose(gf: GF, P: PauliLabel, Q: PauliLabel) -> PauliLabel:
    """Label of the operator product P * Q.

    Commuting Z_bP past X_aQ contributes omega_p^Tr(aQ * bP)
    (Weyl commutation), on top of the two carried phases.
    """
    gf._check(P.a, P.b, Q.a, Q.b)
    num, den = add_phases(
        gf.p,
        normalize_phase(gf.p, P.phase_num, P.phase_den),
        normalize_phase(gf.p, Q.phase_num, Q.phase_den),
    )
    num, den = add_phases(gf.p, (num, den), (gf.trace(gf.mul(Q.a, P.b)), 1))
    return PauliLabel(gf.add(P.a, Q.a), gf.add(P.b, Q.b), num, den)


def bell_state(gf: GF, a: int, b: int) -> np.ndarray:
    """The N^2-dim Bell-like state sum_i omega_p^Tr(i b) |i, i+a> / sqrt(N)."""
    gf._check(a, b)
    N = gf.N
    omega = np.exp(2j * np.pi / gf.p)
    v = np.zeros(N * N, dtype=np.complex128)
    for i in range(N):
        v[i * N + gf.add(i, a)] = omega ** gf.trace(gf.mul(i, b))
    return v / np.sqrt(N)


def projector_standard_diff(gf: GF, a: int) -> np.ndarray:
    """Projector onto pairs whose standard-basis outcomes differ by *a*."""
    gf._check(a)
    N = gf.N
    m = np.zeros((N * N, N * N), dtype=np.complex128)
    for i in range(N):
        k = i * N + gf.add(i, a)
        m[k, k] = 1.0
    return m
