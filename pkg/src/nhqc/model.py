"""Quasiperiodic ring lattices with complex gauge and potential phases.

Builds the dense L x L tight-binding Hamiltonian of a one-dimensional
quasicrystal on a ring (periodic boundary conditions) with

* hopping amplitude ``kappa`` dressed by a complex Peierls phase
  ``h + i*theta`` (``h`` is an imaginary gauge field, i.e. asymmetric
  forward/backward hopping ``kappa*exp(+-h)``),
* an incommensurate on-site potential ``V_n = V(2*pi*alpha*n + phi + i*eps)``
  where ``V(x)`` is a finite sum of cosine harmonics and ``eps`` complexifies
  the potential phase,

and the 2L x 2L one-step operator of the matching discrete-time quantum walk
on two coupled loops (left/right moving amplitudes u, v with beam-splitter
angle ``beta``, gain/loss ``exp(+-h)`` and phase modulation ``exp(-2i*V_n)``
on the u loop).

``alpha`` is either the inverse golden mean or its Fibonacci rational
approximant F_{n-1}/F_n; in the latter case the ring size must be L = F_n so
the potential closes commensurately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

GOLDEN_INVERSE = (math.sqrt(5.0) - 1.0) / 2.0


class AlphaMode(Enum):
    """Choice of incommensuration parameter for the potential."""

    RATIONAL_APPROXIMANT = "rational_approximant"
    IRRATIONAL = "irrational"


def fibonacci_approximant(n: int) -> tuple[int, int]:
    """Return (F_{n-1}, F_n) with the convention F_0 = F_1 = 1.

    Raises ValueError for n < 1.
    """
    if n < 1:
        raise ValueError(f"Fibonacci index must be >= 1, got {n}")
    prev, cur = 1, 1
    for _ in range(n - 1):
        prev, cur = cur, prev + cur
    return prev, cur


def fibonacci_predecessor(L: int) -> int:
    """Return F_{n-1} for L = F_n, or raise ValueError if L is not Fibonacci."""
    prev, cur = 1, 1
    while cur < L:
        prev, cur = cur, prev + cur
    if cur != L:
        raise ValueError(f"L={L} is not a Fibonacci number (F_0=F_1=1 convention)")
    return prev


def lattice_alpha(L: int, alpha_mode: AlphaMode) -> float:
    """Incommensuration ratio used for a ring of L sites."""
    if alpha_mode is AlphaMode.RATIONAL_APPROXIMANT:
        return fibonacci_predecessor(L) / L
    return GOLDEN_INVERSE


@dataclass(frozen=True)
class PotentialSpec:
    """2*pi-periodic real potential V(x) = sum_j amp_j * cos(mult_j * x)."""

    harmonics: tuple[tuple[float, int], ...]

    def __post_init__(self):
        for amp, mult in self.harmonics:
            if not (isinstance(mult, int) and mult > 0):
                raise ValueError(f"harmonic multiplier must be a positive integer, got {mult!r}")
            if not math.isfinite(amp):
                raise ValueError(f"harmonic amplitude must be finite, got {amp!r}")

    @classmethod
    def bichromatic(cls, V1: float, V2: float) -> "PotentialSpec":
        return cls(harmonics=((float(V1), 1), (float(V2), 2)))


def _validate_ring(L: int, alpha_mode: AlphaMode) -> None:
    if L < 2:
        raise ValueError(f"ring needs at least 2 sites, got L={L}")
    if alpha_mode is AlphaMode.RATIONAL_APPROXIMANT:
        fibonacci_predecessor(L)  # raises if L is not Fibonacci


@dataclass(frozen=True)
class LatticeParams:
    """Full parameter set of the continuous-time ring Hamiltonian."""

    L: int
    kappa: float = 1.0
    h: float = 0.0
    theta: float = 0.0
    phi: float = 0.0
    epsilon: float = 0.0
    V1: float = 0.0
    V2: float = 0.0
    alpha_mode: AlphaMode = AlphaMode.RATIONAL_APPROXIMANT

    def __post_init__(self):
        _validate_ring(self.L, self.alpha_mode)

    @property
    def alpha(self) -> float:
        return lattice_alpha(self.L, self.alpha_mode)

    @property
    def potential(self) -> PotentialSpec:
        return PotentialSpec.bichromatic(self.V1, self.V2)


@dataclass(frozen=True)
class WalkParams:
    """Parameters of the discrete-time two-loop walk (beta is the coupler angle)."""

    L: int
    beta: float
    h: float = 0.0
    phi: float = 0.0
    epsilon: float = 0.0
    V1: float = 0.0
    V2: float = 0.0
    alpha_mode: AlphaMode = AlphaMode.RATIONAL_APPROXIMANT

    def __post_init__(self):
        _validate_ring(self.L, self.alpha_mode)
        if not (0.0 <= self.beta <= math.pi / 2.0):
            raise ValueError(f"beta must lie in [0, pi/2], got {self.beta}")

    @property
    def alpha(self) -> float:
        return lattice_alpha(self.L, self.alpha_mode)

    @property
    def potential(self) -> PotentialSpec:
        return PotentialSpec.bichromatic(self.V1, self.V2)


def potential_values(params, spec: PotentialSpec | None = None) -> np.ndarray:
    """On-site values V_n = sum_j amp_j * cos(mult_j * (2*pi*alpha*n + phi) + i*mult_j*eps).

    Accepts LatticeParams or WalkParams. Returns a complex array of length L;
    the imaginary part is identically zero when ``epsilon`` is zero.
    """
    if spec is None:
        spec = params.potential
    n = np.arange(params.L)
    x = 2.0 * math.pi * params.alpha * n + params.phi
    values = np.zeros(params.L, dtype=complex)
    for amp, mult in spec.harmonics:
        values += amp * np.cos(mult * x + 1j * mult * params.epsilon)
    return values


def build_hamiltonian(params: LatticeParams, spec: PotentialSpec | None = None) -> np.ndarray:
    """Dense L x L ring Hamiltonian.

    Row n carries ``kappa*exp(h+i*theta)`` at column n+1 (mod L),
    ``kappa*exp(-h-i*theta)`` at column n-1 (mod L) and ``V_n`` on the
    diagonal. The wrap links (rows 0 and L-1) carry the same gauge factors
    as the bulk, i.e. the gauge is uniform around the ring.
    """
    L = params.L
    forward = params.kappa * np.exp(params.h + 1j * params.theta)
    backward = params.kappa * np.exp(-params.h - 1j * params.theta)
    H = np.zeros((L, L), dtype=complex)
    n = np.arange(L)
    # add.at keeps L=2 correct, where both hops target the same entry
    np.add.at(H, (n, (n + 1) % L), forward)
    np.add.at(H, (n, (n - 1) % L), backward)
    H[n, n] = potential_values(params, spec)
    return H


def build_walk_operator(params: WalkParams, spec: PotentialSpec | None = None) -> np.ndarray:
    """Dense 2L x 2L one-step map of the coupled-loop walk.

    Acts on the stacked state (u_0..u_{L-1}, v_0..v_{L-1}):

        u'_n = (cos(beta) u_{n+1} + i sin(beta) v_{n+1}) * exp(h - 2i V_n)
        v'_n = (cos(beta) v_{n-1} + i sin(beta) u_{n-1}) * exp(-h)

    with periodic site index.
    """
    L = params.L
    c = math.cos(params.beta)
    s = math.sin(params.beta)
    V = potential_values(params, spec)
    u_factor = np.exp(params.h - 2j * V)
    v_factor = math.exp(-params.h)
    U = np.zeros((2 * L, 2 * L), dtype=complex)
    n = np.arange(L)
    up = (n + 1) % L
    dn = (n - 1) % L
    U[n, up] = c * u_factor
    U[n, L + up] = 1j * s * u_factor
    U[L + n, L + dn] = c * v_factor
    U[L + n, dn] = 1j * s * v_factor
    return U
