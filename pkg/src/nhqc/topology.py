"""Spectral winding numbers of the ring Hamiltonian around parameter loops.

For a base energy E_B and a loop parameter nu (the hopping phase theta or the
potential phase phi), the winding number is the total continuous change of
arg det(H(nu) - E_B) over nu in [0, 2*pi), divided by 2*pi*L. On a
commensurate ring the determinant is exactly periodic in nu with period
2*pi/L (a theta shift by 2*pi/L is a gauge transformation; a phi shift by
2*pi*alpha is a ring translation when alpha = p/L), so by default the phase
is continued over one sub-period only and scaled by L. Sampling is bisected
adaptively until every consecutive phase jump is below pi/2.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .errors import WindingError
from .model import AlphaMode, LatticeParams, build_hamiltonian
from .spectral import log_det

QUANTIZATION_TOL = 0.1  # accepted results must round to an integer this closely


class LoopParameter(Enum):
    THETA = "theta"
    PHI = "phi"


@dataclass(frozen=True)
class WindingRequest:
    params: LatticeParams
    nu_name: LoopParameter
    base_energy: complex
    initial_samples: int = 256
    max_refinements: int = 16

    def __post_init__(self):
        if self.initial_samples < 8:
            raise ValueError(f"initial_samples must be >= 8, got {self.initial_samples}")
        if self.max_refinements < 1:
            raise ValueError(f"max_refinements must be >= 1, got {self.max_refinements}")
        if not (math.isfinite(self.base_energy.real) and math.isfinite(self.base_energy.imag)):
            raise ValueError("base_energy must be finite")


@dataclass
class WindingResult:
    winding: int
    raw_phase: float  # accumulated arg change over the full 2*pi loop, radians
    samples_used: int
    quantization_error: float  # |raw_phase/(2*pi*L) - winding|
    loop_reduction: int = 1  # phase was continued over [0, 2*pi/loop_reduction]


def _loop_arg(params: LatticeParams, nu_name: LoopParameter, nu: float, E_B: complex) -> float:
    if nu_name is LoopParameter.THETA:
        p = replace(params, theta=nu)
    else:
        p = replace(params, phi=nu)
    H = build_hamiltonian(p)
    H[np.arange(params.L), np.arange(params.L)] -= E_B
    log_abs, arg = log_det(H)
    if log_abs == -math.inf:
        raise WindingError(
            f"det(H({nu_name.value}) - E_B) vanished at {nu_name.value}={nu:.12g}; "
            "base energy collides with an eigenvalue",
            nu=nu,
        )
    return arg


def _wrap(d: np.ndarray) -> np.ndarray:
    return (d + math.pi) % (2.0 * math.pi) - math.pi


def winding_number(req: WindingRequest, exploit_periodicity: bool = True) -> WindingResult:
    """Winding of det(H(nu) - E_B) around the nu loop, in units of 2*pi*L.

    The determinant's sub-period reduction is applied when it is exact:
    always for theta loops, and for phi loops in rational-approximant mode.
    Raises WindingError on an eigenvalue collision with the base energy or
    when the refinement budget is exhausted before all phase jumps drop
    below pi/2.
    """
    params = req.params
    L = params.L
    reduction = 1
    if exploit_periodicity:
        if req.nu_name is LoopParameter.THETA:
            reduction = L
        elif params.alpha_mode is AlphaMode.RATIONAL_APPROXIMANT:
            reduction = L
    nu0 = params.theta if req.nu_name is LoopParameter.THETA else params.phi
    span = 2.0 * math.pi / reduction

    nus = list(np.linspace(nu0, nu0 + span, req.initial_samples + 1))
    args = [_loop_arg(params, req.nu_name, nu, req.base_energy) for nu in nus]

    for _ in range(req.max_refinements):
        diffs = _wrap(np.diff(np.asarray(args)))
        bad = np.flatnonzero(np.abs(diffs) > math.pi / 2.0)
        if bad.size == 0:
            break
        # bisect offending intervals, from the right so indices stay valid
        for i in bad[::-1]:
            mid = 0.5 * (nus[i] + nus[i + 1])
            nus.insert(i + 1, mid)
            args.insert(i + 1, _loop_arg(params, req.nu_name, mid, req.base_energy))
    else:
        diffs = _wrap(np.diff(np.asarray(args)))
        worst = float(np.max(np.abs(diffs)))
        raise WindingError(
            f"refinement budget exhausted after {req.max_refinements} passes: "
            f"{int(np.sum(np.abs(diffs) > math.pi / 2.0))} intervals still jump "
            f"by more than pi/2 (worst {worst:.3f} rad) with {len(nus)} samples"
        )

    sub_phase = float(np.sum(_wrap(np.diff(np.asarray(args)))))
    raw_phase = reduction * sub_phase
    value = raw_phase / (2.0 * math.pi * L)
    winding = int(round(value))
    return WindingResult(
        winding=winding,
        raw_phase=raw_phase,
        samples_used=len(nus),
        quantization_error=abs(value - winding),
        loop_reduction=reduction,
    )


@dataclass
class WindingMap:
    """Winding numbers over a rectangular grid of base energies."""

    grid: np.ndarray  # complex base energies, any 2-D shape
    winding: np.ndarray  # int, same shape; valid only where ok
    quantization_error: np.ndarray
    ok: np.ndarray  # False where winding_number failed


def winding_map(
    params: LatticeParams,
    nu_name: LoopParameter,
    grid: np.ndarray,
    initial_samples: int = 64,
    max_refinements: int = 16,
    workers: int = 1,
) -> WindingMap:
    """Evaluate winding_number at every grid point; failures are recorded, not raised."""
    grid = np.asarray(grid, dtype=complex)
    winding = np.zeros(grid.shape, dtype=int)
    qerr = np.full(grid.shape, np.nan)
    ok = np.zeros(grid.shape, dtype=bool)

    def one(eb: complex):
        req = WindingRequest(
            params=params,
            nu_name=nu_name,
            base_energy=eb,
            initial_samples=initial_samples,
            max_refinements=max_refinements,
        )
        try:
            return winding_number(req)
        except WindingError:
            return None

    flat = grid.ravel()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, flat))
    else:
        results = [one(eb) for eb in flat]
    for idx, res in enumerate(results):
        pos = np.unravel_index(idx, grid.shape)
        if res is not None:
            winding[pos] = res.winding
            qerr[pos] = res.quantization_error
            ok[pos] = True
    return WindingMap(grid=grid, winding=winding, quantization_error=qerr, ok=ok)


def loop_centroids(
    eigenvalues: np.ndarray,
    im_tol: float,
    min_size: int = 6,
    link_factor: float = 3.0,
    off_axis: bool = True,
) -> list[complex]:
    """Interior probe points of the closed complex-energy loops in a spectrum.

    Eigenvalues with |Im E| > im_tol are clustered by single linkage with a
    cutoff of link_factor times the median nearest-neighbor spacing; clusters
    with at least min_size members count as loops. With off_axis (default)
    each probe sits halfway between the loop's top point and the real axis,
    which keeps it strictly inside the loop while staying clear of the real
    axis, where real-energy trajectories sweep during phi loops and would
    collide with a plain centroid (the loops are conjugation-symmetric, so
    their centroids land on the axis). off_axis=False returns raw centroids.
    Probes are sorted by real part.
    """
    ev = np.asarray(eigenvalues)
    pts = ev[np.abs(ev.imag) > im_tol]
    if pts.size < min_size:
        return []
    dist = np.abs(pts[:, None] - pts[None, :])
    np.fill_diagonal(dist, np.inf)
    nearest = dist.min(axis=1)
    cutoff = link_factor * float(np.median(nearest))

    parent = list(range(pts.size))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    rows, cols = np.nonzero(dist <= cutoff)
    for a, b in zip(rows, cols):
        ra, rb = find(int(a)), find(int(b))
        if ra != rb:
            parent[ra] = rb

    clusters: dict[int, list[int]] = {}
    for i in range(pts.size):
        clusters.setdefault(find(i), []).append(i)
    probes = []
    for members in clusters.values():
        if len(members) < min_size:
            continue
        zs = pts[members]
        if off_axis:
            top = zs[np.argmax(np.abs(zs.imag))]
            probes.append(complex(top.real, 0.5 * top.imag))
        else:
            probes.append(complex(zs.mean()))
    return sorted(probes, key=lambda z: (z.real, z.imag))
