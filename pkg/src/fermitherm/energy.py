"""Hartree-Fock and free-energy evaluation plus the mean-field Hamiltonian.

Energy convention: the one-body operator is -Delta - Z/|x| (hydrogen levels
at -Z^2/(4 j^2)).  The exchange term is assembled channel-pairwise through
multipole kernels with squared Wigner-3j angular factors, normalized so
that direct and exchange cancel exactly for a fully occupied rank-one
s orbital.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .angular import exchange_weights
from .entropy import EntropySpec
from .grid import (
    DensityMatrix,
    RadialDensity,
    RadialGrid,
    hartree_potential,
    kinetic_matrix,
    multipole_kernel,
    nuclear_potential,
)

__all__ = [
    "EnergyBreakdown",
    "GridMismatchError",
    "InequalityAuditReport",
    "MeanFieldHamiltonian",
    "OperatorCache",
    "brown_kosaki_terms",
    "free_energy",
    "hardy_positivity_diagnostic",
    "linear_energy_breakdown",
    "hf_energy",
    "inequality_audit",
    "linear_free_energy",
    "mean_field_hamiltonian",
]


class GridMismatchError(ValueError):
    """State and operator cache live on different grids."""


@dataclass(frozen=True)
class EnergyBreakdown:
    """Energy terms in -Delta - Z/|x| units.

    total_hf = kinetic + nuclear + direct - exchange;
    total_free = total_hf + T * entropy_term.
    """

    kinetic: float
    nuclear: float
    direct: float
    exchange: float
    entropy_term: float
    total_hf: float
    total_free: float


def _make_breakdown(kin, nuc, direct, exch, entropy, T) -> EnergyBreakdown:
    hf = kin + nuc + direct - exch
    return EnergyBreakdown(
        kinetic=kin,
        nuclear=nuc,
        direct=direct,
        exchange=exch,
        entropy_term=entropy,
        total_hf=hf,
        total_free=hf + T * entropy,
    )


class OperatorCache:
    """Grid-bound operators reused across energy and Hamiltonian builds.

    Holds the per-channel kinetic matrices, the nuclear diagonal, and the
    angular-combined exchange kernels sum_L A_L(l,l') w_L for each channel
    pair (symmetric in l <-> l').
    """

    def __init__(self, grid: RadialGrid, l_max: int, Z: float):
        self.grid = grid
        self.l_max = l_max
        self.Z = Z
        self.kinetic = [kinetic_matrix(grid, l) for l in range(l_max + 1)]
        self.kinetic_diag = [np.diagonal(k).copy() for k in self.kinetic]
        self.kinetic_off = -1.0 / grid.h**2
        self.v_nuclear = nuclear_potential(grid, Z)
        angular = exchange_weights(l_max)
        self.pair_kernels = {}
        for l in range(l_max + 1):
            for lp in range(l, l_max + 1):
                combined = np.zeros((grid.n_points, grid.n_points))
                for L, a_l in angular[(l, lp)]:
                    combined += a_l * multipole_kernel(grid, L)
                self.pair_kernels[(l, lp)] = combined
        self.w0 = multipole_kernel(grid, 0)

    def pair_kernel(self, l: int, lp: int) -> np.ndarray:
        return self.pair_kernels[(min(l, lp), max(l, lp))]

    def matches(self, gamma: DensityMatrix) -> bool:
        return gamma.grid == self.grid and gamma.l_max <= self.l_max


def _cache_for(gamma: DensityMatrix, Z: float, cache: OperatorCache | None) -> OperatorCache:
    if cache is None:
        return OperatorCache(gamma.grid, gamma.l_max, Z)
    if not cache.matches(gamma) or cache.Z != Z:
        raise GridMismatchError("operator cache does not match the state")
    return cache


def _weighted_diagonal(gamma: DensityMatrix) -> np.ndarray:
    """h * rho_line: multiplicity-weighted diagonal of the blocks."""
    out = np.zeros(gamma.grid.n_points)
    for l, b in enumerate(gamma.blocks):
        out += (2 * l + 1) * np.real(np.diagonal(b))
    return out


def _hf_terms(gamma: DensityMatrix, cache: OperatorCache):
    """(kinetic, nuclear, direct, exchange) of a state, all real."""
    kin = 0.0
    for l, b in enumerate(gamma.blocks):
        kin += (2 * l + 1) * float(np.real(np.einsum("ij,ji->", cache.kinetic[l], b)))
    rho_tilde = _weighted_diagonal(gamma)
    nuc = float(np.dot(cache.v_nuclear, rho_tilde))
    direct = 0.5 * float(rho_tilde @ (cache.w0 @ rho_tilde))
    exch = 0.0
    for l, bl in enumerate(gamma.blocks):
        for lp, blp in enumerate(gamma.blocks):
            kernel = cache.pair_kernel(l, lp)
            exch += 0.5 * float(np.real(np.sum(kernel * bl * np.conj(blp))))
    return kin, nuc, direct, exch


def _entropy_of_blocks(
    gamma: DensityMatrix, spec: EntropySpec, clip_tol: float = 1e-10
) -> float:
    """tr beta(gamma) from per-block eigenvalues, weighted by 2l+1.

    Eigenvalues within clip_tol of [0, 1] are clipped; anything further out
    is a genuine constraint violation and raises.
    """
    total = 0.0
    for l, b in enumerate(gamma.blocks):
        w = np.linalg.eigvalsh(b)
        if w[0] < -clip_tol or w[-1] > 1.0 + clip_tol:
            raise ValueError(
                f"occupation eigenvalues outside [0,1] in channel l={l}: "
                f"[{w[0]:.3e}, {w[-1]:.10f}]"
            )
        total += (2 * l + 1) * float(np.sum(spec.beta(np.clip(w, 0.0, 1.0))))
    return total


def hf_energy(
    gamma: DensityMatrix, Z: float, cache: OperatorCache | None = None
) -> EnergyBreakdown:
    """Hartree-Fock energy; the entropy slot is zero."""
    cache = _cache_for(gamma, Z, cache)
    kin, nuc, direct, exch = _hf_terms(gamma, cache)
    return _make_breakdown(kin, nuc, direct, exch, 0.0, 0.0)


def free_energy(
    gamma: DensityMatrix,
    spec: EntropySpec,
    Z: float,
    T: float,
    cache: OperatorCache | None = None,
) -> EnergyBreakdown:
    """Hartree-Fock energy plus T * tr beta(gamma)."""
    cache = _cache_for(gamma, Z, cache)
    kin, nuc, direct, exch = _hf_terms(gamma, cache)
    entropy = _entropy_of_blocks(gamma, spec)
    return _make_breakdown(kin, nuc, direct, exch, entropy, T)


def linear_energy_breakdown(
    gamma: DensityMatrix,
    spec: EntropySpec,
    Z: float,
    T: float,
    cache: OperatorCache | None = None,
) -> EnergyBreakdown:
    """Breakdown of the linear functional (direct and exchange dropped)."""
    cache = _cache_for(gamma, Z, cache)
    kin = 0.0
    for l, b in enumerate(gamma.blocks):
        kin += (2 * l + 1) * float(np.real(np.einsum("ij,ji->", cache.kinetic[l], b)))
    nuc = float(np.dot(cache.v_nuclear, _weighted_diagonal(gamma)))
    entropy = _entropy_of_blocks(gamma, spec)
    return _make_breakdown(kin, nuc, 0.0, 0.0, entropy, T)


def linear_free_energy(
    gamma: DensityMatrix,
    spec: EntropySpec,
    Z: float,
    T: float,
    cache: OperatorCache | None = None,
) -> float:
    """Free energy with the two-body terms (direct, exchange) dropped."""
    return linear_energy_breakdown(gamma, spec, Z, T, cache).total_free


@dataclass
class MeanFieldHamiltonian:
    """Per-channel blocks H_l = kinetic_l + diag(v_nuclear + v_hartree) - K_l.

    Normalized as the exact gradient of the Hartree-Fock energy: for any
    Hermitian perturbation, dE = sum_l (2l+1) tr(H_l dGamma_l).
    """

    grid: RadialGrid
    blocks: list
    kinetic: list = field(repr=False)
    v_nuclear: np.ndarray = field(repr=False)
    v_hartree: np.ndarray = field(repr=False)
    exchange: list = field(repr=False)


def mean_field_hamiltonian(
    gamma: DensityMatrix, Z: float, cache: OperatorCache | None = None
) -> MeanFieldHamiltonian:
    cache = _cache_for(gamma, Z, cache)
    grid = gamma.grid
    rho_tilde = _weighted_diagonal(gamma)
    v_h = hartree_potential(
        grid, RadialDensity(grid=grid, rho_line=rho_tilde / grid.h)
    )
    v_local = cache.v_nuclear + v_h
    dtype = np.result_type(*[b.dtype for b in gamma.blocks])
    n = grid.n_points
    idx = np.arange(n)
    blocks = []
    exchange_blocks = []
    for l in range(gamma.l_max + 1):
        k_exch = np.zeros((n, n), dtype=dtype)
        for lp, blp in enumerate(gamma.blocks):
            k_exch += cache.pair_kernel(l, lp) * blp
        k_exch /= 2 * l + 1
        # kinetic is tridiagonal: assemble H in place on top of -K_exch
        h_block = -k_exch
        h_block[idx, idx] += cache.kinetic_diag[l] + v_local
        h_block[idx[:-1], idx[:-1] + 1] += cache.kinetic_off
        h_block[idx[:-1] + 1, idx[:-1]] += cache.kinetic_off
        blocks.append(h_block)
        exchange_blocks.append(k_exch)
    return MeanFieldHamiltonian(
        grid=grid,
        blocks=blocks,
        kinetic=cache.kinetic[: gamma.l_max + 1],
        v_nuclear=cache.v_nuclear,
        v_hartree=v_h,
        exchange=exchange_blocks,
    )


def hardy_positivity_diagnostic(grid: RadialGrid, l: int = 0) -> float:
    """Smallest eigenvalue of r(-d^2/dr^2) + (-d^2/dr^2) r on the grid.

    The continuum operator is nonnegative (a Hardy-type positivity),
    but the discrete stencil may dip below zero near the origin; the
    value is reported as a diagnostic and never asserted anywhere.
    """
    k = kinetic_matrix(grid, l)
    r_mat = grid.r[:, None] * k
    sym = r_mat + r_mat.T
    return float(np.linalg.eigvalsh(sym)[0])


def _cutoff_profile(s: np.ndarray) -> np.ndarray:
    """Smooth [0,1]-valued cutoff: 1 inside, cos^2 ramp on 1 < s < 2."""
    out = np.ones_like(s)
    ramp = (s > 1.0) & (s < 2.0)
    out[ramp] = np.cos(0.5 * np.pi * (s[ramp] - 1.0)) ** 2
    out[s >= 2.0] = 0.0
    return out


def brown_kosaki_terms(
    gamma: DensityMatrix, spec: EntropySpec, x_diag: np.ndarray
) -> tuple:
    """(tr beta(X gamma X), tr(X beta(gamma) X)) for a diagonal X with X^2 <= 1."""
    lhs = 0.0
    rhs = 0.0
    for l, b in enumerate(gamma.blocks):
        cut = x_diag[:, None] * b * x_diag[None, :]
        w_cut = np.clip(np.linalg.eigvalsh(cut), 0.0, 1.0)
        lhs += (2 * l + 1) * float(np.sum(spec.beta(w_cut)))
        w, vecs = np.linalg.eigh(b)
        beta_diag = np.real(
            np.einsum(
                "ik,k,ik->i", vecs, spec.beta(np.clip(w, 0.0, 1.0)), np.conj(vecs)
            )
        )
        rhs += (2 * l + 1) * float(np.dot(x_diag**2, beta_diag))
    return lhs, rhs


@dataclass(frozen=True)
class AuditCheck:
    name: str
    passed: bool
    lhs: float
    rhs: float


@dataclass(frozen=True)
class InequalityAuditReport:
    checks: tuple

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def by_name(self, name: str) -> AuditCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def inequality_audit(
    gamma: DensityMatrix,
    spec: EntropySpec,
    Z: float,
    T: float,
    cache: OperatorCache | None = None,
    tol: float = 1e-9,
) -> InequalityAuditReport:
    """Numeric audit of the proven inequalities; failures are entries, not errors.

    (a) exchange <= direct; (b) coercivity total_hf >= kinetic/2 - 2 Z^2 q;
    (c) entropy monotonicity under [0,1]-valued diagonal cutoffs
        tr beta(X gamma X) <= tr(X beta(gamma) X) at three radii.
    """
    cache = _cache_for(gamma, Z, cache)
    kin, nuc, direct, exch = _hf_terms(gamma, cache)
    total_hf = kin + nuc + direct - exch
    q = gamma.trace()
    checks = [
        AuditCheck("exchange_le_direct", exch <= direct + tol, exch, direct),
        AuditCheck(
            "coercivity",
            total_hf >= 0.5 * kin - 2.0 * Z * Z * q - tol,
            total_hf,
            0.5 * kin - 2.0 * Z * Z * q,
        ),
    ]
    r = gamma.grid.r
    for r_cut in (gamma.grid.r_max / 8.0, gamma.grid.r_max / 4.0, gamma.grid.r_max / 2.0):
        x_diag = _cutoff_profile(r / r_cut)
        lhs, rhs = brown_kosaki_terms(gamma, spec, x_diag)
        checks.append(
            AuditCheck(f"brown_kosaki_R={r_cut:g}", lhs <= rhs + tol, lhs, rhs)
        )
    return InequalityAuditReport(checks=tuple(checks))
