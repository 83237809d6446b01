"""Atom-phonon vertex: Wannier form factor and the dimensionless coupling.

The per-band coupling at quasimomentum q is

    M(q, j) = q * rho0(q) / sqrt(omega_j(q)) * Sum_alpha |xi_{alpha,z}| e^{-i q rho_alpha^z}

in units of sqrt(hbar g_cp^2 / 2M); the modulus on the z components makes
the value independent of eigenvector sign conventions.  Only motion along
the chain couples: bands with no z polarization drop out.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bands import BandStructure, DEFAULT_CUTOFF_CELLS, DEFAULT_Q_POINTS, band_structure
from .equilibrium import relax_bulk
from .errors import ZeroFrequencyError
from .geometry import ChainSpec, base_offsets

_POLE = 2.0 * np.pi
_POLE_WINDOW = 1e-3


def rho0(q, d: float):
    """Closed-form Wannier density form factor; rho0(0) = 1, rho0(2 pi / d) = 1/2.

    Both removable singularities are evaluated through series-stable sinc
    branches.  Accepts scalars or arrays; even in q.
    """
    x = np.abs(np.asarray(q, dtype=float) * d)
    near_pole = np.abs(x - _POLE) < _POLE_WINDOW
    safe = np.where(near_pole, 0.0, x)
    generic = 4.0 * np.pi**2 * np.sinc(safe / _POLE) / (4.0 * np.pi**2 - safe**2)
    polar = 4.0 * np.pi**2 * np.sinc((x - _POLE) / _POLE) / np.maximum(x * (_POLE + x), 1e-300)
    out = np.where(near_pole, polar, generic)
    if np.ndim(q) == 0:
        return float(out)
    return out


def base_z_offsets(spec: ChainSpec, source: str = "trap") -> np.ndarray:
    """z offsets rho_alpha^z entering the coupling phase factors."""
    offs = base_offsets(spec)[:, 2]
    if source == "trap":
        return offs
    if source == "relaxed":
        eq = relax_bulk(spec)
        return offs + eq.deltas[:, 2]
    raise ValueError(f"unknown rho_z source {source!r}")


def coupling(q: float, bands: BandStructure, d: float | None = None,
             rho_z: np.ndarray | None = None) -> np.ndarray:
    """Complex coupling for each band at one grid momentum q."""
    idx = np.flatnonzero(np.isclose(bands.q_grid, q, rtol=0.0, atol=1e-12))
    if idx.size == 0:
        raise ValueError(f"q = {q!r} is not on the band-structure grid")
    k = int(idx[0])
    if d is None:
        d = bands.spec.d
    if rho_z is None:
        rho_z = base_offsets(bands.spec)[:, 2]
    return _coupling_row(bands.q_grid[k], bands.omega[k], bands.xi[k], d, rho_z)


def _coupling_row(q, omega_row, xi_slice, d, rho_z):
    if np.any(omega_row <= 0.0):
        raise ZeroFrequencyError(f"zero phonon frequency at q = {q:g}")
    phases = np.exp(-1j * q * np.asarray(rho_z))
    z_abs = np.abs(xi_slice[[2, 5], :])           # (2, 6): |xi_z| per base, band
    structure = phases @ z_abs                    # (6,)
    return q * rho0(q, d) / np.sqrt(omega_row) * structure


@dataclass(frozen=True)
class CouplingGrid:
    q_grid: np.ndarray
    m_complex: np.ndarray     # (Nq, 6)
    m_abs: np.ndarray         # (Nq, 6)
    rho0_values: np.ndarray   # (Nq,)
    omega: np.ndarray         # (Nq, 6)
    spec: ChainSpec
    rho_z_source: str
    cutoff_cells: int
    relaxed: bool


def coupling_grid(
    spec: ChainSpec,
    q_points: int = DEFAULT_Q_POINTS,
    bands: BandStructure | None = None,
    cutoff_cells: int = DEFAULT_CUTOFF_CELLS,
    rho_z_source: str = "trap",
    relax: bool = False,
) -> CouplingGrid:
    """Coupling table over the full grid for all six bands."""
    if bands is None:
        bands = band_structure(spec, q_points=q_points, cutoff_cells=cutoff_cells, relax=relax)
    elif len(bands.q_grid) != q_points:
        raise ValueError("band structure grid does not match q_points")
    rho_z = base_z_offsets(spec, rho_z_source)
    n_q = len(bands.q_grid)
    m = np.zeros((n_q, 6), dtype=complex)
    for k in range(n_q):
        m[k] = _coupling_row(bands.q_grid[k], bands.omega[k], bands.xi[k], spec.d, rho_z)
    return CouplingGrid(
        q_grid=bands.q_grid,
        m_complex=m,
        m_abs=np.abs(m),
        rho0_values=rho0(bands.q_grid, spec.d),
        omega=bands.omega.copy(),
        spec=spec,
        rho_z_source=rho_z_source,
        cutoff_cells=bands.cutoff_cells,
        relaxed=bands.relaxed,
    )


def coupled_band_count(grid: CouplingGrid, threshold: float = 0.05):
    """Number of bands carrying a non-negligible share of the peak coupling.

    Evaluated at the momentum of the global coupling maximum: a band
    counts when its coupling power |M|^2 there is at least ``threshold``
    of the strongest band's.  Away from that momentum, narrow band
    crossings smear the strong couplings over several sorted bands and
    would inflate the count.
    """
    k_star, _ = np.unravel_index(int(np.argmax(grid.m_abs)), grid.m_abs.shape)
    row = grid.m_abs[k_star]
    peak = row.max()
    if peak == 0.0:
        return 0, float(grid.q_grid[k_star]), np.zeros(6)
    fractions = (row / peak) ** 2
    count = int((fractions >= threshold).sum())
    return count, float(grid.q_grid[k_star]), fractions


def coupled_bands(grid: CouplingGrid, threshold: float = 0.05) -> list:
    """1-based sorted-band labels counted by coupled_band_count."""
    _, q_star, fractions = coupled_band_count(grid, threshold)
    return [j + 1 for j in range(6) if fractions[j] >= threshold]


def physical_coupling(grid: CouplingGrid, g_cp: float, mass: float | None = None,
                      hbar: float = 1.0) -> np.ndarray:
    """Apply the pseudopotential magnitude: M_phys = g_cp sqrt(hbar/2M) * M."""
    if mass is None:
        mass = grid.spec.mass
    return g_cp * np.sqrt(hbar / (2.0 * mass)) * grid.m_complex


COUPLING_CSV_HEADER = "q,band,re_m,im_m,abs_m,rho0,omega"


def coupling_csv_rows(grid: CouplingGrid):
    for k, q in enumerate(grid.q_grid):
        for j in range(6):
            z = grid.m_complex[k, j]
            yield [q, j + 1, z.real, z.imag, abs(z), grid.rho0_values[k], grid.omega[k, j]]
