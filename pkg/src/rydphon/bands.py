"""Phonon bands of the chain: Bloch dynamical matrices, finite spectra,
band tracking, edge-mode detection and band-shape diagnostics.

Bulk quantities are evaluated at the trap centers by default; pass
relax=True to use the relaxed geometry instead (only available where the
relaxed chain exists, roughly d > 1.9 at the default dipole strength).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .equilibrium import BulkEquilibrium, relax_bulk, relax_finite
from .errors import ImaginaryFrequencyError
from .geometry import ChainSpec, Configuration, base_offsets, trap_centers
from .potential import _pair_hessians, hessian

DEFAULT_Q_POINTS = 256
DEFAULT_CUTOFF_CELLS = 32
DEGENERACY_TOL = 1e-10
NEGATIVE_CLAMP = 1e-12

_Z_COMPONENTS = (2, 5)  # (A, z) and (B, z) slots in the 6-component basis


def q_grid(spec: ChainSpec, q_points: int = DEFAULT_Q_POINTS) -> np.ndarray:
    """Uniform grid over (-pi/a, pi/a], endpoint included, -pi/a excluded."""
    if q_points < 2:
        raise ValueError("q_points must be >= 2")
    edge = np.pi / spec.a
    return np.linspace(-edge, edge, q_points + 1)[1:]


def _real_space_blocks(spec: ChainSpec, deltas: np.ndarray, cutoff_cells: int):
    """Second-derivative blocks between cell 0 and cells n in [-C, C].

    Returns (cells, blocks) with blocks[n_idx] the 6x6 real matrix
    d2V/du_{0,alpha,i} du_{n,beta,j}; the n=0 diagonal gets the trap term
    plus the self sum over every truncated partner.
    """
    offs = base_offsets(spec) + deltas
    cells = np.arange(-cutoff_cells, cutoff_cells + 1)
    n_cells = len(cells)
    zero_idx = cutoff_cells
    blocks = np.zeros((n_cells, 6, 6))
    m_hat = spec.m_hat
    for a in range(2):
        blocks[zero_idx, 3 * a:3 * a + 3, 3 * a:3 * a + 3] += np.diag(
            spec.mass * spec.nu_array**2
        )
        for b in range(2):
            rel = cells[:, None] * spec.a * np.array([0.0, 0.0, 1.0])[None, :] \
                + (offs[b] - offs[a])[None, :]
            keep = ~((cells == 0) & (a == b))
            rvec = rel[keep]
            rnorm = np.linalg.norm(rvec, axis=1)
            s = rvec @ m_hat
            hp = _pair_hessians(rvec, rnorm, s, m_hat, spec.v_dd)
            # cross blocks are -H(r); every partner adds +H to the self block
            blocks[keep, 3 * a:3 * a + 3, 3 * b:3 * b + 3] -= hp
            blocks[zero_idx, 3 * a:3 * a + 3, 3 * a:3 * a + 3] += hp.sum(axis=0)
    return cells, blocks


def _dynamical_matrices(qs, spec: ChainSpec, deltas, cutoff_cells: int) -> np.ndarray:
    cells, blocks = _real_space_blocks(spec, deltas, cutoff_cells)
    phases = np.exp(1j * np.asarray(qs)[:, None] * cells[None, :] * spec.a)
    return np.einsum("qn,nij->qij", phases, blocks)


def dynamical_matrix(
    q: float,
    spec: ChainSpec,
    bulk_eq: BulkEquilibrium | None = None,
    cutoff_cells: int = DEFAULT_CUTOFF_CELLS,
) -> np.ndarray:
    """Hermitian 6x6 Bloch matrix at quasimomentum q.

    bulk_eq=None evaluates at the trap centers; pass a relax_bulk result
    to use the translationally relaxed geometry.
    """
    deltas = bulk_eq.deltas if bulk_eq is not None else np.zeros((2, 3))
    return _dynamical_matrices([q], spec, deltas, cutoff_cells)[0]


def _gauge_fix(vec: np.ndarray) -> np.ndarray:
    """Unit phase such that the largest-magnitude z component is real >= 0."""
    zmags = np.abs(vec[list(_Z_COMPONENTS)])
    if zmags.max() > 1e-12:
        idx = _Z_COMPONENTS[int(np.argmax(zmags))]
    else:
        idx = int(np.argmax(np.abs(vec)))
    phase = vec[idx]
    mag = abs(phase)
    if mag == 0.0:
        return vec
    return vec * (phase.conjugate() / mag)


def _resolve_eigenvectors(lam: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """Deterministic eigenvectors: degenerate groups are re-spanned by
    projecting the fixed reference basis, then every column is gauge-fixed."""
    out = vec.copy()
    n = len(lam)
    start = 0
    for stop in range(1, n + 1):
        if stop < n and lam[stop] - lam[stop - 1] <= DEGENERACY_TOL:
            continue
        if stop - start > 1:
            sub = vec[:, start:stop]
            proj = sub @ (sub.conj().T @ np.eye(n, dtype=complex))
            cols = []
            for r in range(n):
                c = proj[:, r].copy()
                for prev in cols:
                    c -= (prev.conj() @ c) * prev
                norm = np.linalg.norm(c)
                if norm > 1e-8:
                    cols.append(c / norm)
                if len(cols) == stop - start:
                    break
            out[:, start:stop] = np.array(cols).T
        start = stop
    for j in range(n):
        out[:, j] = _gauge_fix(out[:, j])
    return out


@dataclass(frozen=True)
class BandStructure:
    """omega and polarization vectors on the quasimomentum grid.

    omega[k, j] is band j (ascending) at q_grid[k]; xi[k, :, j] is the
    matching 6-component polarization vector in the order
    (A,x),(A,y),(A,z),(B,x),(B,y),(B,z).
    """

    q_grid: np.ndarray
    omega: np.ndarray       # (Nq, 6)
    xi: np.ndarray          # (Nq, 6, 6) complex
    spec: ChainSpec
    cutoff_cells: int
    relaxed: bool

    @property
    def n_bands(self) -> int:
        return self.omega.shape[1]

    def envelopes(self) -> np.ndarray:
        """(6, 2) array of per-band [min, max] frequencies."""
        return np.stack([self.omega.min(axis=0), self.omega.max(axis=0)], axis=1)


def _freqs_from_lambda(lam: np.ndarray, context: str) -> np.ndarray:
    worst = float(lam.min())
    if worst < -NEGATIVE_CLAMP:
        raise ImaginaryFrequencyError(
            f"{context}: squared frequency {worst:.3e} < 0; lattice unstable"
        )
    return np.sqrt(np.clip(lam, 0.0, None))


def band_structure(
    spec: ChainSpec,
    q_points: int = DEFAULT_Q_POINTS,
    cutoff_cells: int = DEFAULT_CUTOFF_CELLS,
    relax: bool = False,
    bulk_eq: BulkEquilibrium | None = None,
) -> BandStructure:
    """Diagonalize the Bloch matrix on the standard grid.

    relax=True relaxes the bulk first (or uses the provided bulk_eq).
    """
    if relax and bulk_eq is None:
        bulk_eq = relax_bulk(spec, cutoff_cells=cutoff_cells)
    deltas = bulk_eq.deltas if bulk_eq is not None else np.zeros((2, 3))
    qs = q_grid(spec, q_points)
    dyn = _dynamical_matrices(qs, spec, deltas, cutoff_cells)
    lam, vec = np.linalg.eigh(dyn)
    omega = _freqs_from_lambda(lam / spec.mass, "band_structure")
    xi = np.empty_like(vec)
    for k in range(len(qs)):
        xi[k] = _resolve_eigenvectors(lam[k], vec[k])
    return BandStructure(
        q_grid=qs, omega=omega, xi=xi, spec=spec,
        cutoff_cells=cutoff_cells, relaxed=bulk_eq is not None,
    )


def harmonic_matrix(config: Configuration, spec: ChainSpec, allow_unrelaxed: bool = True) -> np.ndarray:
    """Second-derivative matrix at the given configuration (hessian alias)."""
    if not config.relaxed and not allow_unrelaxed:
        raise ValueError("configuration is not relaxed; pass allow_unrelaxed=True to override")
    return hessian(config, spec)


# ---------------------------------------------------------------------------
# finite chains and edge modes

@dataclass(frozen=True)
class EdgeDetectionParams:
    """Thresholds of the edge-mode classifier.

    A mode is edge-flagged when it lies outside every bulk band envelope
    and is either inside an interior gap (between two bands) or, when it
    sits beyond the outer spectrum edge, shows end-localized decay
    (weight of the outer two atom pairs over the next two).
    """

    interior_margin: float = 1e-4
    exterior_margin: float = 1e-4
    end_decay_threshold: float = 1.8


@dataclass(frozen=True)
class EdgeModeReport:
    edge_flags: np.ndarray      # (3N,) bool
    ipr: np.ndarray             # (3N,)
    end_decay: np.ndarray       # (3N,)
    nearest_band: np.ndarray    # (3N,) 1-based nearest bulk band
    gap_index: np.ndarray       # (3N,) bands fully below the mode (0..6)


@dataclass(frozen=True)
class FiniteSpectrum:
    frequencies: np.ndarray     # (3N,) ascending
    modes: np.ndarray           # (3N, 3N), column per mode
    report: EdgeModeReport
    band_edges: np.ndarray      # (6, 2) bulk envelopes used for detection
    spec: ChainSpec
    relaxed: bool

    @property
    def edge_flags(self) -> np.ndarray:
        return self.report.edge_flags

    @property
    def ipr(self) -> np.ndarray:
        return self.report.ipr

    @property
    def n_edge_modes(self) -> int:
        return int(self.report.edge_flags.sum())


def atom_weights(modes: np.ndarray, n_atoms: int) -> np.ndarray:
    """(N, n_modes) per-atom weight of each normalized mode."""
    return (modes.reshape(n_atoms, 3, -1) ** 2).sum(axis=1)


def inverse_participation_ratio(modes: np.ndarray, n_atoms: int) -> np.ndarray:
    w = atom_weights(modes, n_atoms)
    return (w**2).sum(axis=0)


def _end_decay(weights: np.ndarray) -> np.ndarray:
    """Outer-pair over next-pair weight ratio; large for end-bound modes."""
    n = weights.shape[0]
    if n < 8:
        return np.ones(weights.shape[1])
    outer = weights[[0, 1, -2, -1]].sum(axis=0)
    inner = weights[[2, 3, -4, -3]].sum(axis=0)
    return outer / np.maximum(inner, 1e-300)


def detect_edge_modes(
    modes: np.ndarray,
    frequencies: np.ndarray,
    band_edges: np.ndarray,
    params: EdgeDetectionParams | None = None,
) -> EdgeModeReport:
    """Flag boundary-localized modes detached from the bulk bands.

    band_edges is the (6, 2) table of bulk envelopes.  The inverse
    participation ratio is reported for every mode but is not used as the
    flag criterion: at 14 atoms the detached states are too weakly
    localized for any IPR cut to separate them from bulk modes.
    """
    if params is None:
        params = EdgeDetectionParams()
    n_modes = modes.shape[1]
    n_atoms = modes.shape[0] // 3
    weights = atom_weights(modes, n_atoms)
    ipr = (weights**2).sum(axis=0)
    decay = _end_decay(weights)
    lo_all = band_edges[:, 0].min()
    hi_all = band_edges[:, 1].max()
    flags = np.zeros(n_modes, dtype=bool)
    nearest = np.zeros(n_modes, dtype=int)
    gap_index = np.zeros(n_modes, dtype=int)
    for m in range(n_modes):
        om = frequencies[m]
        dist = np.empty(len(band_edges))
        for j, (lo, hi) in enumerate(band_edges):
            dist[j] = 0.0 if lo <= om <= hi else min(abs(om - lo), abs(om - hi))
        nearest[m] = int(np.argmin(dist)) + 1
        gap_index[m] = int((band_edges[:, 1] < om).sum())
        out_by = dist.min()
        if out_by == 0.0:
            continue
        interior = lo_all < om < hi_all
        if interior:
            flags[m] = out_by > params.interior_margin
        else:
            flags[m] = out_by > params.exterior_margin and decay[m] >= params.end_decay_threshold
    return EdgeModeReport(
        edge_flags=flags, ipr=ipr, end_decay=decay,
        nearest_band=nearest, gap_index=gap_index,
    )


def finite_spectrum(
    spec: ChainSpec,
    relax: bool = False,
    q_points: int = DEFAULT_Q_POINTS,
    cutoff_cells: int = DEFAULT_CUTOFF_CELLS,
    params: EdgeDetectionParams | None = None,
) -> FiniteSpectrum:
    """Normal modes of the finite chain with edge detection applied."""
    config = relax_finite(spec) if relax else trap_centers(spec)
    ham = hessian(config, spec) / spec.mass
    lam, vec = np.linalg.eigh(ham)
    freqs = _freqs_from_lambda(lam, "finite_spectrum")
    bands = band_structure(spec, q_points=q_points, cutoff_cells=cutoff_cells, relax=relax)
    edges = bands.envelopes()
    report = detect_edge_modes(vec, freqs, edges, params)
    return FiniteSpectrum(
        frequencies=freqs, modes=vec, report=report,
        band_edges=edges, spec=spec, relaxed=relax,
    )


# ---------------------------------------------------------------------------
# band tracking and diagnostics

_PERMS = list(permutations(range(6)))


def _best_assignment(overlaps: np.ndarray):
    best, best_score = None, -np.inf
    for p in _PERMS:
        score = overlaps[0, p[0]] + overlaps[1, p[1]] + overlaps[2, p[2]] \
            + overlaps[3, p[3]] + overlaps[4, p[4]] + overlaps[5, p[5]]
        if score > best_score:
            best_score, best = score, p
    return best


def _suppress_touches(pos: np.ndarray, min_run: int) -> np.ndarray:
    """Undo order flips that revert within min_run grid points.

    Degenerate touch points (e.g. the exact q=0 degeneracies) otherwise
    register as spurious double crossings.
    """
    pos = pos.copy()
    n_q = pos.shape[0]
    changed = True
    while changed:
        changed = False
        for a in range(6):
            for b in range(a + 1, 6):
                sign = np.sign(pos[:, a] - pos[:, b])
                k = 0
                while k < n_q:
                    k2 = k
                    while k2 + 1 < n_q and sign[k2 + 1] == sign[k]:
                        k2 += 1
                    if 0 < k and k2 < n_q - 1 and (k2 - k + 1) < min_run:
                        pos[k:k2 + 1, [a, b]] = pos[k:k2 + 1, [b, a]]
                        sign[k:k2 + 1] = -sign[k:k2 + 1]
                        changed = True
                    k = k2 + 1
    return pos


def track_bands(bands: BandStructure, min_run: int = 3) -> np.ndarray:
    """Follow band identity through crossings by eigenvector overlap.

    Returns positions[k, l]: the sorted slot occupied at q_grid[k] by
    tracked band l, with labels anchored to the sorted order at the grid
    point closest to q = 0.
    """
    n_q = len(bands.q_grid)
    pos = np.zeros((n_q, 6), dtype=int)
    pos[0] = np.arange(6)
    prev_vec = bands.xi[0]
    prev_pos = np.arange(6)
    for k in range(1, n_q):
        overlaps = np.abs(prev_vec.conj().T @ bands.xi[k])
        perm = _best_assignment(overlaps)
        now_pos = np.array([perm[prev_pos[l]] for l in range(6)])
        pos[k] = now_pos
        prev_vec = bands.xi[k]
        prev_pos = now_pos
    pos = _suppress_touches(pos, min_run)
    # relabel so that label order matches the sorted order at q ~ 0
    k0 = int(np.argmin(np.abs(bands.q_grid)))
    order = np.argsort(pos[k0])
    return pos[:, order]


@dataclass(frozen=True)
class BandDiagnostics:
    crossings: tuple            # ((j, j', q), ...) with tracked 1-based labels
    concavity: np.ndarray       # (6,) sign of the central-window curvature
    concavity_coefficient: np.ndarray   # (6,) fitted quadratic coefficient
    second_difference_q0: np.ndarray    # (6,) raw 3-point stencil at q = 0
    bandwidth: np.ndarray       # (6,) per sorted band

    @property
    def crossing_pairs(self):
        return sorted({(a, b) for a, b, _ in self.crossings})


def band_diagnostics(bands: BandStructure, min_run: int = 3,
                     concavity_window: float = 0.5) -> BandDiagnostics:
    """Crossings, q=0 concavities and bandwidths.

    Concavity is the quadratic coefficient of a fit over the central
    window |q| <= concavity_window * pi/a; a plain 3-point stencil is too
    local to capture the band-shape change of nearly flat bands and is
    reported alongside.
    """
    qs = bands.q_grid
    omega = bands.omega
    pos = track_bands(bands, min_run=min_run)
    events = []
    for k in range(1, len(qs)):
        for a in range(6):
            for b in range(a + 1, 6):
                if (pos[k - 1, a] - pos[k - 1, b]) * (pos[k, a] - pos[k, b]) < 0:
                    events.append((a + 1, b + 1, float(qs[k])))
    k0 = int(np.argmin(np.abs(qs)))
    stencil = omega[k0 + 1] - 2.0 * omega[k0] + omega[k0 - 1] \
        if 0 < k0 < len(qs) - 1 else np.zeros(6)
    window = np.abs(qs) <= concavity_window * np.pi / bands.spec.a
    coeff = np.array([np.polyfit(qs[window], omega[window, j], 2)[0] for j in range(6)])
    return BandDiagnostics(
        crossings=tuple(events),
        concavity=np.sign(coeff),
        concavity_coefficient=coeff,
        second_difference_q0=stencil,
        bandwidth=omega.max(axis=0) - omega.min(axis=0),
    )


# ---------------------------------------------------------------------------
# CSV export

def band_csv_rows(bands: BandStructure):
    """Rows (q, band, omega, Re/Im of the six xi components)."""
    for k, q in enumerate(bands.q_grid):
        for j in range(bands.n_bands):
            row = [q, j + 1, bands.omega[k, j]]
            for c in range(6):
                z = bands.xi[k, c, j]
                row.extend([z.real, z.imag])
            yield row


BAND_CSV_HEADER = (
    "q,band,omega,"
    "re_xi_ax,im_xi_ax,re_xi_ay,im_xi_ay,re_xi_az,im_xi_az,"
    "re_xi_bx,im_xi_bx,re_xi_by,im_xi_by,re_xi_bz,im_xi_bz"
)

SPECTRUM_CSV_HEADER = "mode,omega,ipr,end_decay,edge_flag,nearest_band"


def spectrum_csv_rows(fs: FiniteSpectrum):
    rep = fs.report
    for m, om in enumerate(fs.frequencies):
        yield [m, om, rep.ipr[m], rep.end_decay[m],
               int(rep.edge_flags[m]), rep.nearest_band[m]]
