"""Stationary points of the chain potential.

Two solvers: full Newton relaxation of a finite chain, and a
translational-ansatz relaxation of the infinite (bulk) chain where every
cell shares the same per-base displacement.  Both use the analytic
gradient and Hessian; Newton steps are accepted only if they lower the
energy (finite chain) or the force residual (bulk).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CoincidentAtomsError, MaxIterExceededError, NonConvergedCutoffError
from .geometry import ChainSpec, Configuration, base_offsets, trap_centers
from .potential import (
    MIN_SEPARATION,
    _pair_gradients,
    _pair_hessians,
    gradient,
    hessian,
    total_energy,
)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200
DEFAULT_BULK_TOL = 1e-8
DEFAULT_CUTOFF_CELLS = 32


def relax_finite(
    spec: ChainSpec,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> Configuration:
    """Relax a finite chain from the trap centers until ||dV/dR||_inf < tol.

    The returned configuration carries the smallest Hessian eigenvalue at
    the solution; ``stable`` is False when the stationary point is not a
    local minimum (kept as a flag, not an error, since squeezed chains do
    go unstable).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    x = trap_centers(spec).positions.reshape(-1).copy()
    cap = _step_cap(spec)
    energy = _config_energy(x, spec)
    history = [energy]
    n_iter = 0
    grad = gradient(_as_config(x), spec)
    residual = float(np.abs(grad).max())
    while residual >= tol:
        if n_iter >= max_iter:
            raise MaxIterExceededError(
                f"finite relaxation did not reach tol={tol:g} in {max_iter} iterations "
                f"(residual {residual:.3e})",
                residual=residual,
                last_iterate=_as_config(x, residual=residual),
            )
        hess = hessian(_as_config(x), spec)
        step = _clip_step(_newton_direction(hess, grad), cap)
        x, energy = _line_search(x, energy, grad, step, spec)
        history.append(energy)
        grad = gradient(_as_config(x), spec)
        residual = float(np.abs(grad).max())
        n_iter += 1
    min_eig = float(np.linalg.eigvalsh(hessian(_as_config(x), spec)).min())
    return Configuration(
        positions=x.reshape(-1, 3),
        residual_inf_norm=residual,
        relaxed=True,
        stable=min_eig > 0.0,
        min_hessian_eigenvalue=min_eig,
        n_iterations=n_iter,
        energy_history=tuple(history),
    )


def _as_config(x: np.ndarray, residual: float = 0.0) -> Configuration:
    return Configuration(x.reshape(-1, 3), residual, False)


def _config_energy(x: np.ndarray, spec: ChainSpec) -> float:
    return total_energy(_as_config(x), spec).total


def _newton_direction(hess: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """Newton step, shifted toward steepest descent if the Hessian is indefinite."""
    try:
        np.linalg.cholesky(hess)
        return np.linalg.solve(hess, -grad)
    except np.linalg.LinAlgError:
        min_eig = float(np.linalg.eigvalsh(hess).min())
        shift = 1.1 * abs(min_eig) + 1e-8
        return np.linalg.solve(hess + shift * np.eye(hess.shape[0]), -grad)


def _step_cap(spec: ChainSpec) -> float:
    """Per-iteration displacement cap keeping iterates in the local basin.

    The dipolar energy is unbounded below at contact, so the physical
    equilibrium is only a local minimum; uncapped Newton steps can tunnel
    straight into the collapse basin.
    """
    scale = spec.d if spec.delta <= 0 else min(spec.d, spec.delta)
    return 0.2 * scale


def _clip_step(step: np.ndarray, cap: float) -> np.ndarray:
    biggest = float(np.abs(step).max())
    if biggest > cap:
        return step * (cap / biggest)
    return step


def _line_search(x, energy, grad, step, spec, c1: float = 1e-4):
    """Backtracking line search enforcing an Armijo decrease of the energy."""
    slope = float(grad @ step)
    alpha = 1.0
    while alpha > 1e-14:
        x_new = x + alpha * step
        e_new = _config_energy(x_new, spec)
        if e_new <= energy + c1 * alpha * slope:
            return x_new, e_new
        alpha *= 0.5
    raise MaxIterExceededError(
        "line search failed to decrease the energy",
        residual=float(np.abs(grad).max()),
        last_iterate=_as_config(x),
    )


@dataclass(frozen=True)
class BulkEquilibrium:
    """Per-base displacements of the translationally invariant chain."""

    delta_a: np.ndarray  # (3,)
    delta_b: np.ndarray  # (3,)
    residual_inf_norm: float
    cutoff_cells: int
    n_iterations: int

    def __iter__(self):
        return iter((self.delta_a, self.delta_b))

    @property
    def deltas(self) -> np.ndarray:
        return np.vstack([self.delta_a, self.delta_b])


def _bulk_partner_table(spec: ChainSpec, cutoff_cells: int):
    """Partner offsets seen by each reference base atom, before displacements.

    For base alpha, row r of table[alpha] is (partner position - cell-0
    base position) at zero displacement, and sign[alpha][r] picks how the
    pair vector responds to (delta_alpha - delta_beta): same-sublattice
    partners do not move relative to the reference atom.
    """
    offs = base_offsets(spec)
    cells = np.arange(-cutoff_cells, cutoff_cells + 1)
    tables = []
    for alpha in range(2):
        rel = []
        beta_of = []
        for beta in range(2):
            for n in cells:
                if n == 0 and beta == alpha:
                    continue
                rel.append(n * spec.a * np.array([0.0, 0.0, 1.0]) + offs[beta] - offs[alpha])
                beta_of.append(beta)
        tables.append((np.array(rel), np.array(beta_of)))
    return tables


def _bulk_energy_force_hessian(deltas: np.ndarray, spec: ChainSpec, tables):
    """Per-cell energy, its gradient (minus the force) and 6x6 Hessian.

    The per-cell Hessian coincides with the q=0 dynamical matrix, so the
    descent below converges precisely when the uniform phonon modes are
    stable.
    """
    m_hat = spec.m_hat
    nu2 = spec.nu_array**2
    energy = 0.5 * spec.mass * float(np.sum(nu2 * deltas**2))
    grad = spec.mass * nu2 * deltas
    hess = np.zeros((6, 6))
    hess[np.diag_indices(6)] += np.tile(spec.mass * nu2, 2)
    for alpha in range(2):
        rel, beta_of = tables[alpha]
        rvec = deltas[alpha] - (rel + deltas[beta_of])
        # rvec = R_{0,alpha} - R_{n,beta}; same-sublattice rows keep rvec = -rel
        rnorm = np.linalg.norm(rvec, axis=1)
        if float(rnorm.min()) < MIN_SEPARATION:
            raise CoincidentAtomsError(
                "bulk displacements drove two sublattices onto each other"
            )
        s = rvec @ m_hat
        energy += 0.5 * spec.v_dd * float(np.sum((rnorm**2 - 3.0 * s**2) / rnorm**5))
        grad[alpha] += _pair_gradients(rvec, rnorm, s, m_hat, spec.v_dd).sum(axis=0)
        hps = _pair_hessians(rvec, rnorm, s, m_hat, spec.v_dd)
        other = 1 - alpha
        h_cross = hps[beta_of == other].sum(axis=0)
        a0, b0 = 3 * alpha, 3 * other
        hess[a0:a0 + 3, a0:a0 + 3] += h_cross
        hess[a0:a0 + 3, b0:b0 + 3] -= h_cross
    return energy, grad, hess


def _solve_bulk(spec: ChainSpec, tol: float, cutoff_cells: int, max_iter: int):
    """Newton descent of the per-cell energy over (delta_A, delta_B)."""
    tables = _bulk_partner_table(spec, cutoff_cells)
    deltas = np.zeros((2, 3))
    cap = _step_cap(spec)
    energy, grad, hess = _bulk_energy_force_hessian(deltas, spec, tables)
    residual = float(np.abs(grad).max())
    n_iter = 0
    while residual >= tol:
        if n_iter >= max_iter:
            raise MaxIterExceededError(
                f"bulk relaxation did not reach tol={tol:g} in {max_iter} iterations "
                f"(residual {residual:.3e})",
                residual=residual,
                last_iterate=deltas.copy(),
            )
        step = _clip_step(_newton_direction(hess, grad.reshape(-1)), cap).reshape(2, 3)
        slope = float(grad.reshape(-1) @ step.reshape(-1))
        alpha = 1.0
        while alpha > 1e-14:
            trial = deltas + alpha * step
            e_new, g_new, h_new = _bulk_energy_force_hessian(trial, spec, tables)
            if e_new <= energy + 1e-4 * alpha * slope:
                break
            alpha *= 0.5
        else:
            raise MaxIterExceededError(
                "bulk line search stalled",
                residual=residual,
                last_iterate=deltas.copy(),
            )
        deltas, energy, grad, hess = trial, e_new, g_new, h_new
        residual = float(np.abs(grad).max())
        n_iter += 1
    return deltas, residual, n_iter


def relax_bulk(
    spec: ChainSpec,
    tol: float = DEFAULT_BULK_TOL,
    cutoff_cells: int = DEFAULT_CUTOFF_CELLS,
    max_iter: int = DEFAULT_MAX_ITER,
    check_cutoff: bool = True,
) -> BulkEquilibrium:
    """Displacements (delta_A, delta_B) of the infinite chain under the
    ansatz that every cell moves identically.

    Neighbor sums run over |n| <= cutoff_cells.  With check_cutoff the
    solve is repeated at twice the cutoff and NonConvergedCutoffError is
    raised if the answer moves by more than 10*tol.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if cutoff_cells < 1:
        raise ValueError("cutoff_cells must be >= 1")
    deltas, residual, n_iter = _solve_bulk(spec, tol, cutoff_cells, max_iter)
    if check_cutoff:
        deltas2, _, _ = _solve_bulk(spec, tol, 2 * cutoff_cells, max_iter)
        drift = float(np.abs(deltas2 - deltas).max())
        if drift > 10.0 * tol:
            raise NonConvergedCutoffError(
                f"doubling cutoff_cells from {cutoff_cells} moved the bulk displacements "
                f"by {drift:.3e} (> 10*tol = {10 * tol:.3e}); increase cutoff_cells or tol"
            )
    return BulkEquilibrium(
        delta_a=deltas[0].copy(),
        delta_b=deltas[1].copy(),
        residual_inf_norm=residual,
        cutoff_cells=cutoff_cells,
        n_iterations=n_iter,
    )
