"""Ground-state optimization, subspace expansion, and optical spectra.

The ground state comes from a noiseless variational loop over the synthesized
circuit: energies are exact statevector expectations and gradients come from
a four-point shift rule that is exact for the one-parameter exponentials the
compilers emit, so quasi-Newton steps converge to machine-tight stationary
points.

Excited states come from subspace expansion: a set of excitation operators
F_k applied to the ground state spans a small non-orthogonal basis in which
the Hamiltonian is diagonalized via a generalized eigenproblem, conditioned
by discarding overlap eigendirections below threshold. Transition dipoles,
oscillator strengths, and a Lorentzian-broadened absorption curve follow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .estimation import (
    attach_verifiers,
    estimate_energy,
    partition_terms,
    pmsv_postselect,
)
from .fermion import (
    FermionOperator,
    dipole_operator,
    generate_uccsd_pool,
    hamiltonian_from_model,
    jordan_wigner,
)
from .pauli import expectation, operator_apply
from .simulator import NoiseSpec, run_statevector, sample

DEGENERACY_TOL = 1e-6
OVERLAP_THRESHOLD = 1e-8


# -- variational ground state -------------------------------------------------


def vqe_optimize(model, circuit, gtol: float = 1e-6, maxiter: int = 500):
    """Minimize the exact energy of a symbolic circuit from the zero point.

    Returns (parameter dict, energy). Gradients use the four-point shift
    rule, exact for exponentials of self-inverse-squared generators, so the
    optimizer runs to a gradient infinity-norm below ``gtol`` or raises.
    For hartree-scale objectives the floating-point floor on the energy
    sits near 1e-14, which caps reachable gradient norms around 1e-7; the
    default keeps clear of that floor while leaving the energy error at
    the square of the gradient, far below chemical tolerances.
    """
    op = hamiltonian_from_model(model)
    names = list(circuit.parameters)

    def energy(x):
        state = run_statevector(circuit.bind(dict(zip(names, x))))
        return float(expectation(op, state.amplitudes).real)

    if not names:
        return {}, energy(np.zeros(0))

    def gradient(x):
        g = np.zeros(len(x))
        for i in range(len(x)):
            step = np.zeros(len(x))
            step[i] = 1.0
            d1 = energy(x + step * (math.pi / 2)) - energy(x - step * (math.pi / 2))
            d2 = energy(x + step * (math.pi / 4)) - energy(x - step * (math.pi / 4))
            g[i] = d2 + (1.0 - math.sqrt(2.0)) * d1 / 2.0
        return g

    result = minimize(
        energy,
        np.zeros(len(names)),
        jac=gradient,
        method="L-BFGS-B",
        options={"gtol": gtol, "ftol": 0.0, "maxiter": maxiter},
    )
    if not result.success or np.max(np.abs(gradient(result.x))) >= gtol:
        raise RuntimeError(f"energy minimization did not converge: {result.message}")
    return dict(zip(names, result.x)), float(result.fun)


# -- expansion operator sets ----------------------------------------------------


def _single(create, annihilate):
    return FermionOperator.creation(create) * FermionOperator.annihilation(annihilate)


def default_expansion(model) -> list:
    """Identity, spin-summed occupied->virtual singles, and paired doubles.

    The spin-summed singles keep the expansion in the singlet sector, so the
    solved states track the optically relevant part of the spectrum.
    """
    occupied = model.doubly_occupied_spatials()
    empty = [
        p
        for p in range(model.n_spatial)
        if not model.hf_occupation[2 * p] and not model.hf_occupation[2 * p + 1]
    ]
    ops = [FermionOperator.identity()]
    for p in occupied:
        for q in empty:
            ops.append(_single(2 * q, 2 * p) + _single(2 * q + 1, 2 * p + 1))
    for p in occupied:
        for q in empty:
            ops.append(
                FermionOperator.creation(2 * q)
                * FermionOperator.creation(2 * q + 1)
                * FermionOperator.annihilation(2 * p + 1)
                * FermionOperator.annihilation(2 * p)
            )
    return ops


def full_expansion(model) -> list:
    """Identity plus every spin-conserving occupied->virtual single and double."""
    return [FermionOperator.identity()] + [
        e.excitation_operator() for e in generate_uccsd_pool(model)
    ]


# -- subspace expansion ---------------------------------------------------------


@dataclass(frozen=True)
class QseResult:
    """Solved subspace problem H w = e S w in the expansion-operator basis.

    ``vectors`` holds one S-normalized coefficient column per state, aligned
    with ``eigenvalues`` (ascending).
    """

    subspace_h: np.ndarray
    subspace_s: np.ndarray
    eigenvalues: np.ndarray
    vectors: np.ndarray
    expansion_ops: list

    @property
    def degenerate_flags(self) -> np.ndarray:
        """True where a state shares its energy with a neighbor within 1e-6."""
        e = self.eigenvalues
        flags = np.zeros(len(e), dtype=bool)
        for i in range(len(e) - 1):
            if abs(e[i + 1] - e[i]) < DEGENERACY_TOL:
                flags[i] = flags[i + 1] = True
        return flags


def _ground_state(model, ground):
    circuit, params = ground
    return run_statevector(circuit.bind(params)).amplitudes


def _sampled_average(op, prep, shots, noise, verifiers, counter):
    """Shot-based estimate of a Hermitian operator's expectation."""
    sets = partition_terms(op)
    if verifiers:
        sets = attach_verifiers(sets, verifiers)
    tables = []
    for mset in sets:
        circuit = mset.measurement_circuit(prep)
        spec = NoiseSpec(
            two_qubit_depolarizing_p=noise.two_qubit_depolarizing_p if noise else 0.0,
            measurement_flip_p=noise.measurement_flip_p if noise else 0.0,
            seed=(noise.seed if noise else 0) + counter[0],
        )
        counter[0] += 1
        table = sample(circuit, shots, noise=spec)
        if mset.verifiers:
            table = pmsv_postselect(table, mset)
        tables.append(table)
    value, _ = estimate_energy(sets, tables, op)
    return value


def qse_solve(
    model,
    ground,
    expansion=None,
    estimator: str = "exact",
    shots: int = 4096,
    noise: NoiseSpec | None = None,
    verifiers=None,
    threshold: float = OVERLAP_THRESHOLD,
) -> QseResult:
    """Diagonalize the Hamiltonian in the basis {F_k |ground>}.

    ``ground`` is a (circuit, params) pair. The exact estimator contracts
    statevectors; the sampled one measures the symmetrized matrix elements
    (F_k' H F_l + F_l' H F_k)/2 shot by shot, with optional symmetry
    verification. Overlap eigendirections below ``threshold`` are projected
    out before the solve.
    """
    if expansion is None:
        expansion = default_expansion(model)
    expansion = list(expansion)
    if not expansion:
        raise ValueError("expansion needs at least one operator")
    op = hamiltonian_from_model(model)
    k = len(expansion)
    h_mat = np.zeros((k, k))
    s_mat = np.zeros((k, k))

    if estimator == "exact":
        psi = _ground_state(model, ground)
        columns = [operator_apply(jordan_wigner(f), psi) for f in expansion]
        h_columns = [operator_apply(op, c) for c in columns]
        for a in range(k):
            for b in range(k):
                s_mat[a, b] = np.vdot(columns[a], columns[b]).real
                h_mat[a, b] = np.vdot(columns[a], h_columns[b]).real
    elif estimator == "sampled":
        circuit, params = ground
        prep = circuit.bind(params)
        encoded = [jordan_wigner(f) for f in expansion]
        counter = [0]
        for a in range(k):
            for b in range(a, k):
                cross = encoded[a].hermitian_conjugate() * encoded[b]
                s_op = (cross + cross.hermitian_conjugate()) * 0.5
                h_op = encoded[a].hermitian_conjugate() * op * encoded[b]
                h_op = (h_op + h_op.hermitian_conjugate()) * 0.5
                s_mat[a, b] = s_mat[b, a] = _sampled_average(
                    s_op, prep, shots, noise, verifiers, counter
                )
                h_mat[a, b] = h_mat[b, a] = _sampled_average(
                    h_op, prep, shots, noise, verifiers, counter
                )
    else:
        raise ValueError(f"unknown estimator {estimator!r}")

    h_mat = 0.5 * (h_mat + h_mat.T)
    s_mat = 0.5 * (s_mat + s_mat.T)
    s_vals, s_vecs = np.linalg.eigh(s_mat)
    keep = s_vals > threshold
    if not np.any(keep):
        raise ValueError(
            f"overlap matrix is singular: no eigenvalue above {threshold}"
        )
    transform = s_vecs[:, keep] / np.sqrt(s_vals[keep])
    reduced = transform.T @ h_mat @ transform
    vals, vecs = np.linalg.eigh(0.5 * (reduced + reduced.T))
    return QseResult(h_mat, s_mat, vals, transform @ vecs, list(expansion))


# -- dipoles, strengths, broadening ----------------------------------------------


def transition_dipoles(result: QseResult, ground, model) -> np.ndarray:
    """Per-state (d_x, d_y, d_z) between the ground state and each QSE state.

    Row v evaluates sum_k w_kv <psi0| mu_axis F_k |psi0>; with the identity
    in the expansion, row 0 is the ground state's permanent dipole.
    """
    psi = _ground_state(model, ground)
    columns = [operator_apply(jordan_wigner(f), psi) for f in result.expansion_ops]
    out = np.zeros((result.vectors.shape[1], 3))
    for axis_index, axis in enumerate("xyz"):
        mu = dipole_operator(model, axis)
        bra = operator_apply(mu.hermitian_conjugate(), psi)
        overlaps = np.array([np.vdot(bra, c).real for c in columns])
        out[:, axis_index] = result.vectors.T @ overlaps
    return out


@dataclass(frozen=True)
class SpectrumPoint:
    energy: float
    oscillator_strength: float


def oscillator_strengths(dipoles, energies) -> list:
    """f = (2 eps / 3) * |d|^2 per excited state, sorted by energy.

    ``energies`` are excitation energies (hartree, all positive), aligned
    row-for-row with ``dipoles``.
    """
    dipoles = np.atleast_2d(np.asarray(dipoles, dtype=float))
    energies = np.asarray(energies, dtype=float)
    if len(energies) != len(dipoles):
        raise ValueError("one excitation energy per dipole row")
    if np.any(energies <= 0):
        raise ValueError("excitation energies must be positive")
    points = [
        SpectrumPoint(float(e), float(2.0 * e / 3.0 * np.dot(d, d)))
        for e, d in zip(energies, dipoles)
    ]
    return sorted(points, key=lambda p: p.energy)


def merge_degenerate(points, tol: float = DEGENERACY_TOL) -> list:
    """Sum strengths of points within ``tol`` of each other into one stick."""
    merged = []
    for p in sorted(points, key=lambda p: p.energy):
        if merged and p.energy - merged[-1][0][-1] < tol:
            merged[-1][0].append(p.energy)
            merged[-1][1].append(p.oscillator_strength)
        else:
            merged.append(([p.energy], [p.oscillator_strength]))
    out = []
    for energies, strengths in merged:
        if len(energies) == 1:
            out.append(SpectrumPoint(energies[0], strengths[0]))
            continue
        f = sum(strengths)
        center = sum(e * s for e, s in zip(energies, strengths))
        center = center / f if f > 0 else sum(energies) / len(energies)
        out.append(SpectrumPoint(center, f))
    return out


def broaden(points, gamma: float, grid=None):
    """Lorentzian-broadened absorption curve over ``grid``.

    Without an explicit grid, the curve covers every stick plus 150 gamma of
    margin in steps of gamma/20, wide enough that the quadrature integral
    retains the summed strengths to better than 1%.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    points = list(points)
    if grid is None:
        if not points:
            raise ValueError("need at least one point to choose a grid")
        lo = min(p.energy for p in points) - 150.0 * gamma
        hi = max(p.energy for p in points) + 150.0 * gamma
        grid = np.arange(lo, hi + gamma / 40.0, gamma / 20.0)
    grid = np.asarray(grid, dtype=float)
    curve = np.zeros_like(grid)
    for p in points:
        curve += (
            p.oscillator_strength * (gamma / math.pi) / ((grid - p.energy) ** 2 + gamma**2)
        )
    return grid, curve
