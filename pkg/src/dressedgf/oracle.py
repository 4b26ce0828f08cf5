"""Brute-force reference results for the coupled emitter-bath problem.

Everything here goes through the dense Hamiltonian in the single-excitation
basis ``[e_1..e_M, x_0..x_{N-1}]`` and plain LAPACK calls.  None of the
resolvent-formula evaluators are used to produce oracle numbers, so agreement
between the two paths is evidence rather than tautology; :func:`compare` is
the orchestrator that runs both sides against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bath import BathSpec, _fix_phases
from .errors import PoleError


@dataclass(frozen=True, eq=False)
class CheckResult:
    name: str
    error: float
    tol: float
    passed: bool
    detail: str = ""


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    checks: tuple

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "all_passed": bool(self.all_passed),
            "checks": [
                {
                    "name": c.name,
                    "error": float(c.error),
                    "tol": float(c.tol),
                    "passed": bool(c.passed),
                    "detail": c.detail,
                }
                for c in self.checks
            ],
        }


def _as_emitters(emitters):
    try:
        return tuple(emitters.emitters)
    except AttributeError:
        return tuple(emitters)


def build_full_hamiltonian(spec: BathSpec, emitters) -> np.ndarray:
    """Dense Hamiltonian over ``[e_1..e_M, x_0..x_{N-1}]``.

    Assembled directly from the raw spec fields.  ``emitters`` is an emitter
    array spec or any sequence of emitter specs.
    """
    ems = _as_emitters(emitters)
    n = spec.n_sites
    m = len(ems)
    seen = set()
    for e in ems:
        if not (0 <= e.site < n):
            raise ValueError(f"emitter site {e.site} out of range 0..{n - 1}")
        if e.site in seen:
            raise ValueError(f"two emitters on site {e.site}")
        seen.add(e.site)
    h = np.zeros((m + n, m + n), dtype=np.complex128)
    for x in range(n):
        h[m + x, m + x] = spec.frequencies[x]
    for x, xp, amp in spec.hoppings:
        h[m + x, m + xp] += amp
        h[m + xp, m + x] += np.conj(amp)
    for i, e in enumerate(ems):
        h[i, i] = e.omega0
        h[i, m + e.site] = e.g
        h[m + e.site, i] = e.g
    return h


def exact_eigensystem(spec: BathSpec, emitters):
    """Eigenvalues and phase-fixed eigenvectors of the full Hamiltonian."""
    evals, evecs = np.linalg.eigh(build_full_hamiltonian(spec, emitters))
    return np.ascontiguousarray(evals, dtype=np.float64), _fix_phases(evecs)


def direct_resolvent(spec: BathSpec, emitters, z: complex) -> np.ndarray:
    """``(z - H)^-1`` by dense linear solve; refuses nearly singular shifts."""
    h = build_full_hamiltonian(spec, emitters)
    shifted = complex(z) * np.eye(h.shape[0], dtype=np.complex128) - h
    cond = np.linalg.cond(shifted)
    if not np.isfinite(cond) or cond > 1e14:
        raise PoleError(f"z={z} is numerically at an eigenvalue (cond={cond:.3e})")
    return np.linalg.solve(shifted, np.eye(h.shape[0], dtype=np.complex128))


DEFAULT_CHECKS = (
    "resolvent_identity",
    "bound_state_energies",
    "bound_state_fidelity",
    "normalization",
    "scattering_residuals",
    "two_atom_poles",
)


def compare(
    spec: BathSpec,
    emitters,
    checks=None,
    rng=None,
    num_z: int = 20,
    tol: float = 1e-9,
    delta: float | None = None,
    gap_factor: float = 5.0,
) -> ComparisonReport:
    """Cross-check the resolvent-formula evaluators against dense references.

    Runs every applicable named check (single-emitter checks only fire for
    M=1, the two-atom pole check for M=2) and aggregates the max abs errors
    into a machine-readable report.
    """
    from . import bath as _bath, dressed as _dressed, multi as _multi

    ems = _as_emitters(emitters)
    if not ems:
        raise ValueError("emitter list must not be empty")
    if checks is None:
        checks = DEFAULT_CHECKS
    else:
        unknown = set(checks) - set(DEFAULT_CHECKS)
        if unknown:
            raise ValueError(f"unknown checks: {sorted(unknown)}")
    if rng is None:
        rng = np.random.default_rng(0)

    s = _bath.diagonalize_bath(spec)
    bands = _bath.detect_bands(s, gap_factor)
    arr = _multi.EmitterArraySpec(emitters=ems)
    evals, evecs = exact_eigensystem(spec, ems)
    in_gap_mask = np.array([bands.in_gap(w) for w in evals])
    results = []

    def gap_eigen():
        return evals[in_gap_mask], evecs[:, in_gap_mask]

    if "resolvent_identity" in checks:
        width = max(s.spectral_width, 1.0)
        err = 0.0
        for _ in range(num_z):
            re = rng.uniform(s.eigenvalues[0] - 0.5 * width, s.eigenvalues[-1] + 0.5 * width)
            im = rng.uniform(0.05 * width, 0.5 * width) * rng.choice([-1.0, 1.0])
            z = complex(re, im)
            diff = _multi.multi_green(s, arr, z) - direct_resolvent(spec, ems, z)
            err = max(err, float(np.max(np.abs(diff))))
        results.append(CheckResult("resolvent_identity", err, tol, err < tol,
                                   f"{num_z} random z"))

    solved = None
    if len(ems) == 1 and {"bound_state_energies", "bound_state_fidelity",
                          "normalization"} & set(checks):
        solved = _dressed.solve_dressed_bound_states(s, ems[0], bands)

    if "bound_state_energies" in checks and len(ems) == 1:
        ref, _ = gap_eigen()
        solved_gap = [b for b in solved if not b.in_band]
        if len(solved_gap) != ref.shape[0]:
            results.append(CheckResult(
                "bound_state_energies", math.inf, tol, False,
                f"count mismatch: solver {len(solved_gap)} vs oracle {ref.shape[0]}"))
        else:
            err = max((abs(b.energy - r) for b, r in zip(solved_gap, ref)), default=0.0)
            # in-band stationary states (VDS) have no gap partner; they must
            # still sit on an eigenvalue of the full Hamiltonian
            for b in solved:
                if b.in_band:
                    err = max(err, float(np.min(np.abs(evals - b.energy))))
            results.append(CheckResult("bound_state_energies", float(err), tol, err < tol,
                                       f"{len(solved)} states"))

    if "bound_state_fidelity" in checks and len(ems) == 1:
        err = 0.0
        for b in solved:
            # project onto the full-spectrum eigencluster: in-band stationary
            # states are degenerate with bath modes and need the whole cluster
            close = np.abs(evals - b.energy) < 1e-7
            if not close.any():
                err = math.inf
                break
            sub = evecs[:, close]
            overlap = np.linalg.norm(np.conj(sub.T) @ b.vector())
            err = max(err, 1.0 - float(overlap))
        results.append(CheckResult("bound_state_fidelity", err, tol, err < tol,
                                   f"{len(solved)} states"))

    if "normalization" in checks and len(ems) == 1:
        err = max((abs(np.linalg.norm(b.vector()) - 1.0) for b in solved), default=0.0)
        results.append(CheckResult("normalization", float(err), 1e-10, err < 1e-10,
                                   f"{len(solved)} states"))

    if "scattering_residuals" in checks and len(ems) == 1:
        err = 0.0
        for k in range(s.n_sites):
            st = _dressed.dressed_scattering_state(s, ems[0], k, delta=delta)
            err = max(err, st.residual)
        stol = 1e-5
        results.append(CheckResult("scattering_residuals", err, stol, err < stol,
                                   f"{s.n_sites} modes"))

    if "two_atom_poles" in checks and len(ems) == 2:
        poles = _multi.solve_two_atom_poles(s, arr, bands)
        ref, _ = gap_eigen()
        if len(poles.roots) != ref.shape[0]:
            results.append(CheckResult(
                "two_atom_poles", math.inf, tol, False,
                f"count mismatch: solver {len(poles.roots)} vs oracle {ref.shape[0]}"))
        else:
            err = max((abs(a - b) for a, b in zip(poles.roots, ref)), default=0.0)
            results.append(CheckResult("two_atom_poles", float(err), tol, err < tol,
                                       f"{len(poles.roots)} roots"))

    return ComparisonReport(checks=tuple(results))
