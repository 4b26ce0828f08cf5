"""Single static impurity in a finite bath: resolvent, bound and scattering states.

The impurity adds ``strength * |site><site|`` to the bath Hamiltonian.  All
results come from the rank-one update of the bare resolvent; the vacancy
(infinite-strength) limit is handled by its own closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _roots, bath as _bath
from .bath import (
    BandStructure,
    SpectralData,
    bath_green_element,
    bath_green_squared_element,
    default_delta,
    detect_bands,
    green_column,
    green_row,
    green_matrix,
)
from .errors import PoleError, RegimeError

#: Sentinel strength for the infinite-repulsion (deleted-site) impurity.
VACANCY = math.inf

POLE_TOL = 1e-13
NODE_TOL = 1e-10


@dataclass(frozen=True)
class ImpuritySpec:
    """Impurity location and strength; ``strength=VACANCY`` deletes the site."""

    site: int
    strength: float

    @property
    def is_vacancy(self) -> bool:
        return math.isinf(self.strength)


@dataclass(frozen=True, eq=False)
class ImpurityBoundState:
    """Photonic bound state split off by the impurity."""

    energy: float
    wavefunction: np.ndarray
    norm_factor: float
    residue_trace: float


@dataclass(frozen=True, eq=False)
class ImpurityScatteringState:
    k_index: int
    energy: float
    vector: np.ndarray
    regular: bool
    residual: float


def impurity_state(s: SpectralData, spec: ImpuritySpec, z: complex) -> np.ndarray:
    """Unnormalized state ``(z - H_B)^-1 |site>``; strength plays no role here."""
    return green_column(s, z, spec.site)


def impurity_pole_function(s: SpectralData, spec: ImpuritySpec, z: complex) -> complex:
    """f(z) = 1/strength - <site|(z - H_B)^-1|site>; its zeros are the impurity poles."""
    if spec.is_vacancy:
        raise RegimeError("vacancy impurity: pole function degenerates, use vacancy_green")
    if spec.strength == 0.0:
        raise RegimeError("zero impurity strength has no pole function")
    return 1.0 / spec.strength - bath_green_element(s, z, spec.site, spec.site)


def impurity_green(s: SpectralData, spec: ImpuritySpec, z: complex) -> np.ndarray:
    """Resolvent of bath plus impurity via the rank-one update of G_B.

    For finite strength this is ``G_B + |psi(z)><site|G_B / f(z)`` with
    ``psi(z) = G_B(z)|site>``; the vacancy limit delegates to
    :func:`vacancy_green`.
    """
    if spec.is_vacancy:
        return vacancy_green(s, spec.site, z)
    if spec.strength == 0.0:
        return green_matrix(s, z)
    f = impurity_pole_function(s, spec, z)
    if abs(f) < POLE_TOL:
        raise PoleError(f"f(z)={f:.3e} at z={z}: impurity resolvent pole")
    psi = green_column(s, z, spec.site)
    row = green_row(s, z, spec.site)
    return green_matrix(s, z) + np.outer(psi, row) / f


def vacancy_green(s: SpectralData, site: int, z: complex) -> np.ndarray:
    """Infinite-strength limit: resolvent of the bath with ``site`` removed.

    ``G_B - |psi><site|G_B / gamma`` with ``gamma = <site|G_B|site>``; the row
    and column at ``site`` vanish identically and the rest equals the
    resolvent of the deleted-site bath.
    """
    gamma = bath_green_element(s, z, site, site)
    if abs(gamma) < POLE_TOL:
        raise PoleError(f"<site|G_B|site>={gamma:.3e} at z={z}: vacancy resolvent pole")
    psi = green_column(s, z, site)
    row = green_row(s, z, site)
    out = green_matrix(s, z) - np.outer(psi, row) / gamma
    # The projected row/col are exact zeros up to roundoff; pin them.
    out[site, :] = 0.0
    out[:, site] = 0.0
    return out


def _pole_search_intervals(s: SpectralData, spec: ImpuritySpec, bands: BandStructure):
    """Finite search intervals: every gap, with tail bounds set by the strength."""
    w_min = float(s.eigenvalues[0])
    w_max = float(s.eigenvalues[-1])
    intervals = []
    for lo, hi in bands.gaps:
        if math.isinf(lo) and math.isinf(hi):
            continue
        if math.isinf(lo):
            if spec.is_vacancy or spec.strength > 0.0:
                continue  # tail root only exists on the attractive side
            intervals.append((w_min - abs(spec.strength) - 1.0, hi, False, True))
        elif math.isinf(hi):
            if spec.is_vacancy or spec.strength < 0.0:
                continue
            intervals.append((lo, w_max + spec.strength + 1.0, True, False))
        else:
            intervals.append((lo, hi, True, True))
    return intervals


def solve_impurity_bound_state(
    s: SpectralData,
    spec: ImpuritySpec,
    bands: BandStructure | None = None,
    n_grid: int = 512,
    xtol: float = 1e-12,
):
    """All in-gap bound states of the impurity problem.

    Scans each gap of the band structure on a grid, brackets sign changes of
    the monotone pole function and bisects.  For finite strength the single
    out-of-band root (above for repulsive, below for attractive) is included;
    the vacancy spectrum interlaces the bath one, so it has no tail roots.
    """
    if bands is None:
        bands = detect_bands(s)
    if not spec.is_vacancy and spec.strength == 0.0:
        return []
    weights = np.abs(s.eigenvectors[spec.site, :]) ** 2
    keep = weights > 1e-24
    offset = 0.0 if spec.is_vacancy else 1.0 / spec.strength
    intervals = _pole_search_intervals(s, spec, bands)
    roots = _roots.pole_function_roots(
        weights[keep], s.eigenvalues[keep], 0.0, offset, intervals, n_grid=n_grid, xtol=xtol
    )
    states = []
    for w in roots:
        g2 = bath_green_squared_element(s, w, spec.site, spec.site).real
        if g2 <= 0.0:
            continue
        norm_factor = 1.0 / math.sqrt(g2)
        psi = green_column(s, w, spec.site)
        wavefunction = norm_factor * psi
        residue_trace = float(np.vdot(psi, psi).real / g2)
        states.append(ImpurityBoundState(
            energy=float(w),
            wavefunction=wavefunction,
            norm_factor=norm_factor,
            residue_trace=residue_trace,
        ))
    return states


def impurity_scattering_state(
    s: SpectralData,
    spec: ImpuritySpec,
    k_index: int,
    delta: float | None = None,
) -> ImpurityScatteringState:
    """Scattering eigenstate built on bath mode ``k_index``.

    Regular modes pick up the T-matrix correction evaluated just above the
    real axis; modes where f vanishes (a node of the mode at the impurity
    site, with the right energy) pass through untouched.
    """
    if not (0 <= k_index < s.n_sites):
        raise ValueError(f"k_index {k_index} out of range")
    if delta is None:
        delta = default_delta(s)
    omega = float(s.eigenvalues[k_index])
    mode = np.array(s.eigenvectors[:, k_index])

    f_real = None
    if not spec.is_vacancy and spec.strength == 0.0:
        f_real = math.inf  # no impurity: every mode is untouched but regular
    else:
        try:
            f_real = impurity_pole_function(s, spec, complex(omega)) if not spec.is_vacancy \
                else -bath_green_element(s, complex(omega), spec.site, spec.site)
        except PoleError:
            f_real = None  # genuine pole of f at omega: the regular branch applies

    if f_real is not None and abs(f_real) < NODE_TOL:
        vector = mode
        regular = False
    else:
        regular = True
        z = omega + 1j * delta
        if spec.is_vacancy:
            f_z = -bath_green_element(s, z, spec.site, spec.site)
        elif spec.strength == 0.0:
            f_z = None
        else:
            f_z = impurity_pole_function(s, spec, z)
        if f_z is None:
            vector = mode
        else:
            psi = green_column(s, z, spec.site)
            vector = mode + (mode[spec.site] / f_z) * psi

    residual = _scattering_residual(s, spec, omega, vector)
    return ImpurityScatteringState(
        k_index=k_index, energy=omega, vector=vector, regular=regular, residual=residual
    )


def _scattering_residual(s, spec, omega, vector):
    h = s.source.to_matrix()
    if spec.is_vacancy:
        # The vacancy state lives on the deleted lattice: measure the residual
        # away from the removed site.
        r = h @ vector - omega * vector
        r[spec.site] = 0.0
        return float(np.linalg.norm(r))
    h[spec.site, spec.site] += spec.strength
    return float(np.linalg.norm(h @ vector - omega * vector))
