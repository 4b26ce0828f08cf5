"""Shared builders for randomized test instances.

Random baths come in two flavors: fully random (for resolvent identities)
and two-cluster baths with a guaranteed spectral gap around zero (for
bound-state searches, where an emitter frequency inside a real gap is
needed).  Cluster baths carry an exact BandStructure built from the known
cluster split, so tests never depend on the detection heuristic.
"""

import numpy as np

from dressedgf import BandStructure, BathSpec, diagonalize_bath


def random_bath_spec(rng, n_sites=None):
    if n_sites is None:
        n_sites = int(rng.integers(2, 13))
    freqs = tuple(float(f) for f in rng.uniform(-2.0, 2.0, n_sites))
    edges = []
    seen = set()
    for x in range(n_sites - 1):
        j = rng.uniform(0.2, 1.0) * np.exp(1j * rng.uniform(0.0, 2 * np.pi))
        edges.append((x, x + 1, complex(j)))
        seen.add((x, x + 1))
    for _ in range(int(rng.integers(0, n_sites // 3 + 1))):
        x, xp = sorted(int(v) for v in rng.choice(n_sites, size=2, replace=False))
        if (x, xp) in seen:
            continue
        seen.add((x, xp))
        j = rng.uniform(0.1, 0.5) * np.exp(1j * rng.uniform(0.0, 2 * np.pi))
        edges.append((x, xp, complex(j)))
    return BathSpec(n_sites=n_sites, frequencies=freqs, hoppings=tuple(edges))


def random_gapped_bath(rng, n_low=None, n_high=None):
    """Two weakly hopped level clusters; the gap contains (-0.7, 0.7)."""
    if n_low is None:
        n_low = int(rng.integers(2, 6))
    if n_high is None:
        n_high = int(rng.integers(2, 6))
    freqs = np.concatenate([
        rng.uniform(-2.0, -1.2, n_low),
        rng.uniform(1.2, 2.0, n_high),
    ])
    n = n_low + n_high
    edges = []
    for x in range(n_low - 1):
        edges.append((x, x + 1, complex(rng.uniform(0.05, 0.25))))
    for x in range(n_low, n - 1):
        edges.append((x, x + 1, complex(rng.uniform(0.05, 0.25))))
    spec = BathSpec(
        n_sites=n,
        frequencies=tuple(float(f) for f in freqs),
        hoppings=tuple(edges),
    )
    s = diagonalize_bath(spec)
    ev = s.eigenvalues
    lower = ev[ev < 0.0]
    upper = ev[ev > 0.0]
    bands = BandStructure(
        bands=(
            (float(lower[0]), float(lower[-1])),
            (float(upper[0]), float(upper[-1])),
        ),
        gaps=(
            (-np.inf, float(lower[0])),
            (float(lower[-1]), float(upper[0])),
            (float(upper[-1]), np.inf),
        ),
    )
    return spec, s, bands


def random_z(rng, s, num=1):
    """Complex energies near the spectrum but safely off the real axis."""
    width = max(s.spectral_width, 1.0)
    lo = float(s.eigenvalues[0]) - 0.5 * width
    hi = float(s.eigenvalues[-1]) + 0.5 * width
    re = rng.uniform(lo, hi, num)
    im = rng.uniform(0.05, 0.5, num) * width * rng.choice([-1.0, 1.0], num)
    zs = re + 1j * im
    return complex(zs[0]) if num == 1 else zs


def fidelity(u, v):
    u = np.asarray(u).ravel()
    v = np.asarray(v).ravel()
    return abs(np.vdot(u, v)) / (np.linalg.norm(u) * np.linalg.norm(v))


def eigenspace_fidelity(hamiltonian, energy, vector, cluster_tol=1e-7):
    """Overlap of ``vector`` with the eigenspace of ``hamiltonian`` at ``energy``.

    Degenerate levels are handled by projecting onto the whole near-degenerate
    cluster instead of a single eigenvector.
    """
    evals, evecs = np.linalg.eigh(hamiltonian)
    mask = np.abs(evals - energy) < cluster_tol
    if not np.any(mask):
        return 0.0
    basis = evecs[:, mask]
    vec = np.asarray(vector).ravel()
    vec = vec / np.linalg.norm(vec)
    return float(np.linalg.norm(basis.conj().T @ vec))
