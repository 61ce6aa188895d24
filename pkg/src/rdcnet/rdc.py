"""Risk-dependent centrality: row sums of exp(zeta * A) on an MST.

The exponential is evaluated through one symmetric eigendecomposition
``A = Q diag(lam) Q^T`` per tree, which then serves every risk level.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from rdcnet.errors import ComputationError
from rdcnet.network import MstTree

SYMMETRY_TOL = 1e-14
SPECTRAL_TOL = 1e-10


@dataclass(frozen=True)
class ZetaGrid:
    values: tuple[float, ...]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.size == 0:
            raise ValueError("zeta grid is empty")
        if np.any(v <= 0) or np.any(v > 1):
            raise ValueError("zeta values must lie in (0, 1]")
        if np.any(np.diff(v) <= 0):
            raise ValueError("zeta grid must be strictly increasing")

    @classmethod
    def from_range(cls, start: float = 0.01, end: float = 1.0, step: float = 0.01) -> ZetaGrid:
        """Inclusive arithmetic grid ``start, start + step, ..., end``."""
        if step <= 0:
            raise ValueError("step must be positive")
        count = int(round((end - start) / step)) + 1
        # rounding to 10 decimals removes accumulated binary error (0.07 instead of 0.07000000000000001)
        return cls(tuple(round(start + k * step, 10) for k in range(count)))

    @classmethod
    def default(cls) -> ZetaGrid:
        return cls.from_range(0.01, 1.0, 0.01)

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns are orthonormal eigenvectors

    def reconstruct(self) -> np.ndarray:
        q = self.eigenvectors
        return (q * self.eigenvalues) @ q.T


def spectral_decompose(a: np.ndarray) -> SpectralDecomposition:
    """Eigendecomposition of a real symmetric matrix, eigenvalues descending."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.size and np.max(np.abs(a - a.T)) >= SYMMETRY_TOL:
        raise ValueError("matrix is not symmetric")
    lam, q = np.linalg.eigh(a)
    lam, q = lam[::-1].copy(), q[:, ::-1].copy()
    decomp = SpectralDecomposition(lam, q)
    n = a.shape[0]
    if n:
        ortho = np.max(np.abs(q.T @ q - np.eye(n)))
        recon = np.max(np.abs(decomp.reconstruct() - a))
        if ortho >= SPECTRAL_TOL or recon >= SPECTRAL_TOL * max(1.0, np.max(np.abs(a))):
            raise ComputationError(f"eigendecomposition inaccurate (orthogonality {ortho:.2e}, reconstruction {recon:.2e})")
    return decomp


def expm_scaled(decomp: SpectralDecomposition, zeta: float, include_identity: bool = True) -> np.ndarray:
    """``exp(zeta * A)`` from the decomposition of ``A``.

    With ``include_identity=False`` the result is ``exp(zeta * A) - I``,
    i.e. the walk series without its ``k = 0`` term, evaluated with
    ``expm1`` rather than by subtracting the identity.
    """
    if zeta < 0:
        raise ValueError("zeta must be non-negative")
    q = decomp.eigenvectors
    f = np.exp if include_identity else np.expm1
    m = (q * f(zeta * decomp.eigenvalues)) @ q.T
    return (m + m.T) / 2


@dataclass(frozen=True, eq=False)
class RdcProfile:
    assets: tuple[str, ...]
    zeta_grid: ZetaGrid
    rdc: np.ndarray  # n x len(grid)
    circulability: np.ndarray
    transmissibility: np.ndarray
    spectral_radius: float = 0.0

    def __post_init__(self):
        shape = (len(self.assets), len(self.zeta_grid))
        for name in ("rdc", "circulability", "transmissibility"):
            if getattr(self, name).shape != shape:
                raise ValueError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")

    def column(self, k: int) -> np.ndarray:
        return self.rdc[:, k]


def rdc_profile(tree: MstTree, grid: ZetaGrid | None = None, weighted: bool = False) -> RdcProfile:
    """RDC, circulability and transmissibility of every node over ``grid``.

    RDC of node ``i`` is the ``i``-th row sum of ``exp(zeta * A)``; its
    diagonal part is the circulability and the off-diagonal remainder the
    transmissibility.
    """
    grid = grid or ZetaGrid.default()
    zetas = grid.as_array()
    n = tree.n
    if n == 1:
        warnings.warn(f"single-node tree ({tree.assets[0]}): RDC is identically 1", RuntimeWarning, stacklevel=2)
        ones = np.ones((1, len(zetas)))
        return RdcProfile(tree.assets, grid, ones, ones.copy(), np.zeros_like(ones))

    a = tree.weighted_adjacency() if weighted else tree.adjacency
    decomp = spectral_decompose(a)
    q, lam = decomp.eigenvectors, decomp.eigenvalues
    growth = np.exp(np.outer(lam, zetas))  # n x G
    # row sums: Q diag(e^{z lam}) Q^T 1, for all z at once
    rdc = q @ (growth * (q.T @ np.ones(n))[:, None])
    circ = (q * q) @ growth
    return RdcProfile(tree.assets, grid, rdc, circ, rdc - circ, float(np.max(np.abs(lam))))


def write_rdc_csv(profile: RdcProfile, out: TextIO) -> None:
    out.write("asset,zeta,rdc,circulability,transmissibility\n")
    for i, asset in enumerate(profile.assets):
        for k, z in enumerate(profile.zeta_grid):
            out.write(
                f"{asset},{z:.2f},{profile.rdc[i, k]:.12g},"
                f"{profile.circulability[i, k]:.12g},{profile.transmissibility[i, k]:.12g}\n"
            )
