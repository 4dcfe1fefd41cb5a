"""Dense symmetric eigendecomposition with degeneracy bookkeeping, plus the
inverse-eigenvalue sums that control the search transition.

Degenerate subspaces deserve care: individual eigenvectors inside one are
basis-dependent noise, so amplitude information is only ever reported
summed over a degeneracy group.  Groups are detected with a relative
tolerance of 1e-8 times the spectral range.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .errors import (
    DEFAULT_DENSE_GUARD,
    ConfigError,
    NumericalError,
    check_dense_guard,
)
from .graphs import Graph, GraphSpec, NodeId, build, default_target

# Relative spacing below which adjacent eigenvalues are treated as one
# degenerate group.
DEGENERACY_RTOL = 1e-8
# Required symmetry of eigh inputs, relative to the largest entry.
SYMMETRY_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenpairs of a real symmetric matrix, ascending, sign-fixed.

    ``group_index[k]`` labels the degeneracy group of eigenvalue k; groups
    are contiguous runs whose consecutive gaps stay within ``group_tol``.
    """

    eigenvalues: np.ndarray   # (n,) float64, ascending
    eigenvectors: np.ndarray  # (n, n) float64, column k pairs with eigenvalue k
    group_index: np.ndarray   # (n,) int64
    group_tol: float

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def group_count(self) -> int:
        return int(self.group_index[-1]) + 1

    def group_slices(self) -> list[slice]:
        bounds = np.flatnonzero(np.diff(self.group_index)) + 1
        starts = np.concatenate([[0], bounds])
        stops = np.concatenate([bounds, [self.n]])
        return [slice(int(a), int(b)) for a, b in zip(starts, stops)]

    def group_eigenvalues(self) -> np.ndarray:
        """One representative eigenvalue per group (group mean)."""
        return np.array([self.eigenvalues[s].mean() for s in self.group_slices()])

    def multiplicities(self) -> np.ndarray:
        return np.array([s.stop - s.start for s in self.group_slices()],
                        dtype=np.int64)


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Deterministic gauge: make the first non-negligible component of each
    column positive.

    Flips are applied as one broadcast multiply over the whole matrix;
    per-column in-place negation through strided views is deliberately
    avoided (numpy 2.2 miscompiles that pattern for some stride/SIMD
    combinations, silently reading the input contiguously).
    """
    out = np.array(vectors, dtype=np.float64, order="C", copy=True)
    if out.size == 0:
        return out
    mag = np.abs(out)
    lead = np.argmax(mag > 1e-12 * mag.max(axis=0), axis=0)
    lead_vals = out[lead, np.arange(out.shape[1])]
    out *= np.where(lead_vals < 0.0, -1.0, 1.0)
    return out


def _group_eigenvalues(values: np.ndarray) -> tuple[np.ndarray, float]:
    spread = float(values[-1] - values[0]) if values.size else 0.0
    tol = DEGENERACY_RTOL * spread
    if values.size == 0:
        return np.zeros(0, dtype=np.int64), tol
    gaps = np.diff(values)
    labels = np.concatenate([[0], np.cumsum(gaps > tol)]).astype(np.int64)
    return labels, tol


def eigh(matrix: np.ndarray, *,
         dense_guard: int | None = DEFAULT_DENSE_GUARD) -> SpectralDecomposition:
    """Full eigendecomposition of a real symmetric matrix.

    Refuses matrices above the dense guard and inputs that are not
    symmetric to within 1e-12 of their largest entry.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ConfigError("eigh needs a square matrix")
    check_dense_guard(m.shape[0], dense_guard, "dense eigendecomposition")
    scale = max(1.0, float(np.abs(m).max()) if m.size else 0.0)
    asym = float(np.abs(m - m.T).max()) if m.size else 0.0
    if asym > SYMMETRY_RTOL * scale:
        raise ConfigError(
            f"matrix is not symmetric: max asymmetry {asym:.3e} "
            f"exceeds {SYMMETRY_RTOL:.0e} * {scale:.3e}"
        )
    values, vectors = sla.eigh(m)
    vectors = _fix_signs(vectors)
    labels, tol = _group_eigenvalues(values)
    return SpectralDecomposition(
        eigenvalues=values, eigenvectors=vectors, group_index=labels,
        group_tol=tol,
    )


def laplacian_decomposition(graph: Graph, *,
                            dense_guard: int | None = DEFAULT_DENSE_GUARD
                            ) -> SpectralDecomposition:
    """Eigendecomposition of the graph Laplacian L = Z - A."""
    return eigh(graph.laplacian(), dense_guard=dense_guard)


@dataclass(frozen=True, eq=False)
class SpectralSums:
    """Inverse-eigenvalue sums of a Laplacian, target-weighted and plain.

    With a_k = <w|phi_k> over the nonzero Laplacian modes:

    * ``xi1``, ``xi2``  : sum of |a_k|^2 / lam_k^j (j = 1, 2)
    * ``zeta1``, ``zeta2``: sum of 1 / lam_k^j
    * ``max_amp_sq``    : largest per-mode |a_k|^2, with degenerate groups
                          contributing their basis-independent average
                          (group-summed weight / multiplicity)

    Per-group data keep only the group-summed weights; members of a
    degenerate group are not individually meaningful.
    """

    n: int
    target: NodeId
    zeta1: float
    zeta2: float
    xi1: float
    xi2: float
    max_amp_sq: float
    group_eigenvalues: np.ndarray  # per group, ascending; first entry 0
    multiplicities: np.ndarray     # int64 per group
    group_amp_sq: np.ndarray       # summed |a_k|^2 per group


def spectral_sums(dec: SpectralDecomposition, target: NodeId) -> SpectralSums:
    """Compute :class:`SpectralSums` from a Laplacian decomposition.

    The lowest eigenvalue must be the simple zero mode of a connected
    graph; its amplitude must match the uniform value 1/N to 1e-10.
    """
    n = dec.n
    if not (0 <= target < n):
        raise ConfigError(f"target {target} out of range for {n} nodes")
    slices = dec.group_slices()
    zero_scale = max(1.0, float(np.abs(dec.eigenvalues[-1])))
    if abs(dec.eigenvalues[0]) > 1e-9 * zero_scale:
        raise ConfigError("lowest eigenvalue is not zero: not a Laplacian")
    if slices[0].stop - slices[0].start != 1:
        raise ConfigError("zero eigenvalue is degenerate: graph is disconnected")
    amps = dec.eigenvectors[target, :]
    amp_sq = amps * amps
    group_amp_sq = np.array([amp_sq[s].sum() for s in slices])
    mults = dec.multiplicities()
    group_vals = dec.group_eigenvalues()
    uniform = 1.0 / n
    if abs(group_amp_sq[0] - uniform) > 1e-10:
        raise NumericalError(
            f"zero-mode weight {group_amp_sq[0]:.3e} deviates from 1/N"
        )
    lam = dec.eigenvalues[slices[0].stop:]
    w_sq = amp_sq[slices[0].stop:]
    zeta1 = float(np.sum(1.0 / lam))
    zeta2 = float(np.sum(1.0 / lam**2))
    xi1 = float(np.sum(w_sq / lam))
    xi2 = float(np.sum(w_sq / lam**2))
    per_mode = group_amp_sq[1:] / mults[1:]
    return SpectralSums(
        n=n, target=target, zeta1=zeta1, zeta2=zeta2, xi1=xi1, xi2=xi2,
        max_amp_sq=float(per_mode.max()),
        group_eigenvalues=group_vals, multiplicities=mults,
        group_amp_sq=group_amp_sq,
    )


def spectral_sums_for(spec: GraphSpec, target: NodeId | None = None, *,
                      dense_guard: int | None = DEFAULT_DENSE_GUARD
                      ) -> SpectralSums:
    """Convenience: build the graph, decompose its Laplacian, and sum."""
    graph = build(spec)
    if target is None:
        target = default_target(spec)
    return spectral_sums(laplacian_decomposition(graph, dense_guard=dense_guard),
                         target)


# -- amplitude scaling --------------------------------------------------------


@dataclass(frozen=True)
class AlphaFit:
    """Power-law fit max_amp_sq ~= c * N^alpha across one family."""

    c: float
    alpha: float
    residual: float            # rms residual of the log-log fit
    sizes: tuple[int, ...]
    values: tuple[float, ...]  # max_amp_sq per size
    flagged: bool              # True when alpha falls outside [-1, 0)


def loglog_fit(x: Sequence[float], y: Sequence[float]
               ) -> tuple[float, float, float]:
    """Least-squares fit of log(y) = slope * log(x) + intercept.

    Returns (slope, intercept, rms residual in log space).
    """
    lx = np.log(np.asarray(x, dtype=np.float64))
    ly = np.log(np.asarray(y, dtype=np.float64))
    if lx.size < 2:
        raise ConfigError("log-log fit needs at least two points")
    design = np.column_stack([lx, np.ones_like(lx)])
    coef, *_ = np.linalg.lstsq(design, ly, rcond=None)
    resid = ly - design @ coef
    rms = float(np.sqrt(np.mean(resid**2)))
    return float(coef[0]), float(coef[1]), rms


def fit_alpha(specs: Sequence[GraphSpec],
              targets: Sequence[NodeId] | None = None, *,
              dense_guard: int | None = DEFAULT_DENSE_GUARD) -> AlphaFit:
    """Fit the size scaling of the largest target amplitude over a family.

    Needs at least three specs of increasing size.  The fit is flagged
    (but still returned) when alpha leaves [-1, 0), the admissible window
    for the structures handled here.
    """
    if len(specs) < 3:
        raise ConfigError("alpha fit needs at least three graph sizes")
    if targets is None:
        targets = [default_target(s) for s in specs]
    if len(targets) != len(specs):
        raise ConfigError("one target per spec is required")
    sizes: list[int] = []
    values: list[float] = []
    for spec, target in zip(specs, targets):
        sums = spectral_sums_for(spec, target, dense_guard=dense_guard)
        sizes.append(sums.n)
        values.append(sums.max_amp_sq)
    if len(set(sizes)) < len(sizes):
        raise ConfigError("alpha fit needs distinct graph sizes")
    alpha, intercept, rms = loglog_fit(sizes, values)
    flagged = not (-1.0 - 1e-9 <= alpha < 0.0)
    return AlphaFit(c=float(np.exp(intercept)), alpha=alpha, residual=rms,
                    sizes=tuple(sizes), values=tuple(values), flagged=flagged)


# -- export -------------------------------------------------------------------


def spectrum_csv(eigenvalues: np.ndarray, group_index: np.ndarray) -> str:
    """CSV rows ``index,eigenvalue,multiplicity_group`` with 17 significant
    digits, matching the exact-spectrum export format."""
    lines = ["index,eigenvalue,multiplicity_group"]
    for k, (lam, grp) in enumerate(zip(eigenvalues.tolist(),
                                       group_index.tolist())):
        lines.append(f"{k},{lam:.17g},{int(grp)}")
    return "\n".join(lines) + "\n"
