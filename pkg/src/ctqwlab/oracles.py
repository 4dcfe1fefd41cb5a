"""Independent closed-form references for cross-checking the engine.

Two exactly solvable cases are covered:

* the complete graph, where the search Hamiltonian reduces to a 2x2 block
  and the success probability has an explicit sinusoidal form;
* the corner-glued triangle fractal (dsg), whose Laplacian spectrum is
  generated exactly by the decimation map lam -> (5 +/- sqrt(25 - 4*lam))/2,
  yielding closed forms for the inverse-eigenvalue sums.

Everything here is implemented independently of the spectral engine so the
two routes can disagree when one of them is wrong.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import pi, sqrt

import numpy as np

from .errors import ConfigError

# -- complete graph -----------------------------------------------------------


@dataclass(frozen=True)
class CompleteOracleParams:
    """Derived constants of the N-node complete-graph search at coupling
    gamma: detuning a = N*gamma - 1, Rabi splitting b = sqrt(a^2 + 4*gamma),
    oscillation period 2*pi/b."""

    n: int
    gamma: float
    a: float
    b: float
    period: float

    @classmethod
    def create(cls, n: int, gamma: float) -> "CompleteOracleParams":
        if n < 2:
            raise ConfigError("complete-graph oracle needs n >= 2")
        if not (gamma > 0.0 and np.isfinite(gamma)):
            raise ConfigError("gamma must be positive and finite")
        a = n * gamma - 1.0
        b = sqrt(a * a + 4.0 * gamma)
        return cls(n=n, gamma=gamma, a=a, b=b, period=2.0 * pi / b)


def complete_success(n: int, gamma: float, t) -> np.ndarray | float:
    """Closed-form success probability on the complete graph.

    pi(t) = (1/N) * [1 + (4*gamma*(N-1) / b^2) * sin^2(t*b/2)]
    with b^2 = (N*gamma - 1)^2 + 4*gamma.  At gamma = 1/N this reaches 1 at
    t = pi*sqrt(N)/2 and returns to 1/N at t = pi*sqrt(N).
    """
    p = CompleteOracleParams.create(n, gamma)
    t_arr = np.asarray(t, dtype=np.float64)
    amp = 4.0 * gamma * (n - 1) / (p.b * p.b)
    values = (1.0 + amp * np.sin(t_arr * p.b / 2.0) ** 2) / n
    return float(values) if np.isscalar(t) else values


def complete_success_large_n(n: int, t) -> np.ndarray | float:
    """Large-N limit of the tuned (gamma = 1/N) complete-graph search:
    pi(t) ~= sin^2(t / sqrt(N))."""
    if n < 2:
        raise ConfigError("complete-graph oracle needs n >= 2")
    t_arr = np.asarray(t, dtype=np.float64)
    values = np.sin(t_arr / sqrt(n)) ** 2
    return float(values) if np.isscalar(t) else values


# -- dsg exact spectrum ---------------------------------------------------------


@dataclass(frozen=True)
class ExactSpectrum:
    """Laplacian spectrum as (eigenvalue, multiplicity) pairs, ascending."""

    eigenvalues: np.ndarray     # distinct values, ascending
    multiplicities: np.ndarray  # int64, same length

    @property
    def total(self) -> int:
        return int(self.multiplicities.sum())

    def expand(self) -> np.ndarray:
        """Full eigenvalue array with repetitions, ascending."""
        return np.repeat(self.eigenvalues, self.multiplicities)


def _decimation_children(lam: float) -> tuple[float, float]:
    disc = sqrt(25.0 - 4.0 * lam)
    return (5.0 - disc) / 2.0, (5.0 + disc) / 2.0


def dsg_exact_spectrum(g: int) -> ExactSpectrum:
    """Exact Laplacian spectrum of the generation-g triangle fractal.

    Generation 1 is the triangle with spectrum {0, 3, 3}.  Each following
    generation keeps the simple eigenvalue 0, maps every nonzero eigenvalue
    lam to the decimation pair (5 +/- sqrt(25 - 4*lam))/2 with inherited
    multiplicity, and adds fresh eigenvalues 3 and 5 with multiplicities
    (3^(g-1) + 3)/2 and (3^(g-1) - 1)/2.
    """
    if g < 1:
        raise ConfigError("dsg spectrum needs g >= 1")
    pairs: list[tuple[float, int]] = [(0.0, 1), (3.0, 2)]
    for gen in range(2, g + 1):
        children: list[tuple[float, int]] = [(0.0, 1)]
        for lam, mult in pairs:
            if lam == 0.0:
                continue
            lo, hi = _decimation_children(lam)
            children.append((lo, mult))
            children.append((hi, mult))
        children.append((3.0, (3 ** (gen - 1) + 3) // 2))
        children.append((5.0, (3 ** (gen - 1) - 1) // 2))
        pairs = children
    merged: dict[float, int] = {}
    for lam, mult in pairs:
        if mult == 0:
            continue
        merged[lam] = merged.get(lam, 0) + mult
    values = np.array(sorted(merged), dtype=np.float64)
    mults = np.array([merged[v] for v in values.tolist()], dtype=np.int64)
    spectrum = ExactSpectrum(eigenvalues=values, multiplicities=mults)
    if spectrum.total != 3**g:
        raise AssertionError("decimation bookkeeping lost eigenvalues")
    return spectrum


def decimation_identity_residuals(g: int) -> tuple[float, float]:
    """Largest relative violations of the parent/child inverse-sum
    identities 1/lam+ + 1/lam- = 5/lam and 1/lam+^2 + 1/lam-^2 =
    (25 - 2*lam)/lam^2 over every nonzero eigenvalue of generation g.
    Residuals are scaled by the right-hand sides, which grow like 1/lam
    for the near-zero part of the spectrum."""
    if g < 1:
        raise ConfigError("dsg spectrum needs g >= 1")
    spectrum = dsg_exact_spectrum(g)
    worst1 = worst2 = 0.0
    for lam in spectrum.eigenvalues.tolist():
        if lam == 0.0:
            continue
        lo, hi = _decimation_children(lam)
        rhs1 = 5.0 / lam
        rhs2 = (25.0 - 2.0 * lam) / lam**2
        worst1 = max(worst1, abs(1.0 / lo + 1.0 / hi - rhs1) / abs(rhs1))
        worst2 = max(worst2, abs(1.0 / lo**2 + 1.0 / hi**2 - rhs2)
                     / abs(rhs2))
    return worst1, worst2


def dsg_zeta_closed(g: int) -> tuple[float, float]:
    """Closed forms for the inverse-eigenvalue sums of the generation-g
    triangle fractal:

    zeta1 = (-3 - 4*3^g + 7*5^g) / 30
    zeta2 = (-13 - 14*3^g + 21*5^g + 6*25^g) / 900

    Evaluated in exact integer arithmetic before the final division.
    """
    if g < 1:
        raise ConfigError("dsg zeta needs g >= 1")
    z1_num = -3 - 4 * 3**g + 7 * 5**g
    z2_num = -13 - 14 * 3**g + 21 * 5**g + 6 * 25**g
    return z1_num / 30.0, z2_num / 900.0


def dsg_zeta_direct(g: int) -> tuple[float, float]:
    """Same sums evaluated directly from the exact spectrum, as an
    independent route for equivalence tests."""
    spectrum = dsg_exact_spectrum(g)
    nonzero = spectrum.eigenvalues != 0.0
    lam = spectrum.eigenvalues[nonzero]
    mult = spectrum.multiplicities[nonzero].astype(np.float64)
    return float(np.sum(mult / lam)), float(np.sum(mult / lam**2))


def dsg_zeta_asymptotic(g: int) -> tuple[float, float]:
    """Leading large-g behavior: zeta1 ~ (7/30) * N^(2/dt) and
    zeta2 ~ (1/150) * N^(4/dt) with N = 3^g and dt = 2*log3/log5, i.e.
    N^(2/dt) = 5^g."""
    if g < 1:
        raise ConfigError("dsg zeta needs g >= 1")
    return 7.0 / 30.0 * 5.0**g, 1.0 / 150.0 * 25.0**g
