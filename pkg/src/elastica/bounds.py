"""Universal eigenvalue bounds for the vector operator Δu + α grad(div u).

Everything here is a pure function of an eigenvalue list (a :class:`Spectrum`)
and the pair (n, α).  The central quantity is the Yang-type coefficient

    C(n, α) = min{ 4(n+α)/n²,  A(n, α)/(n+α) },

where A(n, α) switches branch at α* = (n+2+√((n+2)²+16))/2:

    A = 4 + α²                          for α ≥ α*,
    A = (8 + (n+2)α) / (1 + L)          for α < α*,
    L = (4 + (n+2)α − α²) n² / (4(n+α)²)  (> 0 below the threshold).

The quadratic inequality  Σᵢ(σ_{k+1}−σᵢ)² ≤ C Σᵢ(σ_{k+1}−σᵢ)σᵢ  then yields
explicit upper bounds on σ_{k+1}, on eigenvalue gaps and on index growth;
the comparator bounds of Levine–Protter, Hook, Levitin–Parnovski and
Cheng–Yang are provided alongside for dominance checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SPECTRUM_SOURCES = ("synthetic", "computed")
VERDICTS = ("pass", "marginal", "fail", "skip")
RECORD_KINDS = ("upper_next", "lower_sum", "gap", "sum_ratio", "low_order",
                "index_growth", "quadratic_form",
                # spherical-cap records emitted by the harness
                "cap_lower", "cap_strict_lower", "cap_equality")

#: conservative admissible constant in the index-growth bound (the true
#: dimension-dependent constant is only known to be <= 4)
INDEX_GROWTH_CONSTANT = 4.0


class SpectrumError(ValueError):
    """Invalid spectrum data or an inconsistent synthetic spectrum."""


class DegenerateGapError(ValueError):
    """A ratio bound was requested at a vanishing eigenvalue gap."""


@dataclass(frozen=True)
class Spectrum:
    """Ordered eigenvalue list with provenance.

    ``values`` must be strictly positive and non-decreasing.  Computed
    spectra carry per-eigenvalue residual norms and the solver tolerance
    they were required to meet.
    """

    dim: int
    alpha: float
    values: np.ndarray
    source: str = "synthetic"
    mesh: str | None = None
    residuals: np.ndarray | None = None
    solver_tol: float | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if self.dim < 1:
            raise SpectrumError("dimension must be >= 1")
        if self.alpha < 0:
            raise SpectrumError("alpha must be non-negative")
        if values.ndim != 1 or values.size < 1:
            raise SpectrumError("need at least one eigenvalue")
        if not np.all(values > 0):
            raise SpectrumError("eigenvalues must be positive")
        if np.any(np.diff(values) < 0):
            raise SpectrumError("eigenvalues must be non-decreasing")
        if self.source not in SPECTRUM_SOURCES:
            raise SpectrumError(f"unknown source tag {self.source!r}")
        if self.residuals is not None:
            residuals = np.asarray(self.residuals, dtype=np.float64)
            object.__setattr__(self, "residuals", residuals)
            if residuals.shape != values.shape:
                raise SpectrumError("residuals must match values in length")
            if self.source == "computed" and self.solver_tol is not None \
                    and np.any(residuals > self.solver_tol):
                raise SpectrumError("residuals exceed the recorded solver tolerance")

    def __len__(self):
        return int(self.values.size)


@dataclass(frozen=True)
class DomainGeometry:
    """Box domain data needed by volume-dependent bounds."""

    dim: int
    edges: tuple[float, ...]
    volume: float = field(init=False)

    def __post_init__(self):
        edges = tuple(float(e) for e in self.edges)
        object.__setattr__(self, "edges", edges)
        if self.dim != len(edges) or self.dim < 1:
            raise ValueError("edge count must equal the dimension")
        if any(e <= 0 for e in edges):
            raise ValueError("edges must be positive")
        object.__setattr__(self, "volume", float(np.prod(edges)))


@dataclass(frozen=True)
class BoundRecord:
    """One evaluated inequality.

    ``slack`` is signed so that nonneg means the inequality holds: for upper
    bounds it is bound − measured, for lower bounds measured − bound.
    """

    name: str
    kind: str
    k: int
    bound_value: float
    measured_value: float
    slack: float
    verdict: str
    note: str = ""


@dataclass(frozen=True)
class VerifyTolerance:
    """Slack policy for verdicts.

    ``rel`` is the base relative band (synthetic spectra default 1e-9);
    ``per_index_rel`` optionally adds a per-eigenvalue relative error budget
    (e.g. a Richardson a-posteriori estimate), of which the maximum over the
    indices entering a record is applied.
    """

    rel: float = 1e-9
    per_index_rel: np.ndarray | None = None

    def band(self, k, scale):
        rel = self.rel
        if self.per_index_rel is not None:
            upto = min(k + 1, len(self.per_index_rel))
            rel = max(rel, float(np.max(self.per_index_rel[:upto])))
        return rel * max(abs(scale), 1e-300)


def _verdict(slack, band):
    if slack >= 0:
        return "pass"
    if slack >= -band:
        return "marginal"
    return "fail"


def alpha_threshold(n):
    """Branch point (n+2+sqrt((n+2)^2+16))/2 of the coupling coefficient."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return (n + 2 + math.sqrt((n + 2) ** 2 + 16)) / 2.0


def blend_weight(n, alpha):
    """The positive factor L = (4+(n+2)α−α²)n² / (4(n+α)²).

    Only defined below the branch threshold; above it the quantity would be
    non-positive and the caller is on the wrong branch.
    """
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    if alpha >= alpha_threshold(n):
        raise ValueError(
            f"blend weight requested at alpha={alpha} >= threshold "
            f"{alpha_threshold(n)} for n={n}")
    return (4.0 + (n + 2) * alpha - alpha ** 2) * n ** 2 / (4.0 * (n + alpha) ** 2)


def coupling_coefficient(n, alpha):
    """The branchwise coefficient A(n, α); continuous across the threshold."""
    if n < 1 or alpha < 0:
        raise ValueError("need n >= 1, alpha >= 0")
    if alpha >= alpha_threshold(n):
        return 4.0 + alpha ** 2
    return (8.0 + (n + 2) * alpha) / (1.0 + blend_weight(n, alpha))


def yang_coefficient(n, alpha):
    """C(n, α) = min{4(n+α)/n², A(n, α)/(n+α)}; equals 4/n at α = 0."""
    return min(4.0 * (n + alpha) / n ** 2,
               coupling_coefficient(n, alpha) / (n + alpha))


def _check_k(spectrum, k, need_next=False):
    if k < 1:
        raise ValueError("k must be >= 1")
    needed = k + 1 if need_next else k
    if needed > len(spectrum):
        raise ValueError(f"need {needed} eigenvalues, spectrum has {len(spectrum)}")


def yang_type_quadratic(spectrum, k):
    """Both sides of Σ(σ_{k+1}−σᵢ)² ≤ C·Σ(σ_{k+1}−σᵢ)σᵢ as (lhs, rhs)."""
    _check_k(spectrum, k, need_next=True)
    sig = spectrum.values
    d = sig[k] - sig[:k]
    c = yang_coefficient(spectrum.dim, spectrum.alpha)
    return float(np.sum(d ** 2)), float(c * np.sum(d * sig[:k]))


def cheng_yang_sum(spectrum, k):
    """Both sides of the Cheng–Yang inequality as (lhs, rhs).

    lhs = Σ(σ_{k+1}−σᵢ), rhs = (2√(n+α)/n)·{Σ(σ_{k+1}−σᵢ)^½ ·
    Σ(σ_{k+1}−σᵢ)^½ σᵢ}^½.
    """
    _check_k(spectrum, k, need_next=True)
    n, alpha = spectrum.dim, spectrum.alpha
    sig = spectrum.values
    d = sig[k] - sig[:k]
    root = np.sqrt(d)
    rhs = (2.0 * math.sqrt(n + alpha) / n) * math.sqrt(
        float(np.sum(root)) * float(np.sum(root * sig[:k])))
    return float(np.sum(d)), rhs


def yang_type_next_upper(spectrum, k):
    """Largest root of k x² − (2+C)S₁ x + (1+C)S₂, an upper bound on σ_{k+1}.

    The root is extracted in the cancellation-safe form because C grows
    linearly in α.
    """
    _check_k(spectrum, k)
    sig = spectrum.values[:k]
    c = yang_coefficient(spectrum.dim, spectrum.alpha)
    s1 = float(np.sum(sig))
    s2 = float(np.sum(sig ** 2))
    a = float(k)
    b = -(2.0 + c) * s1
    cc = (1.0 + c) * s2
    disc = b * b - 4.0 * a * cc
    if disc < 0:
        raise SpectrumError(
            f"negative discriminant at k={k}: the first {k} eigenvalues are "
            "inconsistent with the quadratic eigenvalue inequality")
    q = -0.5 * (b - math.sqrt(disc))  # b < 0, so this is the larger root's numerator
    return q / a


def average_upper(spectrum, k):
    """(1 + C) times the running mean of σ₁..σ_k; upper bound on σ_{k+1}."""
    _check_k(spectrum, k)
    c = yang_coefficient(spectrum.dim, spectrum.alpha)
    return (1.0 + c) * float(np.mean(spectrum.values[:k]))


def gap_upper(spectrum, k):
    """C times the running mean; upper bound on the gap σ_{k+1} − σ_k."""
    _check_k(spectrum, k)
    c = yang_coefficient(spectrum.dim, spectrum.alpha)
    return c * float(np.mean(spectrum.values[:k]))


def levitin_parnovski_gap(spectrum, k):
    """Gap bound max{4+α², (n+2)α+8}/(n+α) times the running mean."""
    _check_k(spectrum, k)
    n, alpha = spectrum.dim, spectrum.alpha
    coeff = max(4.0 + alpha ** 2, (n + 2) * alpha + 8.0) / (n + alpha)
    return coeff * float(np.mean(spectrum.values[:k]))


def hook_sum_ratio(spectrum, k, gap_rtol=1e-8):
    """Hook's trace bound: (lhs, rhs) of Σ σᵢ/(σ_{k+1}−σᵢ) ≥ n²k/(4(n+α)).

    Raises :class:`DegenerateGapError` when σ_{k+1} and σ_k coincide within
    ``gap_rtol`` (the ratio is then undefined, not violated).
    """
    _check_k(spectrum, k, need_next=True)
    sig = spectrum.values
    if sig[k] - sig[k - 1] <= gap_rtol * sig[k]:
        raise DegenerateGapError(
            f"sigma_{k + 1} equals sigma_{k} within tolerance; ratio undefined")
    lhs = float(np.sum(sig[:k] / (sig[k] - sig[:k])))
    n, alpha = spectrum.dim, spectrum.alpha
    rhs = n ** 2 * k / (4.0 * (n + alpha))
    return lhs, rhs


def sphere_surface_measure(n):
    """omega_{n-1} = 2 pi^{n/2} / Gamma(n/2), via log-gamma for large n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.exp(math.log(2.0) + 0.5 * n * math.log(math.pi)
                    - math.lgamma(0.5 * n))


def levine_protter_lower(geometry, k):
    """Lower bound (4π²n/(n+2))·k^{1+2/n}/(V ω_{n−1})^{2/n} on Σᵢ≤k σᵢ."""
    if k < 1:
        raise ValueError("k must be >= 1")
    n = geometry.dim
    measure = geometry.volume * sphere_surface_measure(n)
    return (4.0 * math.pi ** 2 * n / (n + 2)) * k ** (1.0 + 2.0 / n) \
        / measure ** (2.0 / n)


def low_order_check(spectrum, tolerance=None):
    """Check σ₂+⋯+σ_{n+1} ≤ (n + 4(1+α))σ₁ and return the record."""
    n = spectrum.dim
    if len(spectrum) < n + 1:
        raise SpectrumError(
            f"low-order bound needs {n + 1} eigenvalues, have {len(spectrum)}")
    sig = spectrum.values
    measured = float(np.sum(sig[1:n + 1]))
    bound = (n + 4.0 * (1.0 + spectrum.alpha)) * sig[0]
    slack = bound - measured
    tol = tolerance or VerifyTolerance()
    band = tol.band(n + 1, max(abs(bound), abs(measured)))
    return BoundRecord("low_order", "low_order", n + 1, bound, measured,
                       slack, _verdict(slack, band))


def index_growth_upper(sigma1, n, alpha, k):
    """Bound (1 + a(n+α)/n²)·k^{2(n+α)/n²}·σ₁ with the ceiling a = 4.

    Conservative: the sharp dimension constant is not available, only its
    ceiling, so the bound is valid but not tight.
    """
    if sigma1 <= 0 or k < 1 or n < 1 or alpha < 0:
        raise ValueError("need sigma1 > 0, k >= 1, n >= 1, alpha >= 0")
    a = INDEX_GROWTH_CONSTANT
    exponent = 2.0 * (n + alpha) / n ** 2
    return (1.0 + a * (n + alpha) / n ** 2) * k ** exponent * sigma1


def chebyshev_sum_check(a, b, s):
    """(lhs, rhs) of the Chebyshev-type product bound.

    For non-negative a non-increasing, b non-decreasing, s >= 1:
    (Σ aᵢ^s)(Σ aᵢ² bᵢ) <= (Σ aᵢ^{s+1})(Σ aᵢ bᵢ); equality at k = 1 and for
    constant a.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size < 1:
        raise ValueError("a and b must be 1D arrays of equal positive length")
    if np.any(a < 0) or np.any(b < 0):
        raise ValueError("sequences must be non-negative")
    if np.any(np.diff(a) > 0):
        raise ValueError("a must be non-increasing")
    if np.any(np.diff(b) < 0):
        raise ValueError("b must be non-decreasing")
    if s < 1:
        raise ValueError("s must be >= 1")
    lhs = float(np.sum(a ** s)) * float(np.sum(a ** 2 * b))
    rhs = float(np.sum(a ** (s + 1))) * float(np.sum(a * b))
    return lhs, rhs


def _upper_record(name, kind, k, bound, measured, tol):
    slack = bound - measured
    band = tol.band(k, max(abs(bound), abs(measured)))
    return BoundRecord(name, kind, k, bound, measured, slack,
                       _verdict(slack, band))


def _lower_record(name, kind, k, bound, measured, tol):
    slack = measured - bound
    band = tol.band(k, max(abs(bound), abs(measured)))
    return BoundRecord(name, kind, k, bound, measured, slack,
                       _verdict(slack, band))


def evaluate_all(spectrum, k_max, geometry=None, tolerance=None):
    """Evaluate every bound for k = 1..k_max and return the records.

    Per-record failures (degenerate gaps, missing data) become skip entries;
    the batch never aborts.  Volume-dependent records require ``geometry``
    and are skipped without one.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if len(spectrum) < k_max + 1:
        raise SpectrumError(
            f"need {k_max + 1} eigenvalues for k_max={k_max}, "
            f"have {len(spectrum)}")
    tol = tolerance or VerifyTolerance()
    sig = spectrum.values
    records = []

    def guarded(name, kind, k, thunk, lower=False, note=""):
        """thunk returns (bound, measured); exceptions become skip records."""
        try:
            bound, measured = thunk()
        except (DegenerateGapError, SpectrumError, ValueError) as err:
            records.append(BoundRecord(name, kind, k, math.nan, math.nan,
                                       math.nan, "skip", str(err)))
            return
        make = _lower_record if lower else _upper_record
        rec = make(name, kind, k, bound, measured, tol)
        if note:
            rec = BoundRecord(rec.name, rec.kind, rec.k, rec.bound_value,
                              rec.measured_value, rec.slack, rec.verdict,
                              note)
        records.append(rec)

    for k in range(1, k_max + 1):
        gap = float(sig[k] - sig[k - 1])
        guarded("yang_quadratic", "quadratic_form", k,
                lambda k=k: tuple(reversed(yang_type_quadratic(spectrum, k))))
        guarded("cheng_yang", "quadratic_form", k,
                lambda k=k: tuple(reversed(cheng_yang_sum(spectrum, k))))
        guarded("next_upper", "upper_next", k,
                lambda k=k: (yang_type_next_upper(spectrum, k), float(sig[k])))
        guarded("average_upper", "upper_next", k,
                lambda k=k: (average_upper(spectrum, k), float(sig[k])))
        guarded("gap_upper", "gap", k,
                lambda k=k, gap=gap: (gap_upper(spectrum, k), gap))
        guarded("levitin_parnovski_gap", "gap", k,
                lambda k=k, gap=gap: (levitin_parnovski_gap(spectrum, k), gap))
        guarded("hook_sum_ratio", "sum_ratio", k,
                lambda k=k: tuple(reversed(hook_sum_ratio(spectrum, k))),
                lower=True)
        if geometry is not None:
            guarded("levine_protter_sum", "lower_sum", k,
                    lambda k=k: (levine_protter_lower(geometry, k),
                                 float(np.sum(sig[:k]))),
                    lower=True)
        guarded("index_growth", "index_growth", k,
                lambda k=k: (index_growth_upper(
                    float(sig[0]), spectrum.dim, spectrum.alpha, k),
                    float(sig[k])),
                note="conservative constant")

    def low_order_pair():
        rec = low_order_check(spectrum, tol)
        return rec.bound_value, rec.measured_value

    guarded("low_order", "low_order", spectrum.dim + 1, low_order_pair)
    return records
