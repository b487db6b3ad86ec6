"""Weighted defect operators and the expansive/contractive/isometric trichotomy.

The central object is the order-``m`` defect of an operator ``T`` against a
Hermitian weight ``P``:

    delta = sum_{j=0}^{m} (-1)^j C(m, j) T*^j P T^j

``T`` is (m, P)-expansive when the defect is NSD, (m, P)-contractive when it
is PSD, and (m, P)-isometric when it vanishes; the ZERO verdict therefore
classifies as both expansive and contractive.

Every defect is computed twice, via the explicit alternating binomial sum and
via m-fold application of the map ``S -> S - T* S T``, and the two must agree
within tolerance relative to the magnitude of the summed terms.  The
alternating sum is the heart of everything downstream, so a disagreement is a
hard numerical failure, never silently absorbed.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .matrix_core import (
    DEFAULT_TOL,
    ZERO,
    DefinitenessVerdict,
    DomainError,
    HermitianError,
    NumericalFailureError,
    Tolerance,
    adjoint,
    as_matrix,
    definiteness,
    eigenvalues,
    hermitian_part,
    operator_norm,
    spectral_radius,
    sqrt_psd,
)

__all__ = [
    "MAX_ORDER",
    "DefectSpec",
    "DefectResult",
    "defect",
    "defect_tilde",
    "is_p_isometric",
    "is_mp_isometric",
    "seminorm_p",
    "gram_weight",
    "ClassificationRow",
    "ClassificationReport",
    "classify",
]

# Binomial coefficients C(m, j) stay below 2^63 up to this order, so the
# alternating sum never works with inexactly represented coefficients.
MAX_ORDER = 62

EXPANSIVE = "expansive"
CONTRACTIVE = "contractive"
ISOMETRIC = "isometric"


@dataclass(frozen=True)
class DefectSpec:
    """Inputs of a defect computation.

    ``n`` raises the operator to a power before the defect is formed, which
    is how power-stability statements about T^n are evaluated.  The weight
    must be Hermitian but is not required to be PSD.
    """

    t: np.ndarray
    p: np.ndarray
    m: int
    n: int = 1

    def __post_init__(self):
        t = as_matrix(self.t)
        p = as_matrix(self.p)
        if t.shape[0] != t.shape[1]:
            raise DomainError(f"operator must be square, got {t.shape}")
        if p.shape != t.shape:
            raise DomainError(f"weight shape {p.shape} does not match operator shape {t.shape}")
        if not 1 <= self.m <= MAX_ORDER:
            raise DomainError(f"defect order must be in [1, {MAX_ORDER}], got {self.m}")
        if self.n < 1:
            raise DomainError(f"operator power must be >= 1, got {self.n}")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "p", p)


@dataclass(frozen=True)
class DefectResult:
    """A defect matrix with its sign verdict and derived classification.

    ``classification`` always describes the operator's (m, P)-classes in the
    standard sign convention, also on results produced by `defect_tilde`
    where ``delta`` itself carries a flipped sign for odd m.
    """

    delta: np.ndarray
    verdict: DefinitenessVerdict
    classification: frozenset
    cross_check: dict

    def to_json(self) -> dict:
        from .matrix_core import matrix_to_json

        return {
            "delta": matrix_to_json(self.delta),
            "verdict": self.verdict.to_json(),
            "classification": sorted(self.classification),
            "cross_check": dict(self.cross_check),
        }


def _classes_for(verdict: DefinitenessVerdict) -> frozenset:
    classes = set()
    if verdict.is_nsd:
        classes.add(EXPANSIVE)
    if verdict.is_psd:
        classes.add(CONTRACTIVE)
    if verdict.verdict == ZERO:
        classes.add(ISOMETRIC)
    return frozenset(classes)


def _term_scale(t: np.ndarray, p: np.ndarray, m: int) -> float:
    """Magnitude bound (1+||P||) (1+||T||^2)^m of the alternating sum's terms."""
    base = np.float64(1.0 + operator_norm(t) ** 2)
    return float((1.0 + operator_norm(p)) * base**m)


def defect(spec: DefectSpec, tol: Tolerance = DEFAULT_TOL) -> DefectResult:
    """Compute the order-m defect of T^n against the weight P.

    The binomial-sum and iterated-map constructions are cross-checked against
    each other; disagreement raises NumericalFailureError with both residual
    norms attached.
    """
    p = spec.p
    if not np.array_equal(p, adjoint(p)):
        defect_norm = float(np.linalg.norm(p - adjoint(p), 2)) if p.size else 0.0
        if defect_norm > tol.gate(operator_norm(p)):
            raise HermitianError(defect_norm)
        p = hermitian_part(p)
    t = np.linalg.matrix_power(spec.t, spec.n) if spec.n > 1 else spec.t
    ta = adjoint(t)

    term = p
    binom_sum = p.astype(np.complex128, copy=True)
    for j in range(1, spec.m + 1):
        term = ta @ term @ t
        binom_sum += ((-1) ** j * comb(spec.m, j)) * term

    iterated = p
    for _ in range(spec.m):
        iterated = iterated - ta @ iterated @ t

    scale = _term_scale(t, p, spec.m)
    disagreement = float(np.linalg.norm(binom_sum - iterated, 2)) if p.size else 0.0
    threshold = tol.gate(scale)
    cross_check = {
        "disagreement": disagreement,
        "threshold": threshold,
        "term_scale": scale,
    }
    if disagreement > threshold:
        raise NumericalFailureError("defect cross-check disagreement", cross_check)

    delta = hermitian_part(binom_sum)
    verdict = definiteness(delta, tol)
    return DefectResult(delta, verdict, _classes_for(verdict), cross_check)


def defect_tilde(spec: DefectSpec, tol: Tolerance = DEFAULT_TOL) -> DefectResult:
    """The sign-flipped defect (-1)^m * delta, without recomputation.

    For even m this coincides with `defect`; for odd m the returned matrix
    and its verdict flip sign while the classification still reports the
    operator's (m, P)-classes.
    """
    base = defect(spec, tol)
    if spec.m % 2 == 0:
        return base
    flipped = DefinitenessVerdict(
        is_hermitian=base.verdict.is_hermitian,
        min_eig=-base.verdict.max_eig,
        max_eig=-base.verdict.min_eig,
        verdict={"PSD": "NSD", "NSD": "PSD"}.get(base.verdict.verdict, base.verdict.verdict),
    )
    return DefectResult(-base.delta, flipped, base.classification, base.cross_check)


def _require_psd_weight(p, tol: Tolerance) -> np.ndarray:
    p = as_matrix(p)
    verdict = definiteness(p, tol)
    if not verdict.is_psd:
        raise DomainError(f"weight must be PSD, got verdict {verdict.verdict}")
    return p


def is_p_isometric(t, p, tol: Tolerance = DEFAULT_TOL) -> bool:
    """True iff T*PT = P within rel_eps * (1 + ||P||)."""
    t = as_matrix(t)
    p = _require_psd_weight(p, tol)
    residual = float(np.linalg.norm(adjoint(t) @ p @ t - p, 2)) if p.size else 0.0
    return residual <= tol.rel_eps * (1.0 + operator_norm(p))


def is_mp_isometric(spec: DefectSpec, tol: Tolerance = DEFAULT_TOL) -> bool:
    """True iff the order-m defect vanishes (verdict ZERO)."""
    return defect(spec, tol).verdict.verdict == ZERO


def seminorm_p(x, p, tol: Tolerance = DEFAULT_TOL) -> float:
    """The weight-induced seminorm ||P^{1/2} x||."""
    p = _require_psd_weight(p, tol)
    vec = np.asarray(x, dtype=np.complex128).reshape(-1)
    if vec.shape[0] != p.shape[0]:
        raise DomainError(f"vector length {vec.shape[0]} does not match weight dimension {p.shape[0]}")
    return float(np.linalg.norm(sqrt_psd(p, tol) @ vec))


def gram_weight(t, n: int = 1) -> np.ndarray:
    """The canonical weight T*^n T^n."""
    t = as_matrix(t)
    tn = np.linalg.matrix_power(t, n)
    return hermitian_part(adjoint(tn) @ tn)


@dataclass(frozen=True)
class ClassificationRow:
    m: int
    verdict: DefinitenessVerdict
    classes: frozenset

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "verdict": self.verdict.verdict,
            "min_eig": self.verdict.min_eig,
            "max_eig": self.verdict.max_eig,
            "classes": sorted(self.classes),
        }


@dataclass(frozen=True)
class ClassificationReport:
    """Defect verdicts for m = 1..m_max plus a spectral summary."""

    rows: tuple
    p_isometric: bool | None
    operator_norm: float
    spectral_radius: float
    eigenvalue_moduli: tuple

    def to_json(self) -> dict:
        return {
            "rows": [row.to_json() for row in self.rows],
            "p_isometric": self.p_isometric,
            "spectral": {
                "operator_norm": self.operator_norm,
                "spectral_radius": self.spectral_radius,
                "eigenvalue_moduli": list(self.eigenvalue_moduli),
            },
        }


def classify(t, p, m_max: int, tol: Tolerance = DEFAULT_TOL) -> ClassificationReport:
    """Tabulate defect verdicts for every order up to ``m_max``.

    ``p_isometric`` is reported only for PSD weights (None otherwise, since
    the P-isometry notion presumes a nonnegative weight).
    """
    if m_max < 1:
        raise DomainError(f"m_max must be >= 1, got {m_max}")
    t = as_matrix(t)
    p = as_matrix(p)
    rows = []
    for m in range(1, m_max + 1):
        result = defect(DefectSpec(t=t, p=p, m=m), tol)
        rows.append(ClassificationRow(m, result.verdict, result.classification))
    try:
        p_isometric = is_p_isometric(t, p, tol)
    except DomainError:
        p_isometric = None
    moduli = tuple(sorted((float(abs(z)) for z in eigenvalues(t)), reverse=True))
    return ClassificationReport(
        rows=tuple(rows),
        p_isometric=p_isometric,
        operator_norm=operator_norm(t),
        spectral_radius=spectral_radius(t),
        eigenvalue_moduli=moduli,
    )
