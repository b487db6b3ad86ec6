"""Dense complex matrix primitives.

Everything downstream (decompositions, defect operators, theorem checks)
works on plain ``numpy`` arrays of dtype complex128.  This module owns the
shared conventions:

* tolerance handling (relative to the spectral scale, with an absolute floor),
* Hermiticity and definiteness decisions,
* PSD square roots and the Moore-Penrose pseudo-inverse,
* the numerical-rank cutoff ``sigma < max(rel_eps * sigma_max, abs_eps)``,
* 2x2 block composition/splitting,
* the JSON wire format for matrices.

All functions are pure: inputs are never mutated and there is no module
state, so values can be shared freely across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "OplabError",
    "DimensionError",
    "HermitianError",
    "DomainError",
    "NumericalFailureError",
    "PreconditionError",
    "MatrixFormatError",
    "Tolerance",
    "DEFAULT_TOL",
    "DefinitenessVerdict",
    "as_matrix",
    "adjoint",
    "operator_norm",
    "spectral_radius",
    "eigenvalues",
    "is_hermitian",
    "hermitian_part",
    "definiteness",
    "sqrt_psd",
    "moore_penrose",
    "numerical_rank",
    "block_compose",
    "block_split",
    "matrix_to_json",
    "matrix_from_json",
]

PSD = "PSD"
NSD = "NSD"
ZERO = "ZERO"
INDEFINITE = "INDEFINITE"


class OplabError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(OplabError):
    """Non-square input or non-conformable block dimensions."""


class HermitianError(OplabError):
    """Input fails the Hermiticity gate; carries the defect norm."""

    def __init__(self, defect_norm: float):
        super().__init__(f"matrix is not Hermitian: ||M - M*|| = {defect_norm:.3e}")
        self.defect_norm = defect_norm


class DomainError(OplabError):
    """Input is outside the mathematical domain of the operation."""


class NumericalFailureError(OplabError):
    """A computation produced residuals beyond the accepted bound."""

    def __init__(self, message: str, residuals: dict):
        super().__init__(f"{message}: {residuals}")
        self.residuals = residuals


class PreconditionError(OplabError):
    """A stated precondition of a verifier or generator is violated."""


class MatrixFormatError(OplabError):
    """Matrix JSON payload violates the wire format."""


@dataclass(frozen=True)
class Tolerance:
    """Relative spectral tolerance with an absolute floor.

    ``rel_eps`` scales with the magnitude of the quantity under test and
    ``abs_eps`` guards decisions near zero.  The defaults realize the
    exact order relations of the underlying theory in double precision.
    """

    rel_eps: float = 1e-10
    abs_eps: float = 1e-12

    def __post_init__(self):
        if self.rel_eps < 0 or self.abs_eps < 0:
            raise ValueError("tolerances must be nonnegative")

    def gate(self, scale: float) -> float:
        """Absolute threshold for a residual living at magnitude ``scale``."""
        return self.rel_eps * scale + self.abs_eps


DEFAULT_TOL = Tolerance()


def as_matrix(m) -> np.ndarray:
    """Validate and convert to a 2-D complex128 array with finite entries."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got ndim={a.ndim}")
    if a.size and not np.all(np.isfinite(a)):
        raise DomainError("matrix entries must be finite")
    return a


def _require_square(a: np.ndarray) -> np.ndarray:
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    return a


def adjoint(m: np.ndarray) -> np.ndarray:
    return np.conjugate(m.T)


def operator_norm(m) -> float:
    """Largest singular value (0.0 for an empty matrix)."""
    a = as_matrix(m)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def spectral_radius(m) -> float:
    """max |lambda| over the spectrum (0.0 for an empty matrix)."""
    a = _require_square(as_matrix(m))
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(a))))


def eigenvalues(m) -> np.ndarray:
    """Full spectrum of a square matrix, unordered."""
    a = _require_square(as_matrix(m))
    return np.linalg.eigvals(a)


def is_hermitian(m, tol: Tolerance = DEFAULT_TOL) -> bool:
    a = _require_square(as_matrix(m))
    if a.size == 0:
        return True
    defect = float(np.linalg.norm(a - adjoint(a), 2))
    return defect <= tol.gate(float(np.linalg.norm(a, 2)))


def hermitian_part(m) -> np.ndarray:
    a = _require_square(as_matrix(m))
    return (a + adjoint(a)) / 2.0


@dataclass(frozen=True)
class DefinitenessVerdict:
    """Sign classification of a Hermitian matrix.

    ``ZERO`` means the matrix is both PSD and NSD within tolerance, i.e.
    numerically zero on the spectral scale.
    """

    is_hermitian: bool
    min_eig: float
    max_eig: float
    verdict: str

    @property
    def is_psd(self) -> bool:
        return self.verdict in (PSD, ZERO)

    @property
    def is_nsd(self) -> bool:
        return self.verdict in (NSD, ZERO)

    def to_json(self) -> dict:
        return {
            "is_hermitian": self.is_hermitian,
            "min_eig": self.min_eig,
            "max_eig": self.max_eig,
            "verdict": self.verdict,
        }


def definiteness(m, tol: Tolerance = DEFAULT_TOL) -> DefinitenessVerdict:
    """Classify a Hermitian matrix as PSD / NSD / ZERO / INDEFINITE.

    The matrix is symmetrized as (M + M*)/2 before the eigenanalysis; inputs
    whose Hermiticity defect exceeds the tolerance are rejected.  The verdict
    thresholds are relative to the spectral scale max(|min_eig|, |max_eig|, 1).
    """
    a = _require_square(as_matrix(m))
    if a.size == 0:
        return DefinitenessVerdict(True, 0.0, 0.0, ZERO)
    defect = float(np.linalg.norm(a - adjoint(a), 2))
    if defect > tol.gate(float(np.linalg.norm(a, 2))):
        raise HermitianError(defect)
    w = np.linalg.eigvalsh(hermitian_part(a))
    lo, hi = float(w[0]), float(w[-1])
    thr = tol.gate(max(abs(lo), abs(hi), 1.0))
    psd = lo >= -thr
    nsd = hi <= thr
    if psd and nsd:
        verdict = ZERO
    elif psd:
        verdict = PSD
    elif nsd:
        verdict = NSD
    else:
        verdict = INDEFINITE
    return DefinitenessVerdict(True, lo, hi, verdict)


def sqrt_psd(m, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Hermitian PSD square root; eigenvalues negative within tolerance are clamped.

    Raises DomainError on indefinite or negative input.
    """
    a = _require_square(as_matrix(m))
    verdict = definiteness(a, tol)
    if not verdict.is_psd:
        raise DomainError(f"matrix is not PSD (verdict {verdict.verdict}, min_eig {verdict.min_eig:.3e})")
    if a.size == 0:
        return a.copy()
    w, v = np.linalg.eigh(hermitian_part(a))
    w = np.clip(w, 0.0, None)
    s = (v * np.sqrt(w)) @ adjoint(v)
    return hermitian_part(s)


def moore_penrose(m, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose pseudo-inverse with the shared rank cutoff."""
    a = as_matrix(m)
    if a.size == 0:
        return np.zeros((a.shape[1], a.shape[0]), dtype=np.complex128)
    u, s, vh = np.linalg.svd(a)
    cutoff = max(tol.rel_eps * float(s[0]), tol.abs_eps)
    inv = np.zeros_like(s)
    kept = s > cutoff
    inv[kept] = 1.0 / s[kept]
    k = s.size
    return adjoint(vh)[:, :k] @ (inv[:, None] * adjoint(u)[:k, :])


def numerical_rank(m, tol: Tolerance = DEFAULT_TOL) -> int:
    """Number of singular values above max(rel_eps * sigma_max, abs_eps)."""
    rank, _ = _rank_with_cliff(as_matrix(m), tol)
    return rank


def _rank_with_cliff(a: np.ndarray, tol: Tolerance) -> tuple[int, bool]:
    """Rank plus a flag marking singular values within 10x of the cutoff."""
    if a.size == 0:
        return 0, False
    s = np.linalg.svd(a, compute_uv=False)
    cutoff = max(tol.rel_eps * float(s[0]), tol.abs_eps)
    near = bool(np.any((s > cutoff / 10.0) & (s < cutoff * 10.0)))
    return int(np.count_nonzero(s > cutoff)), near


def block_compose(blocks) -> np.ndarray:
    """Assemble [[a, b], [c, d]] into one matrix; blocks may be empty."""
    (a, b), (c, d) = blocks
    a, b, c, d = (as_matrix(x) for x in (a, b, c, d))
    r0, c0 = a.shape
    r1, c1 = d.shape
    if b.shape != (r0, c1) or c.shape != (r1, c0):
        raise DimensionError(
            f"non-conformable blocks: {a.shape}, {b.shape}, {c.shape}, {d.shape}"
        )
    out = np.zeros((r0 + r1, c0 + c1), dtype=np.complex128)
    out[:r0, :c0] = a
    out[:r0, c0:] = b
    out[r0:, :c0] = c
    out[r0:, c0:] = d
    return out


def block_split(m, d1: int) -> list[list[np.ndarray]]:
    """Split a square matrix at row/column ``d1`` into a 2x2 grid."""
    a = _require_square(as_matrix(m))
    if not 0 < d1 < a.shape[0]:
        raise DimensionError(f"split index {d1} outside (0, {a.shape[0]})")
    return [
        [a[:d1, :d1].copy(), a[:d1, d1:].copy()],
        [a[d1:, :d1].copy(), a[d1:, d1:].copy()],
    ]


def matrix_to_json(m) -> dict:
    """Serialize to the wire format {"rows", "cols", "data": [[[re, im], ...], ...]}."""
    a = as_matrix(m)
    rows, cols = a.shape
    data = [[[float(a[i, j].real), float(a[i, j].imag)] for j in range(cols)] for i in range(rows)]
    return {"rows": rows, "cols": cols, "data": data}


def matrix_from_json(obj) -> np.ndarray:
    """Parse the wire format, rejecting ragged rows and non-finite numbers."""
    if not isinstance(obj, dict):
        raise MatrixFormatError("matrix payload must be a JSON object")
    try:
        rows, cols, data = obj["rows"], obj["cols"], obj["data"]
    except KeyError as exc:
        raise MatrixFormatError(f"missing matrix field {exc}") from exc
    if not isinstance(rows, int) or not isinstance(cols, int) or rows < 0 or cols < 0:
        raise MatrixFormatError("rows/cols must be nonnegative integers")
    if not isinstance(data, list) or len(data) != rows:
        raise MatrixFormatError(f"expected {rows} rows, got {len(data) if isinstance(data, list) else type(data).__name__}")
    out = np.zeros((rows, cols), dtype=np.complex128)
    for i, row in enumerate(data):
        if not isinstance(row, list) or len(row) != cols:
            raise MatrixFormatError(f"ragged row {i}: expected {cols} entries")
        for j, entry in enumerate(row):
            if not isinstance(entry, list) or len(entry) != 2:
                raise MatrixFormatError(f"entry ({i},{j}) must be a [re, im] pair")
            re, im = entry
            if isinstance(re, bool) or isinstance(im, bool) or not isinstance(re, (int, float)) or not isinstance(im, (int, float)):
                raise MatrixFormatError(f"entry ({i},{j}) must hold two numbers")
            if not (math.isfinite(re) and math.isfinite(im)):
                raise MatrixFormatError(f"entry ({i},{j}) is not finite")
            out[i, j] = complex(re, im)
    return out
