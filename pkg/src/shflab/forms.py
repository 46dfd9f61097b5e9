"""Exterior algebra on a fixed 6-dimensional real vector space.

Forms are stored densely: a degree-k form carries C(6, k) coefficients over
the strictly increasing index tuples in lexicographic order.  Endomorphisms
and metrics are plain ``(6, 6)`` float arrays acting on column vectors in the
fixed basis ``e_1..e_6``; covectors ``e^1..e^6`` are the dual basis.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import comb, sqrt

import numpy as np

from . import _kernels as K
from ._kernels import COMBOS, DIM, POSITION, SIZES

#: Global comparison tolerance.  Modules take an ``eps`` argument defaulting to it.
EPS = 1e-9


class FormError(ValueError):
    """Invalid degree or shape for an exterior-algebra operation."""


@dataclass(frozen=True, eq=False)
class KForm:
    """A degree-``degree`` alternating form with dense coefficients."""

    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        if not 0 <= self.degree <= DIM:
            raise FormError(f"degree must lie in 0..{DIM}, got {self.degree}")
        c = np.array(self.coeffs, dtype=np.float64).reshape(-1)
        if c.shape[0] != SIZES[self.degree]:
            raise FormError(
                f"degree-{self.degree} form needs {SIZES[self.degree]} coefficients, got {c.shape[0]}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # -- construction ----------------------------------------------------
    @classmethod
    def zero(cls, degree: int) -> "KForm":
        return cls(degree, np.zeros(comb(DIM, degree)))

    @classmethod
    def basis(cls, *idx: int) -> "KForm":
        """Monomial ``e^{i1...ik}`` from 1-based indices in any order."""
        return cls.from_terms({tuple(idx): 1.0}, degree=len(idx))

    @classmethod
    def from_terms(cls, terms: dict, degree: int | None = None) -> "KForm":
        """Build from ``{(i1, ..., ik): coeff}`` with 1-based, possibly unsorted indices."""
        if degree is None:
            if not terms:
                raise FormError("degree is required for an empty term list")
            degree = len(next(iter(terms)))
        c = np.zeros(SIZES[degree])
        for idx, val in terms.items():
            if len(idx) != degree:
                raise FormError(f"term {idx} does not have degree {degree}")
            zero_based = tuple(i - 1 for i in idx)
            if any(not 0 <= i < DIM for i in zero_based):
                raise FormError(f"index out of range in {idx}")
            if len(set(zero_based)) < degree:
                continue
            srt = tuple(sorted(zero_based))
            sign = -1.0 if K._inversions(zero_based) % 2 else 1.0
            c[POSITION[degree][srt]] += sign * val
        return cls(degree, c)

    @classmethod
    def top(cls, scale: float = 1.0) -> "KForm":
        return cls(DIM, np.array([scale]))

    # -- arithmetic --------------------------------------------------------
    def _check_same(self, other: "KForm"):
        if not isinstance(other, KForm):
            return NotImplemented
        if other.degree != self.degree:
            raise FormError(f"degree mismatch: {self.degree} vs {other.degree}")
        return None

    def __add__(self, other: "KForm") -> "KForm":
        if self._check_same(other) is NotImplemented:
            return NotImplemented
        return KForm(self.degree, self.coeffs + other.coeffs)

    def __sub__(self, other: "KForm") -> "KForm":
        if self._check_same(other) is NotImplemented:
            return NotImplemented
        return KForm(self.degree, self.coeffs - other.coeffs)

    def __neg__(self) -> "KForm":
        return KForm(self.degree, -self.coeffs)

    def __mul__(self, s: float) -> "KForm":
        return KForm(self.degree, self.coeffs * float(s))

    __rmul__ = __mul__

    def __truediv__(self, s: float) -> "KForm":
        return KForm(self.degree, self.coeffs / float(s))

    def __xor__(self, other: "KForm") -> "KForm":
        return wedge(self, other)

    def __pow__(self, n: int) -> "KForm":
        """Wedge power; ``omega ** 3`` is the top form omega^3."""
        out = KForm(0, np.ones(1))
        for _ in range(n):
            out = wedge(out, self)
        return out

    # -- inspection --------------------------------------------------------
    def terms(self, tol: float = 0.0) -> dict:
        """``{1-based index tuple: coeff}`` for coefficients with ``|c| > tol``."""
        return {
            tuple(i + 1 for i in idx): float(c)
            for idx, c in zip(COMBOS[self.degree], self.coeffs)
            if abs(c) > tol
        }

    def __getitem__(self, idx) -> float:
        if isinstance(idx, int):
            idx = (idx,)
        f = KForm.from_terms({tuple(idx): 1.0}, degree=len(idx))
        return float(np.dot(f.coeffs, self.coeffs))

    def allclose(self, other: "KForm", tol: float = EPS) -> bool:
        return self.degree == other.degree and bool(
            np.max(np.abs(self.coeffs - other.coeffs), initial=0.0) <= tol
        )

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs), initial=0.0))

    def is_zero(self, tol: float = EPS) -> bool:
        return self.max_abs() <= tol

    def __repr__(self) -> str:
        if self.degree == 0:
            return f"KForm(0, {self.coeffs[0]:g})"
        body = " ".join(
            f"{c:+g}*e{''.join(map(str, idx))}" for idx, c in self.terms(1e-15).items()
        )
        return f"KForm({self.degree}, {body or '0'})"

    # -- JSON --------------------------------------------------------------
    def to_json_obj(self, tol: float = 0.0) -> dict:
        return {
            "degree": self.degree,
            "terms": [{"idx": list(idx), "c": c} for idx, c in self.terms(tol).items()],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "KForm":
        k = int(obj["degree"])
        terms = {}
        for t in obj["terms"]:
            idx = tuple(int(i) for i in t["idx"])
            if list(idx) != sorted(idx) or len(set(idx)) != len(idx):
                raise FormError(f"indices must be strictly ascending, got {idx}")
            terms[idx] = terms.get(idx, 0.0) + float(t["c"])
        return cls.from_terms(terms, degree=k)

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json(cls, s: str) -> "KForm":
        return cls.from_json_obj(json.loads(s))


def basis_form(*idx: int) -> KForm:
    return KForm.basis(*idx)


def wedge(a: KForm, b: KForm) -> KForm:
    p, q = a.degree, b.degree
    if p + q > DIM:
        raise FormError(f"wedge of degrees {p} and {q} exceeds dimension {DIM}")
    ia, ib, iout, sign = K.WEDGE_TABLES[(p, q)]
    return KForm(p + q, K.wedge_kernel(a.coeffs, b.coeffs, ia, ib, iout, sign, SIZES[p + q]))


def contract(v, a: KForm) -> KForm:
    """Interior product ``iota_v a`` (insertion into the first slot)."""
    if a.degree == 0:
        raise FormError("cannot contract a vector into a 0-form")
    v = np.asarray(v, dtype=np.float64).reshape(DIM)
    ia, iv, iout, sign = K.CONTRACT_TABLES[a.degree]
    return KForm(a.degree - 1, K.contract_kernel(v, a.coeffs, ia, iv, iout, sign, SIZES[a.degree - 1]))


def pullback_matrix(E: np.ndarray, k: int) -> np.ndarray:
    """Matrix of ``a -> a(E., ..., E.)`` on degree-k coefficient vectors."""
    return K.compound(E, k).T


def act_on_form(E: np.ndarray, a: KForm) -> KForm:
    """``a(E., ..., E.)``; for degree 2 this is ``J sigma = sigma(J., J.)``."""
    return KForm(a.degree, pullback_matrix(E, a.degree) @ a.coeffs)


def derivation_matrix(S: np.ndarray, k: int) -> np.ndarray:
    """Matrix of ``a -> -sum_slots a(.., S., ..)`` on degree-k coefficients."""
    ia, islot, jnew, iout, sign = K.DERIVATION_TABLES[k]
    S = np.ascontiguousarray(S, dtype=np.float64)
    return -K.derivation_kernel(S, ia, islot, jnew, iout, sign, SIZES[k])


def derive_action(S: np.ndarray, a: KForm) -> KForm:
    """``S_* a = -a(S., ., .) - a(., S., .) - ...`` (minus on each slot)."""
    return KForm(a.degree, derivation_matrix(S, a.degree) @ a.coeffs)


# -- metrics ---------------------------------------------------------------

class MetricError(ValueError):
    """Metric is not symmetric or not positive definite."""


def is_symmetric(g: np.ndarray, eps: float = EPS) -> bool:
    g = np.asarray(g, dtype=float)
    return g.shape == (DIM, DIM) and bool(np.max(np.abs(g - g.T)) <= eps)


def is_positive_definite(g: np.ndarray, eps: float = EPS) -> bool:
    if not is_symmetric(g, eps * max(1.0, float(np.max(np.abs(g))))):
        return False
    return bool(np.min(np.linalg.eigvalsh(0.5 * (g + g.T))) > eps)


def _check_metric(g: np.ndarray, eps: float = EPS) -> np.ndarray:
    g = np.asarray(g, dtype=np.float64)
    if g.shape != (DIM, DIM):
        raise MetricError(f"metric must be {DIM}x{DIM}, got {g.shape}")
    if not is_positive_definite(g, eps):
        raise MetricError("metric is degenerate or not positive definite")
    return 0.5 * (g + g.T)


def form_gram(g: np.ndarray, k: int) -> np.ndarray:
    """Induced inner product on degree-k coefficients (covectors use g^-1)."""
    return K.compound(np.linalg.inv(g), k)


def orientation_sign(orient: KForm | float) -> float:
    val = orient.coeffs[0] if isinstance(orient, KForm) else float(orient)
    if isinstance(orient, KForm) and orient.degree != DIM:
        raise FormError("orientation must be a top-degree form")
    if val == 0.0:
        raise FormError("orientation form is zero")
    return 1.0 if val > 0 else -1.0


def volume_form(g: np.ndarray, orient: KForm | float = 1.0) -> KForm:
    """g-unit volume form in the orientation class of ``orient``."""
    g = _check_metric(g)
    return KForm.top(orientation_sign(orient) * sqrt(np.linalg.det(g)))


def star_matrix(g: np.ndarray, k: int, orient: KForm | float = 1.0, eps: float = EPS) -> np.ndarray:
    """Matrix of the Hodge star from degree k to degree 6-k.

    Defined by ``b ^ *a = <b, a>_g vol_g`` for all b.
    """
    g = _check_metric(g, eps)
    s = orientation_sign(orient)
    return s * sqrt(np.linalg.det(g)) * (K.TOP_PAIRING[k].T @ form_gram(g, k))


def hodge_star(g: np.ndarray, orient: KForm | float, a: KForm) -> KForm:
    return KForm(DIM - a.degree, star_matrix(g, a.degree, orient) @ a.coeffs)


def inner(g: np.ndarray, a: KForm, b: KForm) -> float:
    if a.degree != b.degree:
        raise FormError(f"degree mismatch: {a.degree} vs {b.degree}")
    g = _check_metric(g)
    return float(a.coeffs @ form_gram(g, a.degree) @ b.coeffs)


def norm_sq(g: np.ndarray, a: KForm) -> float:
    return inner(g, a, a)


def norm(g: np.ndarray, a: KForm) -> float:
    return sqrt(max(norm_sq(g, a), 0.0))


# -- standard model --------------------------------------------------------

def _std():
    e = KForm.basis
    omega = e(1, 2) + e(3, 4) + e(5, 6)
    psi_plus = e(1, 3, 5) - e(1, 4, 6) - e(2, 3, 6) - e(2, 4, 5)
    psi_minus = e(1, 3, 6) + e(1, 4, 5) + e(2, 3, 5) - e(2, 4, 6)
    J = np.zeros((DIM, DIM))
    for k in range(3):
        J[2 * k + 1, 2 * k] = 1.0
        J[2 * k, 2 * k + 1] = -1.0
    return omega, psi_plus, psi_minus, J


OMEGA_STD, PSI_PLUS_STD, PSI_MINUS_STD, J_STD = _std()
