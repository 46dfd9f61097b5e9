"""Stable 3-forms in six dimensions: S_phi, the quartic invariant P, and J_phi."""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from . import _kernels as K
from .forms import EPS, FormError, KForm, act_on_form


@dataclass(frozen=True)
class StableFormResult:
    S: np.ndarray
    P: float
    J: np.ndarray | None
    definite: bool


def hitchin_endomorphism(phi: KForm, top: float = 1.0) -> np.ndarray:
    """S_phi for the top form ``top * e^{123456}``.

    S_phi(v) is the vector u with ``(iota_v phi ^ phi) ^ alpha = alpha(u) Omega``
    for every covector alpha.
    """
    if phi.degree != 3:
        raise FormError(f"expected a 3-form, got degree {phi.degree}")
    if top == 0.0:
        raise FormError("orientation form is zero")
    S = K.hitchin_kernel(phi.coeffs, *K.HITCHIN_TABLE)
    return S / top


def analyze_3form(phi: KForm, orient: KForm | float = 1.0, eps: float = EPS) -> StableFormResult:
    """S, P = tr(S^2)/6, and J = S / sqrt(-P) when P < -eps."""
    top = orient.coeffs[0] if isinstance(orient, KForm) else float(orient)
    if isinstance(orient, KForm) and orient.degree != 6:
        raise FormError("orientation must be a 6-form")
    S = hitchin_endomorphism(phi, top)
    P = float(np.trace(S @ S)) / 6.0
    if P < -eps:
        return StableFormResult(S, P, S / sqrt(-P), True)
    return StableFormResult(S, P, None, False)


def complex_structure(phi: KForm, orient: KForm | float = 1.0, eps: float = EPS) -> np.ndarray:
    res = analyze_3form(phi, orient, eps)
    if not res.definite:
        raise FormError(f"3-form is not definite (P = {res.P:.3g})")
    return res.J


def scale_covariance_check(phi: KForm, orient: KForm | float, s: float, eps: float = EPS) -> bool:
    """J(s phi) == J(phi) and P(s phi) == s^4 P(phi)."""
    base = analyze_3form(phi, orient, eps)
    scaled = analyze_3form(s * phi, orient, eps)
    if not (base.definite and scaled.definite):
        return False
    tol = eps * max(1.0, abs(scaled.P))
    return bool(np.allclose(base.J, scaled.J, atol=eps, rtol=0) and abs(scaled.P - s**4 * base.P) <= tol)


def conjugate_form(phi: KForm, orient: KForm | float = 1.0) -> KForm:
    """``J_phi phi = phi(J., J., J.)``."""
    return act_on_form(complex_structure(phi, orient), phi)
