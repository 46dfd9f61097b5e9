"""SU(3)-structures from pairs (omega, psi+), their torsion, and special SHF data."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import sqrt

import numpy as np

from . import forms as F
from . import liealg
from ._kernels import COMBOS, DIM
from .forms import EPS, KForm
from .hitchin import analyze_3form


class SU3StructureError(ValueError):
    """The pair (omega, psi+) does not define an SU(3)-structure."""


class DegenerateOmegaError(SU3StructureError):
    pass


class NotDefiniteError(SU3StructureError):
    pass


class NotPrimitiveError(SU3StructureError):
    pass


class NotPositiveError(SU3StructureError):
    pass


class NormalizationError(SU3StructureError):
    pass


class NotSHFError(ValueError):
    """d omega or d psi+ does not vanish."""


class TorsionError(ValueError):
    """Torsion data is inconsistent (outside Lambda^2_8 / Lambda^3_12)."""


class SymmetryTypeError(ValueError):
    """Endomorphism is not of the required Sym^+_0 / Sym^- type."""


@dataclass(frozen=True, eq=False)
class SU3Structure:
    omega: KForm
    psi_plus: KForm
    J: np.ndarray
    g: np.ndarray
    psi_minus: KForm
    vol: KForm
    orient: float

    def star(self, a: KForm) -> KForm:
        return F.hodge_star(self.g, self.orient, a)

    def inner(self, a: KForm, b: KForm) -> float:
        return F.inner(self.g, a, b)

    def norm_sq(self, a: KForm) -> float:
        return F.norm_sq(self.g, a)

    def norm(self, a: KForm) -> float:
        return F.norm(self.g, a)

    def omega_matrix(self) -> np.ndarray:
        return two_form_matrix(self.omega)


def two_form_matrix(sigma: KForm) -> np.ndarray:
    """Antisymmetric matrix ``M[i, j] = sigma(e_i, e_j)``."""
    M = np.zeros((DIM, DIM))
    for (i, j), c in zip(COMBOS[2], sigma.coeffs):
        M[i, j] = c
        M[j, i] = -c
    return M


def matrix_two_form(M: np.ndarray) -> KForm:
    return KForm(2, [M[i, j] for i, j in COMBOS[2]])


def _scale(*arrays) -> float:
    return max([1.0] + [float(np.max(np.abs(np.asarray(a)))) for a in arrays])


def build_su3(omega: KForm, psi_plus: KForm, eps: float = EPS,
              check_normalization: bool = True) -> SU3Structure:
    """Derive J, g, psi-, vol from (omega, psi+); orientation from omega^3."""
    if omega.degree != 2 or psi_plus.degree != 3:
        raise F.FormError("need a 2-form and a 3-form")
    omega3 = (omega ** 3).coeffs[0]
    if abs(omega3) <= eps:
        raise DegenerateOmegaError("omega is degenerate (omega^3 = 0)")
    orient = 1.0 if omega3 > 0 else -1.0
    res = analyze_3form(psi_plus, orient, eps)
    if not res.definite:
        raise NotDefiniteError(f"psi+ is not definite (P = {res.P:.6g})")
    prim = F.wedge(psi_plus, omega)
    if not prim.is_zero(eps * _scale(psi_plus.coeffs, omega.coeffs)):
        raise NotPrimitiveError(f"psi+ ^ omega != 0 (max {prim.max_abs():.3g})")
    J = res.J
    g = two_form_matrix(omega) @ J
    gs = _scale(g)
    if not F.is_symmetric(g, eps * gs):
        raise NotPositiveError("omega(., J.) is not symmetric")
    g = 0.5 * (g + g.T)
    if not F.is_positive_definite(g, eps):
        raise NotPositiveError(f"g = omega(., J.) is not positive definite (eigs {np.linalg.eigvalsh(g)})")
    psi_minus = F.act_on_form(J, psi_plus)
    vol = F.volume_form(g, orient)
    if check_normalization:
        lhs = F.wedge(psi_plus, psi_minus).coeffs[0]
        rhs = (2.0 / 3.0) * omega3
        if abs(lhs - rhs) > eps * max(1.0, abs(rhs)) or abs(lhs - 4 * vol.coeffs[0]) > eps * max(1.0, abs(lhs)):
            raise NormalizationError(
                f"psi+ ^ psi- = {lhs:.12g}, (2/3) omega^3 = {rhs:.12g}, 4 vol = {4 * vol.coeffs[0]:.12g}"
            )
    for a in (J, g):
        a.setflags(write=False)
    return SU3Structure(omega, psi_plus, J, g, psi_minus, vol, orient)


def normalize_pair(omega: KForm, psi_plus: KForm, eps: float = EPS, max_passes: int = 10):
    """Rescale psi+ by 2/|psi+|_g until the normalization holds."""
    psi = psi_plus
    for _ in range(max_passes):
        s = build_su3(omega, psi, eps, check_normalization=False)
        lhs = F.wedge(psi, s.psi_minus).coeffs[0]
        rhs = (2.0 / 3.0) * (omega ** 3).coeffs[0]
        if abs(lhs - rhs) <= eps * max(1.0, abs(rhs)):
            return omega, psi
        psi = (2.0 / s.norm(psi)) * psi
    raise NormalizationError(f"normalization did not converge in {max_passes} passes")


# -- module decompositions -------------------------------------------------

def _project_onto(G: np.ndarray, B: np.ndarray, x: np.ndarray) -> np.ndarray:
    """G-orthogonal projection of x onto the column span of B."""
    M = B.T @ G @ B
    return B @ np.linalg.lstsq(M, B.T @ G @ x, rcond=None)[0]


def lambda26_basis(s: SU3Structure) -> np.ndarray:
    cols = [s.star(F.wedge(KForm.basis(i + 1), s.psi_plus)).coeffs for i in range(DIM)]
    return np.array(cols).T


def lambda36_basis(s: SU3Structure) -> np.ndarray:
    return np.array([F.wedge(KForm.basis(i + 1), s.omega).coeffs for i in range(DIM)]).T


def project2(s: SU3Structure, sigma: KForm):
    """Split a 2-form into (Lambda^2_1, Lambda^2_6, Lambda^2_8) components."""
    G = F.form_gram(s.g, 2)
    x = sigma.coeffs
    p1 = _project_onto(G, s.omega.coeffs[:, None], x)
    p6 = _project_onto(G, lambda26_basis(s), x)
    return KForm(2, p1), KForm(2, p6), KForm(2, x - p1 - p6)


def project3(s: SU3Structure, rho: KForm):
    """Split a 3-form into (Re, Im, Lambda^3_6, Lambda^3_12) components."""
    G = F.form_gram(s.g, 3)
    x = rho.coeffs
    pre = _project_onto(G, s.psi_plus.coeffs[:, None], x)
    pim = _project_onto(G, s.psi_minus.coeffs[:, None], x)
    p6 = _project_onto(G, lambda36_basis(s), x)
    return KForm(3, pre), KForm(3, pim), KForm(3, p6), KForm(3, x - pre - pim - p6)


# -- Sym(V) pieces -----------------------------------------------------------

def conj_J(s: SU3Structure, X: np.ndarray) -> np.ndarray:
    """C(X) = J X J^-1."""
    return s.J @ X @ np.linalg.inv(s.J)


def to_sym_plus0(s: SU3Structure, X: np.ndarray) -> np.ndarray:
    """Project a g-symmetric X onto Sym^+_0 (J-commuting, traceless)."""
    A = 0.5 * (X + conj_J(s, X))
    return A - np.trace(A) / DIM * np.eye(DIM)


def to_sym_minus(s: SU3Structure, X: np.ndarray) -> np.ndarray:
    return 0.5 * (X - conj_J(s, X))


def g_symmetric_from(s: SU3Structure, M: np.ndarray) -> np.ndarray:
    """Endomorphism g^-1 M, g-symmetric when M is a symmetric matrix."""
    return np.linalg.solve(s.g, 0.5 * (M + M.T))


def is_g_symmetric(s: SU3Structure, X: np.ndarray, tol: float) -> bool:
    gX = s.g @ X
    return bool(np.max(np.abs(gX - gX.T)) <= tol)


def in_sym_plus0(s: SU3Structure, A: np.ndarray, eps: float = EPS) -> bool:
    tol = eps * _scale(A)
    return (is_g_symmetric(s, A, tol) and bool(np.max(np.abs(A @ s.J - s.J @ A)) <= tol)
            and abs(np.trace(A)) <= tol)


def in_sym_minus(s: SU3Structure, S: np.ndarray, eps: float = EPS) -> bool:
    tol = eps * _scale(S)
    return is_g_symmetric(s, S, tol) and bool(np.max(np.abs(S @ s.J + s.J @ S)) <= tol)


def _sym_basis(s: SU3Structure, proj, dim: int) -> list[np.ndarray]:
    mats = []
    for i in range(DIM):
        for j in range(i, DIM):
            M = np.zeros((DIM, DIM))
            M[i, j] = M[j, i] = 1.0
            mats.append(proj(s, g_symmetric_from(s, M)).reshape(-1))
    _, sv, vt = np.linalg.svd(np.array(mats))
    return [vt[n].reshape(DIM, DIM) for n in range(dim)]


def sym_minus_basis(s: SU3Structure) -> list[np.ndarray]:
    """Frobenius-orthonormal basis of Sym^- (dimension 12)."""
    return _sym_basis(s, to_sym_minus, 12)


def sym_plus0_basis(s: SU3Structure) -> list[np.ndarray]:
    """Frobenius-orthonormal basis of Sym^+_0 (dimension 8)."""
    return _sym_basis(s, to_sym_plus0, 8)


def sigma8(s: SU3Structure, A: np.ndarray, eps: float = EPS) -> KForm:
    """Sigma_8(A) = g(AJ., .)."""
    if not in_sym_plus0(s, A, eps):
        raise SymmetryTypeError("A is not in Sym^+_0 (g-symmetric, J-commuting, traceless)")
    return matrix_two_form((s.g @ A @ s.J).T)


def sigma12(s: SU3Structure, S: np.ndarray, eps: float = EPS) -> KForm:
    """Sigma_12(S) = S_* psi+."""
    if not in_sym_minus(s, S, eps):
        raise SymmetryTypeError("S is not in Sym^- (g-symmetric, J-anticommuting)")
    return F.derive_action(S, s.psi_plus)


def sigma12_matrix(s: SU3Structure):
    basis = sym_minus_basis(s)
    M = np.array([F.derive_action(B, s.psi_plus).coeffs for B in basis]).T
    return M, basis


def sigma8_matrix(s: SU3Structure):
    basis = sym_plus0_basis(s)
    M = np.array([sigma8(s, B, eps=1e-7).coeffs for B in basis]).T
    return M, basis


def invert_sigma12(s: SU3Structure, rho: KForm, eps: float = EPS) -> np.ndarray:
    """S in Sym^- with S_* psi+ = rho, by least squares over a Sym^- basis."""
    M, basis = sigma12_matrix(s)
    x, *_ = np.linalg.lstsq(M, rho.coeffs, rcond=None)
    resid = float(np.max(np.abs(M @ x - rho.coeffs), initial=0.0))
    if resid > eps * max(1.0, rho.max_abs()):
        raise TorsionError(f"3-form is not in the image of Sigma_12 (residual {resid:.3g})")
    S = sum(c * B for c, B in zip(x, basis))
    return np.asarray(S)


# -- torsion -----------------------------------------------------------------

def orthonormal_frame(g: np.ndarray) -> np.ndarray:
    """Columns form a g-orthonormal basis."""
    L = np.linalg.cholesky(g)
    return np.linalg.inv(L).T


def nijenhuis_tensor(L: liealg.LieAlgebra, J: np.ndarray) -> np.ndarray:
    """N[k, i, j] = N(e_i, e_j)^k with N = 1/4([JX,JY] - J[JX,Y] - J[X,JY] - [X,Y])."""
    C = L.structure_constants  # [e_i, e_j] = C[:, i, j]

    def br(X, Y):
        return np.einsum("kij,ia,jb->kab", C, X, Y)

    I = np.eye(DIM)
    N = br(J, J) - np.einsum("kl,lab->kab", J, br(J, I)) - np.einsum("kl,lab->kab", J, br(I, J)) - br(I, I)
    return 0.25 * N


def nijenhuis_norm_sq(L: liealg.LieAlgebra, J: np.ndarray, g: np.ndarray) -> float:
    """Sum of squared components of N over a g-orthonormal frame (all i, j, k)."""
    Fr = orthonormal_frame(g)
    N = nijenhuis_tensor(L, J)
    Nf = np.einsum("kl,lab,ai,bj->kij", np.linalg.inv(Fr), N, Fr, Fr)
    return float(np.sum(Nf ** 2))


def s_spectrum(s: SU3Structure, S: np.ndarray, eps: float = EPS):
    """(mu1, mu2, mu3) sorted descending, and the rank of S.

    The eigenvalues of S come in pairs +-mu.  Magnitudes are read from the
    g-symmetric eigenproblem; signs are fixed by the cubic invariant
    psi+(S., S., S.) = mu1 mu2 mu3 psi+ (all three negated when it is negative).
    """
    Fr = orthonormal_frame(s.g)
    Sf = np.linalg.inv(Fr) @ S @ Fr
    ev = np.linalg.eigvalsh(0.5 * (Sf + Sf.T))
    tol = eps * _scale(S)
    rank = int(np.sum(np.abs(ev) > tol))
    mags = np.sort(np.abs(ev))[::-1][0::2][:3]
    mags = np.where(mags > tol, mags, 0.0)
    product = s.inner(F.act_on_form(S, s.psi_plus), s.psi_plus) / 4.0
    mus = -mags if product < -tol else mags
    return tuple(float(m) for m in sorted(mus, reverse=True)), rank


@dataclass
class SpecialReport:
    w2: KForm
    w2_norm_sq: float
    gamma: KForm
    S: np.ndarray
    scal: float
    nijenhuis_norm_sq: float
    spectrum: tuple = (0.0, 0.0, 0.0)
    rank: int = 0
    c: float | None = None
    w1: float = 0.0
    flags: dict = field(default_factory=lambda: {
        "is_shf": True, "cond_i": False, "cond_ii": False, "cond_iii": False,
        "is_special": False, "hermitian_ricci": False, "torsion_free": False,
    })
    residuals: dict = field(default_factory=dict)

    def to_json_obj(self) -> dict:
        return {
            "w1": self.w1,
            "w2": self.w2.to_json_obj(1e-15),
            "w2_norm_sq": self.w2_norm_sq,
            "gamma": self.gamma.to_json_obj(1e-15),
            "S": np.asarray(self.S).tolist(),
            "c": self.c,
            "spectrum": sorted(self.spectrum, reverse=True),
            "rank": self.rank,
            "scal": self.scal,
            "nijenhuis_norm_sq": self.nijenhuis_norm_sq,
            "flags": dict(self.flags),
            "residuals": dict(self.residuals),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True)


def torsion(s: SU3Structure, L: liealg.LieAlgebra, eps: float = EPS) -> SpecialReport:
    """Torsion form, gamma, S, scalar curvature and |N_J|^2 of an SHF structure."""
    d_om = liealg.ce_d(L, s.omega)
    d_psi = liealg.ce_d(L, s.psi_plus)
    if not d_om.is_zero(eps) or not d_psi.is_zero(eps):
        raise NotSHFError(f"not SHF: |d omega| = {d_om.max_abs():.3g}, |d psi+| = {d_psi.max_abs():.3g}")
    w2 = liealg.codiff(L, s.g, s.psi_plus, s.orient)
    sc = _scale(w2.coeffs)
    p1, p6, _ = project2(s, w2)
    if not (p1.is_zero(eps * sc) and p6.is_zero(eps * sc)):
        raise TorsionError("w2 is not in Lambda^2_8")
    cod = liealg.codiff(L, s.g, w2, s.orient)
    if not cod.is_zero(eps * sc):
        raise TorsionError(f"w2 is not coclosed (max {cod.max_abs():.3g})")
    w2sq = s.norm_sq(w2)
    dw = liealg.ce_d(L, w2)
    pre, pim, p6_3, p12 = project3(s, dw)
    expected_re = (w2sq / 4.0) * s.psi_plus
    dsc = _scale(dw.coeffs)
    if not (pre.allclose(expected_re, eps * dsc) and pim.is_zero(eps * dsc) and p6_3.is_zero(eps * dsc)):
        raise TorsionError("d w2 does not split as |w2|^2/4 psi+ + gamma")
    gamma = p12
    S = invert_sigma12(s, gamma, eps) if not gamma.is_zero(eps * dsc) else np.zeros((DIM, DIM))
    spectrum, rank = s_spectrum(s, S, eps)
    report = SpecialReport(
        w2=w2, w2_norm_sq=w2sq, gamma=gamma, S=S, scal=-0.5 * w2sq,
        nijenhuis_norm_sq=nijenhuis_norm_sq(L, s.J, s.g), spectrum=spectrum, rank=rank,
    )
    report.flags["torsion_free"] = w2.is_zero(eps)
    return report


def special_check(report: SpecialReport, s: SU3Structure, L: liealg.LieAlgebra,
                  eps: float = EPS) -> SpecialReport:
    """Fill in c and the special / Hermitian-Ricci flags."""
    w2 = report.w2
    flags = report.flags
    if flags["torsion_free"]:
        flags.update(cond_i=False, cond_ii=False, cond_iii=False, is_special=False, hermitian_ricci=True)
        report.c = None
        return report
    lap = liealg.laplacian(L, s.g, w2, s.orient)
    c = s.inner(lap, w2) / report.w2_norm_sq
    resid = sqrt(s.norm_sq(lap - c * w2))
    flags["cond_i"] = resid < eps * sqrt(report.w2_norm_sq) * max(1.0, abs(c))
    dw = liealg.ce_d(L, w2)
    ii = F.wedge(dw, w2)
    flags["cond_ii"] = ii.is_zero(eps * _scale(dw.coeffs, w2.coeffs))
    dw_sq = s.norm_sq(dw)
    flags["cond_iii"] = abs(dw_sq - c * report.w2_norm_sq) <= eps * max(1.0, dw_sq)
    flags["is_special"] = flags["cond_i"] and flags["cond_ii"] and flags["cond_iii"]
    flags["hermitian_ricci"] = report.gamma.is_zero(eps * _scale(dw.coeffs))
    lap_psi = liealg.laplacian(L, s.g, s.psi_plus, s.orient)
    report.residuals.update(
        cond_i=resid,
        cond_ii=ii.max_abs(),
        cond_iii=abs(dw_sq - c * report.w2_norm_sq),
        laplace_psi_plus=(lap_psi - (report.w2_norm_sq / 4.0) * s.psi_plus).max_abs(),
    )
    report.c = float(c)
    return report


def analyze(s: SU3Structure, L: liealg.LieAlgebra, eps: float = EPS) -> SpecialReport:
    return special_check(torsion(s, L, eps), s, L, eps)


# -- the two lemmas ------------------------------------------------------------

def g_norm_endo(s: SU3Structure, X: np.ndarray) -> float:
    """Frobenius norm of X in a g-orthonormal frame."""
    Fr = orthonormal_frame(s.g)
    return float(np.linalg.norm(np.linalg.inv(Fr) @ X @ Fr))


def lemma1_norms(s: SU3Structure, A: np.ndarray, S: np.ndarray, eps: float = EPS):
    """(|[A, S]|, |Sigma_8(A) ^ Sigma_12(S)|) in g-induced norms."""
    comm = g_norm_endo(s, A @ S - S @ A)
    w = F.wedge(sigma8(s, A, eps), sigma12(s, S, eps))
    return comm, s.norm(w)


def lemma1_check(s: SU3Structure, A: np.ndarray, S: np.ndarray, eps: float = EPS,
                 rel_threshold: float = 1e-6):
    """(A and S commute, sigma ^ rho = 0), each classified at rel_threshold * |A||S|."""
    comm, wn = lemma1_norms(s, A, S, eps)
    scale = max(g_norm_endo(s, A) * g_norm_endo(s, S), np.finfo(float).tiny)
    thr = rel_threshold * scale
    return comm <= thr, wn <= thr


def eigen_constraint_check(report: SpecialReport, eps: float = EPS) -> bool:
    """mu1^2 + mu2^2 + mu3^2 = w^2 (c - w^2/4) / 4, plus the rank-2 / rank-6 forms."""
    if report.c is None:
        return False
    w = report.w2_norm_sq
    target = 0.25 * w * (report.c - 0.25 * w)
    mus = np.array(report.spectrum)
    tol = eps * max(1.0, abs(target))
    ok = abs(float(np.sum(mus ** 2)) - target) <= tol
    nz = mus[np.abs(mus) > eps]
    if report.rank == 2:
        ok = ok and len(nz) == 1 and abs(nz[0] ** 2 - target) <= tol
    elif report.rank == 6:
        ok = ok and len(nz) == 3 and np.ptp(nz) <= eps * max(1.0, float(np.max(np.abs(nz)))) \
            and abs(nz[0] ** 2 - target / 3.0) <= tol
    return bool(ok)
