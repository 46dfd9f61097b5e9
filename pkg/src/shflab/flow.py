"""Source-free Type IIA flow on invariant special SHF data.

For a special SHF structure with constants ``c`` and ``w2sq = |w2|^2`` and an
initial datum ``phi0 = (F0/2) psi+`` the flow is solved by
``phi(t) = phi0 + a(t)/2 * d w2`` where ``a`` solves a scalar ODE in closed form.
This module evaluates those closed forms, the generic right-hand side
``d J d*(|phi|^2 phi)``, a fixed-step RK4 integrator and a residual verifier.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import forms as F
from . import liealg, su3
from .forms import EPS, KForm
from .hitchin import analyze_3form

DEFAULT_F0 = 2.0
DEFAULT_DT = 1e-3


class NotSpecialError(ValueError):
    """c < w2sq / 4: the data cannot come from a special SHF structure."""


class OutOfIntervalError(ValueError):
    """Time lies outside the maximal existence interval."""

    def __init__(self, t: float, interval: tuple):
        self.t = t
        self.interval = interval
        super().__init__(f"t = {t} lies outside the maximal interval ({interval[0]}, {interval[1]})")


class TypeIIAError(ValueError):
    """(omega, phi) is not a Type IIA geometry; ``condition`` names the failed check."""

    def __init__(self, condition: str, detail: str = ""):
        self.condition = condition
        super().__init__(f"not a Type IIA geometry: {condition}" + (f" ({detail})" if detail else ""))


class Regime(str, Enum):
    SELF_SIMILAR = "SelfSimilar"
    ANCIENT = "Ancient"
    ETERNAL = "Eternal"
    IMMORTAL = "Immortal"


@dataclass(frozen=True)
class FlowRegime:
    tag: Regime
    c: float
    w2sq: float
    F0: float

    @property
    def k(self) -> float:
        """2c - w2sq; zero exactly in the eternal case."""
        return 2.0 * self.c - self.w2sq

    @property
    def lifetime(self) -> str:
        """'ancient', 'eternal' or 'immortal'; self-similar solutions are ancient."""
        if self.tag in (Regime.SELF_SIMILAR, Regime.ANCIENT):
            return "ancient"
        return self.tag.value.lower()

    @property
    def label(self) -> str:
        if self.tag is Regime.SELF_SIMILAR:
            return "Ancient/SelfSimilar"
        return self.tag.value


def classify(c: float, w2sq: float, F0: float = DEFAULT_F0, eps: float = EPS) -> FlowRegime:
    if not w2sq > 0:
        raise ValueError(f"|w2|^2 must be positive, got {w2sq}")
    if not F0 > 0:
        raise ValueError(f"F0 must be positive, got {F0}")
    if c < 0.25 * w2sq - eps:
        raise NotSpecialError(f"c = {c} < |w2|^2/4 = {0.25 * w2sq}; violates the lower bound on c")
    if abs(c - 0.5 * w2sq) < eps:
        tag = Regime.ETERNAL
    elif abs(c - 0.25 * w2sq) < eps:
        tag = Regime.SELF_SIMILAR
    elif c < 0.5 * w2sq:
        tag = Regime.ANCIENT
    else:
        tag = Regime.IMMORTAL
    return FlowRegime(tag, float(c), float(w2sq), float(F0))


def interval(r: FlowRegime) -> tuple:
    if r.tag is Regime.ETERNAL:
        return (-math.inf, math.inf)
    edge = 1.0 / ((r.w2sq - 2.0 * r.c) * r.F0 ** 2)
    return (-math.inf, edge) if r.k < 0 else (edge, math.inf)


def _check(r: FlowRegime, t: float) -> None:
    lo, hi = interval(r)
    if not lo < t < hi:
        raise OutOfIntervalError(t, (lo, hi))


def _growth(r: FlowRegime, t: float) -> float:
    """1 + (c/F0) a(t)."""
    _check(r, t)
    if r.tag is Regime.ETERNAL:
        x = r.c * r.F0 ** 2 * t
        return math.exp(x) if x < 709.0 else math.inf
    return (r.k * r.F0 ** 2 * t + 1.0) ** (r.c / r.k)


def a_of_t(r: FlowRegime, t: float) -> float:
    if r.tag is Regime.ETERNAL:
        _check(r, t)
        x = r.c * r.F0 ** 2 * t
        return (r.F0 / r.c) * math.expm1(x) if x < 709.0 else math.inf
    return (r.F0 / r.c) * (_growth(r, t) - 1.0)


def a_prime(r: FlowRegime, t: float) -> float:
    return r.F0 ** 3 * _growth(r, t) ** (r.w2sq / r.c - 1.0)


def F_of_t(r: FlowRegime, t: float) -> float:
    """|phi(t)| along the flow."""
    return r.F0 * _growth(r, t) ** (r.w2sq / (4.0 * r.c))


def nijenhuis_of_t(r: FlowRegime, t: float) -> float:
    return 0.5 * r.w2sq * _growth(r, t) ** (r.w2sq / (2.0 * r.c) - 2.0)


@dataclass(frozen=True)
class FlowSolution:
    regime: FlowRegime
    t_min: float
    t_max: float

    @classmethod
    def of(cls, r: FlowRegime) -> "FlowSolution":
        return cls(r, *interval(r))

    def contains(self, t: float) -> bool:
        return self.t_min < t < self.t_max

    def a(self, t: float) -> float:
        return a_of_t(self.regime, t)

    def a_prime(self, t: float) -> float:
        return a_prime(self.regime, t)

    def F(self, t: float) -> float:
        return F_of_t(self.regime, t)

    def nijenhuis_sq(self, t: float) -> float:
        return nijenhuis_of_t(self.regime, t)


# -- special data and its explicit solution ---------------------------------

@dataclass(frozen=True, eq=False)
class FlowData:
    """Everything the closed-form solution needs, from a special SHF structure."""

    structure: su3.SU3Structure
    algebra: liealg.LieAlgebra
    report: su3.SpecialReport
    F0: float
    dw2: KForm
    star_dw2: KForm
    solution: FlowSolution | None

    @classmethod
    def build(cls, s: su3.SU3Structure, L: liealg.LieAlgebra, F0: float = DEFAULT_F0,
              eps: float = EPS) -> "FlowData":
        rep = su3.analyze(s, L, eps)
        dw2 = liealg.ce_d(L, rep.w2)
        sol = None
        if not rep.flags["torsion_free"]:
            if not rep.flags["is_special"]:
                raise NotSpecialError("structure is symplectic half-flat but not special")
            sol = FlowSolution.of(classify(rep.c, rep.w2_norm_sq, F0, eps))
        return cls(s, L, rep, float(F0), dw2, s.star(dw2), sol)

    @classmethod
    def from_entry(cls, entry, F0: float = DEFAULT_F0, eps: float = EPS) -> "FlowData":
        return cls.build(entry.su3(eps), entry.algebra, F0, eps)

    @property
    def omega(self) -> KForm:
        return self.structure.omega

    @property
    def phi0(self) -> KForm:
        return (self.F0 / 2.0) * self.structure.psi_plus

    def a(self, t: float) -> float:
        return 0.0 if self.solution is None else self.solution.a(t)

    def a_prime(self, t: float) -> float:
        return 0.0 if self.solution is None else self.solution.a_prime(t)

    def F(self, t: float) -> float:
        return self.F0 if self.solution is None else self.solution.F(t)

    def interval(self) -> tuple:
        return (-math.inf, math.inf) if self.solution is None else (self.solution.t_min, self.solution.t_max)


def phi_of_t(data: FlowData, t: float) -> KForm:
    """phi0 + a(t)/2 * d w2."""
    return data.phi0 + (0.5 * data.a(t)) * data.dw2


def psi_plus_of_t(data: FlowData, t: float) -> KForm:
    """Normalized 3-form 2 phi(t) / F(t)."""
    return (2.0 / data.F(t)) * phi_of_t(data, t)


def psi_minus_of_t(data: FlowData, t: float) -> KForm:
    """J_t psi+_t = (F_t/F0) (psi-_0 - a/(F0 + c a) * *_0 d w2), all normalized."""
    psi_minus0 = data.structure.psi_minus
    if data.solution is None:
        return psi_minus0
    a = data.a(t)
    c = data.report.c
    return (data.F(t) / data.F0) * (psi_minus0 - (a / (data.F0 + c * a)) * data.star_dw2)


def w2_of_t(data: FlowData, t: float) -> KForm:
    """Torsion form of the normalized structure at time t."""
    if data.solution is None:
        return data.report.w2
    a = data.a(t)
    return (data.F(t) / (data.F0 + data.report.c * a)) * data.report.w2


# -- generic right-hand side --------------------------------------------------

@dataclass(frozen=True, eq=False)
class IIAGeometry:
    J: np.ndarray
    g: np.ndarray
    orient: float
    norm_sq: float


def type_iia_geometry(omega: KForm, phi: KForm, L: liealg.LieAlgebra | None = None,
                      eps: float = EPS) -> IIAGeometry:
    """Validate (omega, phi) and return the induced J, g and |phi|^2_g."""
    om3 = (omega ** 3).coeffs[0]
    if abs(om3) <= eps:
        raise TypeIIAError("omega is degenerate")
    scale = max(1.0, phi.max_abs())
    if L is not None:
        dphi = liealg.ce_d(L, phi)
        if not dphi.is_zero(eps * scale):
            raise TypeIIAError("phi is not closed", f"max |d phi| = {dphi.max_abs():.3g}")
    prim = F.wedge(phi, omega)
    if not prim.is_zero(eps * scale * max(1.0, omega.max_abs())):
        raise TypeIIAError("phi is not primitive", f"max |phi ^ omega| = {prim.max_abs():.3g}")
    orient = 1.0 if om3 > 0 else -1.0
    res = analyze_3form(phi, orient, eps)
    if not res.definite:
        raise TypeIIAError("phi is not definite", f"P = {res.P:.6g}")
    g = su3.two_form_matrix(omega) @ res.J
    if np.max(np.abs(g - g.T)) > eps * max(1.0, float(np.max(np.abs(g)))):
        raise TypeIIAError("phi is not positive", "omega(., J.) is not symmetric")
    g = 0.5 * (g + g.T)
    if not F.is_positive_definite(g, eps):
        raise TypeIIAError("phi is not positive", "omega(., J.) is not positive definite")
    return IIAGeometry(res.J, g, orient, F.norm_sq(g, phi))


def flow_rhs(omega: KForm, phi: KForm, L: liealg.LieAlgebra, eps: float = EPS) -> KForm:
    """d J d*(|phi|^2 phi), with J acting on the 2-form as sigma(J., J.)."""
    geo = type_iia_geometry(omega, phi, L, eps)
    sigma = geo.norm_sq * liealg.codiff(L, geo.g, phi, geo.orient)
    return liealg.ce_d(L, F.act_on_form(geo.J, sigma))


# -- RK4 ------------------------------------------------------------------------

@dataclass
class Trajectory:
    times: np.ndarray
    coeffs: np.ndarray  # (n, 20)
    truncated: bool = False
    diagnostic: str | None = None

    def phi(self, n: int) -> KForm:
        return KForm(3, self.coeffs[n])

    def __len__(self) -> int:
        return len(self.times)


def integrate_rk4(omega: KForm, phi0: KForm, L: liealg.LieAlgebra, t_end: float,
                  dt: float = DEFAULT_DT, t0: float = 0.0, eps: float = EPS) -> Trajectory:
    """Classical RK4 on the 20 coefficients of phi from t0 to t_end.

    Uses ceil(|t_end - t0| / dt) equal steps.  Positivity is rechecked at every
    stage; if it fails the trajectory is cut at the last good step and
    ``diagnostic`` says why.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    type_iia_geometry(omega, phi0, L, eps)
    span = t_end - t0
    n = max(1, math.ceil(abs(span) / dt - 1e-9)) if span != 0 else 0
    h = span / n if n else 0.0

    def f(y):
        return flow_rhs(omega, KForm(3, y), L, eps).coeffs

    times = [t0]
    ys = [np.array(phi0.coeffs)]
    y = ys[0]
    for step in range(n):
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                k1 = f(y)
                k2 = f(y + 0.5 * h * k1)
                k3 = f(y + 0.5 * h * k2)
                k4 = f(y + h * k3)
            y_new = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(y_new)):
                raise TypeIIAError("phi is not finite", "overflow during the step")
            type_iia_geometry(omega, KForm(3, y_new), None, eps)
        except TypeIIAError as exc:
            return Trajectory(np.array(times), np.array(ys), True,
                              f"stopped at t = {times[-1]:.6g} during step {step + 1}/{n}: {exc}")
        y = y_new
        times.append(t0 + (step + 1) * h)
        ys.append(y)
    return Trajectory(np.array(times), np.array(ys))


def closed_form_deviation(data: FlowData, traj: Trajectory) -> float:
    """Max coefficient deviation of an RK4 trajectory from phi(t)."""
    return float(max(np.max(np.abs(traj.coeffs[i] - phi_of_t(data, t).coeffs))
                     for i, t in enumerate(traj.times)))


# -- verification -------------------------------------------------------------

@dataclass
class AnsatzReport:
    times: list
    rhs: list = field(default_factory=list)
    norm: list = field(default_factory=list)
    psi_minus: list = field(default_factory=list)
    w2: list = field(default_factory=list)
    normalization: list = field(default_factory=list)
    dF: list = field(default_factory=list)
    nijenhuis: list = field(default_factory=list)

    @property
    def residual(self) -> float:
        """Max g0-norm of flow_rhs(phi(t)) - a'(t)/2 d w2 over the samples."""
        return max(self.rhs, default=0.0)

    def max(self, name: str) -> float:
        return max(getattr(self, name), default=0.0)


def verify_ansatz(data: FlowData, t_samples, fd_step: float = 1e-5, eps: float = EPS) -> AnsatzReport:
    """Compare the closed-form solution with quantities recomputed from phi(t).

    Per sample: the flow equation residual in the g0 norm; |phi(t)|_{g_t}
    against F(t); *_{g_t} of the normalized phi(t) against the psi- formula; the torsion form of
    the normalized phi(t) against its scaled w2; the normalization identity;
    a centered difference of F against its ODE (relative); and |N_{J_t}|^2
    against the closed form.
    """
    g0 = data.structure.g
    L = data.algebra
    rep = AnsatzReport(times=[float(t) for t in t_samples])
    w2sq = data.report.w2_norm_sq
    c = data.report.c
    for t in rep.times:
        phi = phi_of_t(data, t)
        rhs = flow_rhs(data.omega, phi, L, eps)
        rep.rhs.append(F.norm(g0, rhs - (0.5 * data.a_prime(t)) * data.dw2))
        geo = type_iia_geometry(data.omega, phi, L, eps)
        Ft = math.sqrt(geo.norm_sq)
        rep.norm.append(abs(Ft - data.F(t)))
        psi_n = (2.0 / Ft) * phi
        psim = F.hodge_star(geo.g, geo.orient, psi_n)
        rep.psi_minus.append(F.norm(g0, psim - psi_minus_of_t(data, t)))
        w2t = liealg.codiff(L, geo.g, psi_n, geo.orient)
        rep.w2.append(F.norm(g0, w2t - w2_of_t(data, t)))
        om3 = (data.omega ** 3).coeffs[0]
        rep.normalization.append(abs(F.wedge(psi_n, F.act_on_form(geo.J, psi_n)).coeffs[0] - 2.0 / 3.0 * om3))
        rep.nijenhuis.append(abs(su3.nijenhuis_norm_sq(L, geo.J, geo.g)
                                 - (w2sq / 2.0 if data.solution is None else data.solution.nijenhuis_sq(t))))
        if data.solution is not None:
            sol = data.solution
            lo, hi = sol.t_min, sol.t_max
            h = min(fd_step, 0.25 * (hi - t), 0.25 * (t - lo))
            fd = (sol.F(t + h) - sol.F(t - h)) / (2 * h)
            exact = 0.25 * sol.F(t) ** 5 * w2sq / (data.F0 + c * sol.a(t)) ** 2
            rep.dF.append(abs(fd - exact) / max(1.0, abs(exact)))
    return rep


def default_samples(data: FlowData, n: int = 10, half_width: float = 0.1) -> list:
    """n times spread over a window around 0, clipped to 80% of the interval."""
    lo, hi = data.interval()
    a = max(-half_width, 0.8 * lo) if math.isfinite(lo) else -half_width
    b = min(half_width, 0.8 * hi) if math.isfinite(hi) else half_width
    return list(np.linspace(a, b, n))


# -- export -------------------------------------------------------------------

CSV_COLUMNS = ("t", "F", "a", "nijenhuis_sq", "residual")


def trajectory_rows(data: FlowData, traj: Trajectory) -> list[dict]:
    """One row per RK4 sample; residual is the g0-norm gap to the closed form."""
    g0 = data.structure.g
    rows = []
    for i, t in enumerate(traj.times):
        t = float(t)
        rows.append({
            "t": t,
            "F": data.F(t),
            "a": data.a(t),
            "nijenhuis_sq": data.report.w2_norm_sq / 2.0 if data.solution is None
            else data.solution.nijenhuis_sq(t),
            "residual": F.norm(g0, traj.phi(i) - phi_of_t(data, t)),
        })
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: repr(float(r[k])) for k in CSV_COLUMNS})
    return buf.getvalue()
