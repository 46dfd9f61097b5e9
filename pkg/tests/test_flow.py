import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from shflab import catalog, flow, liealg, su3
from shflab.flow import Regime, classify
from shflab.forms import OMEGA_STD, PSI_PLUS_STD, KForm

e = KForm.basis
DATA = {n: flow.FlowData.from_entry(catalog.get(n)) for n in catalog.ORDER}
IDS = list(catalog.ORDER)


def da_dt(r, t):
    """Hand-differentiated closed form of a(t)."""
    if r.tag is Regime.ETERNAL:
        return r.F0 ** 3 * math.exp(r.c * r.F0 ** 2 * t)
    k = 2 * r.c - r.w2sq
    return r.F0 ** 3 * (k * r.F0 ** 2 * t + 1) ** (r.c / k - 1)


class TestClassify:
    @pytest.mark.parametrize("c, w, tag, life", [
        (2, 8, Regime.SELF_SIMILAR, "ancient"), (4, 8, Regime.ETERNAL, "eternal"),
        (6, 6, Regime.IMMORTAL, "immortal"), (2, 6, Regime.ANCIENT, "ancient"),
    ])
    def test_tags(self, c, w, tag, life):
        r = classify(c, w, 2.0)
        assert r.tag is tag and r.lifetime == life

    def test_boundary_tolerance(self):
        assert classify(4 + 1e-12, 8).tag is Regime.ETERNAL
        assert classify(2 - 1e-12, 8).tag is Regime.SELF_SIMILAR

    def test_errors(self):
        with pytest.raises(flow.NotSpecialError, match="lower bound"):
            classify(1.0, 8.0)
        with pytest.raises(ValueError):
            classify(1.0, 0.0)
        with pytest.raises(ValueError):
            classify(1.0, 2.0, F0=0.0)

    @pytest.mark.parametrize("name, label", [
        ("e11e11", "Ancient/SelfSimilar"), ("g6_54", "Ancient"), ("A5_7", "Eternal"), ("A5_17", "Eternal"),
        ("g6_118", "Eternal"), ("g5_1", "Immortal"), ("g6_N3", "Immortal"), ("g6_38", "Immortal"),
    ])
    def test_catalog_regimes(self, name, label):
        assert DATA[name].solution.regime.label == label


class TestClosedForms:
    def test_g51_linear(self):
        sol = DATA["g5_1"].solution
        for t in np.linspace(-0.1, 3.0, 17):
            assert sol.a(t) == pytest.approx(8 * t, abs=1e-12)

    def test_a_at_zero(self):
        for d in DATA.values():
            assert d.a(0.0) == 0.0 and d.F(0.0) == pytest.approx(2.0)
            assert d.solution.nijenhuis_sq(0.0) == pytest.approx(d.report.w2_norm_sq / 2)

    def test_e11e11(self):
        sol = DATA["e11e11"].solution
        for t in (-1.0, 0.0, 0.03, 0.06):
            assert sol.a(t) == pytest.approx((1 - 16 * t) ** -0.5 - 1, rel=1e-12, abs=1e-14)
            assert sol.nijenhuis_sq(t) == pytest.approx(4.0)

    def test_intervals(self):
        assert DATA["A5_7"].interval() == (-math.inf, math.inf)
        assert DATA["e11e11"].interval() == (-math.inf, pytest.approx(1 / 16))
        lo, hi = DATA["g6_N3"].interval()
        assert lo == pytest.approx(-1 / 24) and hi == math.inf

    def test_eternal_norm(self):
        sol = DATA["A5_7"].solution
        for t in (-0.2, 0.1, 0.4):
            assert sol.F(t) == pytest.approx(2 * math.exp(8 * t), rel=1e-12)
            assert sol.nijenhuis_sq(t) == pytest.approx(4 * math.exp(-16 * t), rel=1e-12)

    def test_out_of_interval(self):
        sol = DATA["e11e11"].solution
        with pytest.raises(flow.OutOfIntervalError) as info:
            sol.a(0.07)
        assert info.value.interval[1] == pytest.approx(1 / 16)
        for f in (sol.F, sol.nijenhuis_sq, sol.a_prime):
            with pytest.raises(flow.OutOfIntervalError):
                f(1.0)
        with pytest.raises(flow.OutOfIntervalError):
            flow.phi_of_t(DATA["g6_N3"], -0.05)

    @pytest.mark.parametrize("name", IDS)
    @given(u=st.floats(0.0, 1.0))
    def test_ode(self, name, u):
        d = DATA[name]
        r = d.solution.regime
        lo, hi = d.interval()
        lo, hi = max(lo * 0.8, -0.5), min(hi * 0.8, 0.5)
        t = lo + u * (hi - lo)
        a = d.a(t)
        rhs = r.F0 ** 3 * (1 + r.c / r.F0 * a) ** (r.w2sq / r.c - 1)
        assert da_dt(r, t) == pytest.approx(rhs, rel=1e-9)
        assert d.a_prime(t) == pytest.approx(rhs, rel=1e-12)
        assert d.F(t) ** 4 / (r.F0 + r.c * a) == pytest.approx(rhs, rel=1e-9)

    @pytest.mark.parametrize("name", ["A5_7", "g6_118", "g5_1", "g6_N3", "g6_38"])
    def test_nijenhuis_decay(self, name):
        sol = DATA[name].solution
        ts = np.linspace(0, 5, 50)
        vals = [sol.nijenhuis_sq(t) for t in ts]
        assert all(b < a for a, b in zip(vals, vals[1:]))
        assert sol.nijenhuis_sq(200.0) < 1e-3 * vals[0]


class TestSolution:
    def test_phi_at_zero(self):
        for d in DATA.values():
            assert flow.phi_of_t(d, 0.0).allclose(d.phi0)
            assert flow.psi_minus_of_t(d, 0.0).allclose(d.structure.psi_minus)

    def test_g51_phi(self):
        d = DATA["g5_1"]
        for t in (0.1, 0.25):
            assert flow.phi_of_t(d, t).allclose(d.phi0 + 8 * t * e(1, 2, 3), 1e-12)

    def test_self_similar(self):
        d = DATA["e11e11"]
        for t in (-0.3, 0.02, 0.05):
            assert (flow.phi_of_t(d, t) / d.F(t)).allclose(d.phi0 / d.F0, 1e-12)

    @pytest.mark.parametrize("name", IDS)
    def test_closed_primitive(self, name):
        d = DATA[name]
        for t in (-0.02, 0.03):
            phi = flow.phi_of_t(d, t)
            assert liealg.ce_d(d.algebra, phi).is_zero(1e-9)
            assert (phi ^ d.omega).is_zero(1e-9)

    @pytest.mark.parametrize("F0", [1.0, 3.5])
    def test_other_initial_norms(self, F0):
        d = flow.FlowData.from_entry(catalog.get("g6_54"), F0=F0)
        rep = flow.verify_ansatz(d, flow.default_samples(d, 5, 0.02))
        for name in ("rhs", "norm", "psi_minus", "w2", "nijenhuis"):
            assert rep.max(name) < 1e-7, name


class TestRHS:
    def test_torsion_free(self):
        assert flow.flow_rhs(OMEGA_STD, PSI_PLUS_STD, liealg.abelian()).is_zero()

    def test_g51(self):
        d = DATA["g5_1"]
        assert flow.flow_rhs(d.omega, d.phi0, d.algebra).allclose(8 * e(1, 2, 3), 1e-9)

    def test_e11e11(self):
        d = DATA["e11e11"]
        assert flow.flow_rhs(d.omega, d.phi0, d.algebra).allclose(8 * d.phi0, 1e-9)

    @pytest.mark.parametrize("omega, phi, cond", [
        (e(1, 2) + e(3, 4), PSI_PLUS_STD, "omega is degenerate"),
        (OMEGA_STD, PSI_PLUS_STD + 0.1 * e(1, 2, 3), "not primitive"),
        (OMEGA_STD, e(1, 3, 5), "not definite"),
        (e(1, 2) - e(3, 4) + e(5, 6), PSI_PLUS_STD, "not positive"),
    ])
    def test_rejects(self, omega, phi, cond):
        with pytest.raises(flow.TypeIIAError, match=cond):
            flow.flow_rhs(omega, phi, liealg.abelian())

    def test_rejects_not_closed(self):
        d = DATA["e11e11"]
        with pytest.raises(flow.TypeIIAError, match="not closed") as info:
            flow.flow_rhs(d.omega, d.phi0, DATA["g6_54"].algebra)
        assert info.value.condition == "phi is not closed"

    def test_flow_data_rejects_not_special(self):
        # a closed, non-special SHF would raise; the abelian torsion-free case has no solution object
        d = flow.FlowData.build(su3.build_su3(OMEGA_STD, PSI_PLUS_STD), liealg.abelian())
        assert d.solution is None and d.a(1.0) == 0.0


class TestRK4:
    def test_abelian_constant(self):
        tr = flow.integrate_rk4(OMEGA_STD, PSI_PLUS_STD, liealg.abelian(), 0.05, 0.01)
        assert np.allclose(tr.coeffs, PSI_PLUS_STD.coeffs)
        assert len(tr) == 6 and not tr.truncated

    def test_g51(self):
        d = DATA["g5_1"]
        tr = flow.integrate_rk4(d.omega, d.phi0, d.algebra, 0.5, 1e-3)
        assert flow.closed_form_deviation(d, tr) < 1e-6

    def test_e11e11_norm(self):
        d = DATA["e11e11"]
        tr = flow.integrate_rk4(d.omega, d.phi0, d.algebra, 0.06, 1e-4)
        for i in range(0, len(tr), 50):
            t = tr.times[i]
            g = flow.type_iia_geometry(d.omega, tr.phi(i))
            assert math.sqrt(g.norm_sq) == pytest.approx(2 / math.sqrt(1 - 16 * t), abs=1e-6)

    @pytest.mark.parametrize("dt", [1e-2, 3e-3, 1e-3])
    def test_truncation(self, dt):
        d = DATA["e11e11"]
        tr = flow.integrate_rk4(d.omega, d.phi0, d.algebra, 0.2, dt)
        assert tr.truncated and "stopped" in tr.diagnostic
        # a coarse step may jump over the blow-up time before positivity is lost
        assert tr.times[-1] < 1 / 16 + 2 * dt
        assert np.all(np.isfinite(tr.coeffs))

    def test_backward(self):
        d = DATA["g6_54"]
        tr = flow.integrate_rk4(d.omega, d.phi0, d.algebra, -0.05, 1e-3)
        assert tr.times[-1] == pytest.approx(-0.05)
        assert flow.closed_form_deviation(d, tr) < 1e-8

    def test_bad_dt(self):
        with pytest.raises(ValueError):
            flow.integrate_rk4(OMEGA_STD, PSI_PLUS_STD, liealg.abelian(), 1.0, 0.0)


class TestVerify:
    @pytest.mark.parametrize("name", IDS)
    def test_at_zero(self, name):
        assert flow.verify_ansatz(DATA[name], [0.0]).residual < 1e-7

    def test_g654_window(self):
        rep = flow.verify_ansatz(DATA["g6_54"], np.linspace(-0.04, 0.04, 5))
        assert rep.residual < 1e-7 and rep.max("dF") < 1e-5

    def test_torsion_free(self):
        d = flow.FlowData.build(su3.build_su3(OMEGA_STD, PSI_PLUS_STD), liealg.abelian())
        assert flow.verify_ansatz(d, [0.0, 1.0]).residual == 0.0

    def test_csv(self):
        d = DATA["g5_1"]
        tr = flow.integrate_rk4(d.omega, d.phi0, d.algebra, 0.01, 1e-3)
        text = flow.rows_to_csv(flow.trajectory_rows(d, tr))
        lines = text.strip().splitlines()
        assert lines[0] == "t,F,a,nijenhuis_sq,residual"
        assert len(lines) == 12
        t, F, a, n, r = map(float, lines[-1].split(","))
        assert a == pytest.approx(8 * t) and r < 1e-12
