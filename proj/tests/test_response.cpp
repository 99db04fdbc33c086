#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numbers>

#include "fixtures.hpp"
#include "omit/response.hpp"
#include "omit/steady_state.hpp"

using namespace omit;
using namespace omit::test;

namespace {

ProbeSystem fig3_system() {
    const auto d = fig3_device();
    const auto lock = resolve_pump_detuning(d);
    return probe_system(make_model(d, derive(d, lock.pump_detuning)), lock.state);
}

std::vector<double> fig3_deltas(const ProbeSystem& s, std::size_t n = 2001) {
    std::vector<double> out;
    for (double x : Axis{-0.004, 0.004, n, Scale::linear}.values()) out.push_back(s.omega_b * (1 + x));
    return out;
}

} // namespace

TEST(ProbeComponent, BareCavityResonance) {
    const ProbeSystem s{2e10, 6e4, 6e9, 6e9, 0.0};
    const cplx a = probe_component(s, 6e9, 5.0);
    EXPECT_NEAR(a.real(), 2 * 5.0 / 2e10, 1e-25);
    EXPECT_EQ(a.imag(), 0.0);
}

TEST(ProbeComponent, SymmetryPointIsReal) {
    const ProbeSystem s{2e10, 6e4, 6e9, 6e9, 3e8};
    const cplx a = probe_component(s, 6e9, 1.0);
    EXPECT_LT(rel(a.real(), (6e4 / 2) / (2e10 * 6e4 / 4 + 9e16)), 1e-15);
    EXPECT_EQ(a.imag(), 0.0);
}

TEST(OutputQuadrature, UncoupledLorentzian) {
    const ProbeSystem s{2e10, 6e4, 6e9, 6e9, 0.0};
    for (double la : {-3e10, -1e10, 0.0, 4e9, 2e10}) {
        const cplx e = output_quadrature(s, 6e9 + la);
        const cplx expected = 2e10 / cplx(1e10, -la);
        EXPECT_LT(std::abs(e - expected) / std::abs(expected), 1e-15);
        EXPECT_LE(e.real(), 2.0);
    }
    EXPECT_DOUBLE_EQ(output_quadrature(s, 6e9).real(), 2.0);
}

TEST(OutputQuadrature, Fig3Dip) {
    auto s = fig3_system();
    const cplx e = output_quadrature(s, s.omega_b);
    EXPECT_LT(rel(e.real(), oracle::re_epsT_center), 1e-7);
    EXPECT_LE(e.real(), 0.01);
    s.effective_detuning = s.omega_b;
    EXPECT_EQ(output_quadrature(s, s.omega_b).imag(), 0.0);
    EXPECT_DOUBLE_EQ(output_quadrature(uncoupled(s), s.omega_b).real(), 2.0);
}

TEST(OutputQuadrature, ConjugateSymmetryAboutOmegaB) {
    auto s = fig3_system();
    s.effective_detuning = s.omega_b;
    // offsets on a binary grid so omega_b +- x is exact
    for (int k = 1; k <= 4000; ++k) {
        const double x = std::ldexp(static_cast<double>(k), 14);  // up to ~6.6e7 rad/s
        const cplx up = output_quadrature(s, s.omega_b + x);
        const cplx down = output_quadrature(s, s.omega_b - x);
        EXPECT_LE(std::abs(up - std::conj(down)), 1e-12 * std::abs(up)) << k;
    }
}

TEST(Transmission, Identities) {
    EXPECT_EQ(transmission(0.0).coefficient, cplx(-1.0));
    EXPECT_EQ(transmission(0.0).power, 1.0);
    EXPECT_EQ(transmission(2.0).coefficient, cplx(1.0));
    EXPECT_EQ(transmission(2.0).power, 1.0);
}

TEST(Transmission, AllPassWithoutCoupling) {
    const auto s = uncoupled(fig3_system());
    for (double d : fig3_deltas(s)) {
        const auto t = transmission(output_quadrature(s, d));
        EXPECT_NEAR(std::abs(t.coefficient), 1.0, 1e-12);
    }
}

TEST(Phase, PrincipalValue) {
    EXPECT_EQ(phase(3.0), 0.0);
    EXPECT_DOUBLE_EQ(phase(cplx(0, 1)), std::numbers::pi / 2);
    EXPECT_DOUBLE_EQ(phase(cplx(-1.0, 0.0)), std::numbers::pi);
    EXPECT_DOUBLE_EQ(phase(cplx(-1.0, -0.0)), std::numbers::pi);
    EXPECT_THROW(phase(0.0), DomainError);
}

TEST(WindowWidth, Values) {
    EXPECT_EQ(window_width(0.0, 2e10, 6e4), 6e4);
    const auto s = fig3_system();
    EXPECT_LT(rel(window_width(s.total_coupling, s.kappa_a, s.gamma_b), oracle::Gamma), 1e-7);
    EXPECT_THROW(window_width(1.0, 0.0, 1.0), DomainError);
}

TEST(WindowWidth, ExtractedFwhmAgrees) {
    const auto s = fig3_system();
    const auto w = window_fwhm(s, fig3_deltas(s));
    ASSERT_TRUE(w);
    EXPECT_LT(rel(*w, window_width(s.total_coupling, s.kappa_a, s.gamma_b)), 0.05);
}

TEST(DipWidth, SyntheticLorentzian) {
    std::vector<double> x, ref, val;
    for (int i = -500; i <= 500; ++i) {
        x.push_back(i * 0.01);
        ref.push_back(1.0);
        val.push_back(1.0 - 1.0 / (1.0 + std::pow(x.back() / 0.5, 2)));
    }
    const auto w = dip_width(x, ref, val);
    ASSERT_TRUE(w);
    EXPECT_NEAR(*w, 1.0, 1e-4);
    EXPECT_FALSE(dip_width(std::span(x).subspan(480, 40), std::span(ref).subspan(480, 40),
                           std::span(val).subspan(480, 40)));
}

TEST(GroupDelay, BareCavityAtResonance) {
    const ProbeSystem s{2e10, 6e4, 6e9, 6e9, 0.0};
    const auto g = group_delay(s, 6e9);
    // arg of kappa / (kappa/2 - i lambda) has slope 2/kappa
    EXPECT_LT(rel(g.analytic, 2.0 / 2e10), 1e-10);
    EXPECT_LT(rel(g.numeric, g.analytic), 1e-6);
}

TEST(GroupDelay, FlatFarFromResonance) {
    const auto s = fig3_system();
    // falls off as kappa / detuning^2
    const double tau = group_delay(s, s.omega_b + 1e14).analytic;
    EXPECT_LT(std::abs(tau), 2 * s.kappa_a / 1e28);
    EXPECT_LT(std::abs(tau), 1e-7 * 2 / s.kappa_a);
}

TEST(GroupDelay, AnalyticMatchesFiniteDifferenceOnFig3Grid) {
    const auto s = fig3_system();
    std::vector<GroupDelay> d;
    for (double x : fig3_deltas(s)) d.push_back(group_delay(s, x));
    const auto c = delay_consistency(d);
    EXPECT_GT(c.checked, 1000u);
    EXPECT_LE(c.max_relative, delay_consistency_tolerance);
}

TEST(GroupDelay, CenterValueClosedForm) {
    const auto s = fig3_system();
    const double g2 = s.total_coupling * s.total_coupling;
    // d/d delta arg eps_T at the symmetry point
    const double expected = -2.0 / s.gamma_b + (s.kappa_a + s.gamma_b) / (2.0 * (s.kappa_a * s.gamma_b / 4 + g2));
    EXPECT_LT(rel(group_delay(s, s.omega_b).analytic, expected), 1e-6);
}

TEST(Passivity, ReEpsTWithinBounds) {
    const auto s = fig3_system();
    for (double d : fig3_deltas(s)) {
        const double re = output_quadrature(s, d).real();
        EXPECT_GE(re, 0.0);
        EXPECT_LE(re, 2.0);
    }
}

TEST(Sweep, RejectsDegenerateGrid) {
    SweepSpec spec;
    spec.offset = {0.0, 0.0, 1, Scale::linear};
    EXPECT_THROW(sweep(fig3_device(), spec), ConfigError);
    spec.offset = {0.001, -0.001, 5, Scale::linear};
    EXPECT_THROW(sweep(fig3_device(), spec), ConfigError);
}

TEST(Sweep, Fig3RowCount) {
    const auto r = sweep(fig3_device(), SweepSpec{});
    EXPECT_EQ(r.rows.size(), 2001u);
    EXPECT_EQ(r.failed, 0u);
    EXPECT_EQ(r.rows[1000].offset, 0.0);
    EXPECT_TRUE(std::is_sorted(r.offsets.begin(), r.offsets.end()));
}

TEST(Sweep, DeterministicAcrossThreads) {
    SweepSpec spec;
    spec.offset.points = 201;
    spec.secondary = SecondaryAxis{SweepVariable::rf_power, {1e-5, 1e-3, 6, Scale::log}};
    const auto a = sweep(fig3_device(), spec);
    spec.threads = 3;
    const auto b = sweep(fig3_device(), spec);
    ASSERT_EQ(a.rows.size(), 6u * 201u);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        EXPECT_EQ(a.rows[i].state_index, b.rows[i].state_index);
        EXPECT_EQ(std::memcmp(&a.rows[i].response.output_quadrature, &b.rows[i].response.output_quadrature,
                              sizeof(cplx)),
                  0);
    }
}

TEST(Sweep, WindowGrowsWithPumpPower) {
    SweepSpec spec;
    spec.secondary = SecondaryAxis{SweepVariable::pump_power, {1e-8, 3e-8, 10, Scale::linear}};
    const auto r = sweep(fig3_device(), spec);
    double prev = 0;
    for (const auto& st : r.states) {
        ASSERT_TRUE(st.state);
        const double g = window_width(st.state->total_coupling, st.model.kappa_a, st.model.gamma_b);
        EXPECT_GT(g, prev);
        prev = g;
    }
}
