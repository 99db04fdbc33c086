#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "omit/dynamics.hpp"

using namespace omit;
using namespace omit::test;

namespace {

struct Fig3 {
    OptomechanicalModel model;
    SteadyState state;
    double gamma = 0;
};

Fig3 fig3() {
    const auto d = fig3_device();
    const auto lock = resolve_pump_detuning(d);
    Fig3 f{make_model(d, derive(d, lock.pump_detuning)), lock.state, 0};
    f.gamma = window_width(f.state.total_coupling, f.model.kappa_a, f.model.gamma_b);
    return f;
}

OptomechanicalModel drives_off() {
    auto m = fig3().model;
    m.pump_amplitude = 0;
    m.rf_amplitude = 0;
    return m;
}

TimeTrace synthetic(double omega, std::size_t spp, std::size_t periods, auto&& f) {
    TimeTrace t;
    const double h = two_pi / omega / static_cast<double>(spp);
    for (std::size_t k = 0; k < spp * periods; ++k) {
        t.t.push_back(static_cast<double>(k) * h);
        t.a.push_back(f(t.t.back()));
        t.b.push_back(0.0);
    }
    return t;
}

} // namespace

TEST(Integrator, FreeDecayOfCavity) {
    const auto m = drives_off();
    IntegrationSettings s;
    s.t_end = 4.0 / m.kappa_a;
    s.dt = s.t_end / 200;
    const auto tr = integrate_mean_field(m, {}, {cplx(1.0), cplx(0.0)}, s);
    const double expected = std::exp(-m.kappa_a * s.t_end / 2);
    EXPECT_LT(rel(std::abs(tr.final_state[0]), expected), 1e-8);
    EXPECT_EQ(tr.steps, 200u);
}

TEST(Integrator, EnergyDecaysWithDrivesOff) {
    auto m = drives_off();
    IntegrationSettings s;
    s.t_end = 2e-9;
    s.dt = two_pi / m.omega_b / 40;
    auto check = [&](const OptomechanicalModel& mm, ModeState x0, bool check_b) {
        const auto tr = integrate_mean_field(mm, {}, x0, s);
        for (std::size_t k = 1; k < tr.a.size(); ++k) {
            EXPECT_LE(std::norm(tr.a[k]), std::norm(tr.a[k - 1]) * (1 + 1e-14));
            if (check_b) {
                EXPECT_LE(std::norm(tr.b[k]), std::norm(tr.b[k - 1]) * (1 + 1e-14));
            }
        }
    };
    // |a|^2 never grows; |b|^2 only decays when radiation pressure is absent
    check(m, {cplx(1.0, 0.5), cplx(2.0, -1.0)}, false);
    check(m, {cplx(0.0), cplx(2.0, -1.0)}, true);
    m.coupling = 0;
    check(m, {cplx(1.0, 0.5), cplx(2.0, -1.0)}, true);
}

TEST(Integrator, ColdStartReachesSteadyState) {
    auto d = fig3_device();
    d.drive.rf_power = 1e-12;  // keeps the cold-start phonon transient small
    d.drive.detuning = oracle::Delta_a;
    const auto m = make_model(d, derive(d, oracle::Delta_a));
    const auto ss = solve_steady_state(m);
    const double gamma = window_width(ss.total_coupling, m.kappa_a, m.gamma_b);
    IntegrationSettings s;
    s.dt = two_pi / m.omega_b / 40;
    s.t_end = 80.0 / gamma;
    s.record_from = s.t_end;
    s.settle_rate = gamma;
    const auto tr = integrate_mean_field(m, {}, {cplx(0.0), cplx(0.0)}, s, std::abs(ss.cavity_amplitude));
    EXPECT_LT(std::abs(tr.final_state[0] - ss.cavity_amplitude) / std::abs(ss.cavity_amplitude), 1e-6);
    EXPECT_LT(std::abs(tr.final_state[1] - ss.phonon_amplitude) / std::abs(ss.phonon_amplitude), 1e-6);
}

TEST(Integrator, Preconditions) {
    const auto f = fig3();
    IntegrationSettings s;
    s.t_end = 1e-6;
    s.dt = two_pi / f.model.omega_b / 10;
    EXPECT_THROW(integrate_mean_field(f.model, {}, {f.state.cavity_amplitude, f.state.phonon_amplitude}, s),
                 DomainError);
    s.dt = two_pi / f.model.omega_b / 20;
    s.t_end = 1.0 / f.gamma;
    s.settle_rate = f.gamma;
    EXPECT_THROW(integrate_mean_field(f.model, {}, {f.state.cavity_amplitude, f.state.phonon_amplitude}, s),
                 DomainError);
}

TEST(Integrator, DivergenceNamesBranch) {
    auto m = drives_off();
    m.kappa_a = -m.kappa_a;  // gain instead of loss
    IntegrationSettings s;
    s.t_end = 1e-8;
    s.dt = two_pi / m.omega_b / 20;
    s.divergence_factor = 10;
    s.label = "upper";
    try {
        integrate_mean_field(m, {}, {cplx(1.0), cplx(0.0)}, s, 1.0);
        FAIL();
    } catch (const SolverError& e) {
        EXPECT_NE(std::string(e.what()).find("upper branch"), std::string::npos);
    }
}

TEST(Demodulate, ConstantSignal) {
    const cplx c(2.5, -1.0);
    const auto tr = synthetic(1e9, 32, 150, [&](double) { return c; });
    const auto r = demodulate(tr, 1e9, 100);
    EXPECT_LT(std::abs(r.component), 1e-15);
    EXPECT_LT(std::abs(r.dc - c), 1e-14);
}

TEST(Demodulate, PureTone) {
    const cplx A(0.3, 0.7), c(4.0, 1.0);
    const double w = 6.6e9;
    const auto tr = synthetic(w, 64, 120, [&](double t) { return c + A * std::polar(1.0, -w * t); });
    const auto r = demodulate(tr, w, 100);
    EXPECT_LT(std::abs(r.component - A) / std::abs(A), 1e-10);
    EXPECT_LT(std::abs(r.mirror), 1e-10);
    EXPECT_LT(r.harmonic_residual, 1e-10);
}

TEST(Demodulate, RejectsShortOrUnsettledTraces) {
    const double w = 1e9;
    const auto tr = synthetic(w, 32, 150, [&](double t) { return cplx(std::exp(1e7 * t)); });
    EXPECT_THROW(demodulate(tr, w, 100), SolverError);
    EXPECT_THROW(demodulate(tr, w, 50), DomainError);
    EXPECT_THROW(demodulate(tr, w, 151), DomainError);
}

TEST(Oracle, UncoupledCavityMatchesClosedForm) {
    auto f = fig3();
    f.model.coupling = 0;
    f.model.rf_amplitude = 0;
    const auto ss = solve_steady_state(f.model);
    for (double delta : {f.model.omega_b, 0.7 * f.model.omega_b, 1.3 * f.model.omega_b}) {
        const double eps = 1e-3 * f.model.pump_amplitude;
        const auto run = run_oracle(f.model, ss, delta, eps, {});
        const cplx expected = eps / cplx(f.model.kappa_a / 2, f.model.pump_detuning - delta);
        EXPECT_LT(std::abs(run.demod.component - expected) / std::abs(expected), 1e-8);
    }
}

TEST(Oracle, LinearizationExactWithoutCoupling) {
    auto f = fig3();
    f.model.coupling = 0;
    const auto ss = solve_steady_state(f.model);
    const auto rep = verify_linearization(f.model, ss, {f.model.omega_b}, {1e-3, 1e-2});
    for (const auto& p : rep.points) EXPECT_LT(p.error_closed_form, 1e-8);
}

TEST(Oracle, MatchesTwoSidebandLinearResponse) {
    const auto f = fig3();
    for (double off : {-2.0, 0.5, 2.0}) {
        const double delta = f.model.omega_b + off * f.gamma;
        const double eps = 1e-3 * f.model.pump_amplitude;
        const auto run = run_oracle(f.model, f.state, delta, eps, {});
        const cplx lin = full_linear_response(f.model, f.state, delta, eps).a_plus;
        EXPECT_LT(std::abs(run.demod.component - lin) / std::abs(lin), 2e-5) << off;
    }
}

TEST(Oracle, TwoSidebandCorrectionFallsAsInverseMechanicalFrequency) {
    // the counter-rotating terms shift the response by ~G^2 / omega_b
    auto error = [](double scale) {
        auto f = fig3();
        f.model.omega_b *= scale;
        f.state.effective_detuning = f.model.omega_b;
        const ProbeSystem sys = probe_system(f.model, f.state);
        double e = 0.0;
        for (double off : {-2.0, -1.0, 1.0, 2.0}) {
            const double delta = f.model.omega_b + off * f.gamma;
            const cplx lin = full_linear_response(f.model, f.state, delta, 1.0).a_plus;
            const cplx cf = probe_component(sys, delta, 1.0);
            e = std::max(e, std::abs(lin - cf) / std::abs(cf));
        }
        return e;
    };
    const double e10 = error(10), e100 = error(100);
    EXPECT_LT(e100, 0.02);
    EXPECT_GT(e10 / e100, 7.0);
    EXPECT_LT(e10 / e100, 13.0);
}

TEST(Oracle, StepHalvingConverged) {
    const auto f = fig3();
    const double delta = f.model.omega_b + 2 * f.gamma;
    const double eps = 1e-3 * f.model.pump_amplitude;
    OracleSettings fine;
    fine.steps_per_period *= 2;
    const cplx a = run_oracle(f.model, f.state, delta, eps, {}).demod.component;
    const cplx b = run_oracle(f.model, f.state, delta, eps, fine).demod.component;
    EXPECT_LT(std::abs(a - b) / std::abs(b), 1e-6);
}

TEST(Oracle, FrameOffsetLeavesProbeComponentUnchanged) {
    const auto f = fig3();
    const double delta = f.model.omega_b - 2 * f.gamma;
    const double eps = 1e-3 * f.model.pump_amplitude;
    const cplx a = run_oracle(f.model, f.state, delta, eps, {}).demod.component;
    const cplx b = run_oracle(f.model, f.state, delta, eps, {}, delta).demod.component;
    EXPECT_LT(std::abs(a - b) / std::abs(a), 1e-5);
}

TEST(Oracle, TraceDump) {
    const auto f = fig3();
    std::ostringstream out;
    OracleSettings o;
    o.settle_widths = 20;
    run_oracle(f.model, f.state, f.model.omega_b + f.gamma, 1e-3 * f.model.pump_amplitude, o, 0.0, &out, 1000);
    const auto text = out.str();
    EXPECT_EQ(text.rfind("t_s,re_a,im_a,re_b,im_b\n", 0), 0u);
    EXPECT_GT(std::count(text.begin(), text.end(), '\n'), 50);
}
