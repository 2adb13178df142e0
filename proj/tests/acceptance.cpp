// Acceptance battery: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "dicke/errors.hpp"
#include "dicke/expcli/config.hpp"
#include "dicke/expcli/experiments.hpp"
#include "dicke/lindblad.hpp"
#include "dicke/meanfield.hpp"
#include "dicke/parallel.hpp"
#include "dicke/params.hpp"
#include "dicke/spectrum.hpp"

using namespace dicke;
using units::MHz;
using units::to_MHz;

namespace {

struct Outcome
{
    bool passed = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string config_path() { return std::string(DICKE_SOURCE_DIR) + "/configs/lab.cfg"; }

expcli::ScenarioConfig scenario(expcli::Experiment e)
{
    return expcli::build_scenario(expcli::ConfigFile::load(config_path()), e);
}

Outcome threshold_oracle()
{
    std::vector<double> axis;
    for (int i = 0; i < 5; ++i)
        axis.push_back(MHz(0.1 + (2.0 - 0.1) * i / 4.0));
    const double kappas[] = {MHz(0.03), MHz(0.07), MHz(0.2)};
    const auto errs = parallel_map(75, [&](std::size_t k) {
        params::EffectiveParams e;
        e.omega0 = axis[k / 15];
        e.omega = axis[(k / 3) % 5];
        e.kappa = kappas[k % 3];
        e.n_lambda = 1000;
        const double lc = params::critical_coupling(e);
        return std::abs(meanfield::refine_threshold(e, 0.5 * lc, 1.5 * lc) / lc - 1.0);
    });
    const double worst = *std::max_element(errs.begin(), errs.end());
    return {worst < 0.01, fmt("worst relative error %.3e over 75 points (limit 1e-2)", worst)};
}

Outcome splitting_closure()
{
    const auto s = scenario(expcli::Experiment::transmission);
    const auto eff = params::effective_params(s.tc, s.tc_stark);
    const hilbert::FockSpace fock(s.transmission_n_max);
    const hilbert::SpinSpace spin(s.transmission_spin_atoms);
    const double eta_p = eff.kappa * std::sqrt(s.probe_photons);
    const auto scan = lindblad::transmission_scan(eff, s.transmission_probe, eta_p, fock, spin);
    const auto fit = spectrum::splitting_from_scan(scan, 0.5 * eff.kappa);
    const auto modes = spectrum::tc_normal_modes(eff.lower_state_cavity(), eff.omega0, eff.lambda_r);
    const double half = 0.5 * fit.splitting;
    const double rel = std::abs(half / MHz(0.173) - 1.0);
    const double d1 = std::abs(fit.peak1 - spectrum::to_probe_detuning(eff, modes.lower));
    const double d2 = std::abs(fit.peak2 - spectrum::to_probe_detuning(eff, modes.upper));
    const bool ok = rel < 0.05 && std::max(d1, d2) < 0.5 * eff.kappa;
    return {ok, fmt("half-splitting %.5f MHz (%.2f%% off 0.173), peak offsets %.4f/%.4f MHz (limit %.3f)",
                    to_MHz(half), 100.0 * rel, to_MHz(d1), to_MHz(d2), to_MHz(0.5 * eff.kappa))};
}

Outcome asymmetry()
{
    const auto s = scenario(expcli::Experiment::params);
    const auto e = params::effective_params(s.dicke, s.dicke_stark);
    const double a = (e.lambda_s - e.lambda_r) / (e.lambda_s + e.lambda_r);
    return {std::abs(a - 0.028) <= 0.002, fmt("asymmetry %.5f (target 0.028 +- 0.002)", a)};
}

Outcome atom_number()
{
    const auto s = scenario(expcli::Experiment::params);
    const long n = params::atoms_from_shift(MHz(-0.5), s.tc);
    return {n >= 100000 && n <= 140000 && n < 200000, fmt("N = %ld (window 1.0e5 .. 1.4e5, max 2e5)", n)};
}

Outcome counts()
{
    const auto s = scenario(expcli::Experiment::ramp);
    const double kappa = s.tc.kappa;
    const double eff = 7.8 / expcli::counts_model(10.0, 1.0, 5.0, kappa);
    const double back = expcli::counts_model(10.0, s.detection_efficiency, 5.0, kappa);
    const bool ok = std::abs(eff - 0.18) <= 0.02 && std::abs(s.detection_efficiency - eff) < 1e-12 &&
                    std::abs(back - 7.8) < 1e-9;
    return {ok, fmt("efficiency %.5f (target 0.18 +- 0.02), 10 photons -> %.4f counts per 5 us", eff, back)};
}

Outcome scattering()
{
    const auto s = scenario(expcli::Experiment::params);
    const double r = params::scattering_rate_estimate(s.dicke);
    return {r >= 0.3 && r <= 0.8, fmt("rate %.4f /ms at %.1f mW per beam (band 0.3 .. 0.8)", r, s.power_per_beam)};
}

Outcome ramp_delay()
{
    const auto s = scenario(expcli::Experiment::ramp);
    const auto pm = s.power_model();
    const double p_static = meanfield::static_threshold_power(pm, s.ramp.p_start, s.ramp.p_end);
    const std::vector<double> durations{1.0, 3.0, 10.0, 30.0};
    const auto p = parallel_map(durations.size(), [&](std::size_t i) {
        auto ramp = s.ramp;
        ramp.duration = units::ms(durations[i]);
        return meanfield::ramp_experiment(pm, ramp, s.detector).threshold.p_threshold;
    });
    bool ok = true;
    for (std::size_t i = 0; i < p.size(); ++i) {
        ok = ok && std::isfinite(p[i]) && p[i] >= p_static;
        if (i > 0)
            ok = ok && p[i] < p[i - 1];
    }
    return {ok, fmt("static %.4f mW; ramps 1/3/10/30 ms -> %.4f %.4f %.4f %.4f mW", p_static, p[0], p[1], p[2],
                    p[3])};
}

Outcome cross_validation(const std::vector<expcli::CheckResult>& checks)
{
    std::string detail;
    bool ok = true;
    int found = 0;
    for (const auto& c : checks) {
        if (c.id != "crossval.above" && c.id != "crossval.below")
            continue;
        ++found;
        ok = ok && c.passed;
        detail += fmt("%s %.4g (limit %.3g) ", c.id.c_str(), c.measured, c.tolerance);
    }
    return {ok && found == 2, detail};
}

Outcome invariants(const std::vector<expcli::CheckResult>& checks)
{
    std::string failed;
    int n = 0;
    for (const auto& c : checks) {
        if (c.id.rfind("crossval.", 0) == 0)
            continue;
        ++n;
        if (!c.passed)
            failed += " " + c.id;
    }
    return {failed.empty() && n > 0,
            failed.empty() ? fmt("%d invariant checks pass", n) : "failed:" + failed};
}

} // namespace

int main()
{
    using clock = std::chrono::steady_clock;
    bool all = true;
    auto report = [&](int id, const char* name, const std::function<Outcome()>& f) {
        const auto t0 = clock::now();
        Outcome o;
        try {
            o = f();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(clock::now() - t0).count();
        all = all && o.passed;
        std::printf("%s %d %-24s %s [%.1f s]\n", o.passed ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
        std::fflush(stdout);
    };

    report(1, "critical-coupling", threshold_oracle);
    report(2, "splitting-closure", splitting_closure);
    report(3, "coupling-asymmetry", asymmetry);
    report(4, "atom-number", atom_number);
    report(5, "counts-arithmetic", counts);
    report(6, "scattering-rate", scattering);
    std::vector<expcli::CheckResult> battery;
    auto run_battery = [&] {
        if (battery.empty())
            battery = expcli::quantum_check(scenario(expcli::Experiment::quantum_check).quantum);
        return battery;
    };
    report(7, "quantum-vs-meanfield", [&] { return cross_validation(run_battery()); });
    report(8, "ramp-delay", ramp_delay);
    report(9, "invariant-suites", [&] { return invariants(run_battery()); });
    return all ? 0 : 1;
}
