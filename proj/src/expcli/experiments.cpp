#include "dicke/expcli/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "dicke/errors.hpp"
#include "dicke/hilbert.hpp"
#include "dicke/lindblad.hpp"
#include "dicke/meanfield.hpp"
#include "dicke/spectrum.hpp"

namespace dicke::expcli {

using units::to_MHz;

double counts_model(double photons, double efficiency, double bin, double kappa)
{
    if (!(efficiency > 0.0 && efficiency <= 1.0))
        throw OutsideValidity("detection efficiency must lie in (0, 1]");
    if (!(bin > 0.0))
        throw OutsideValidity("counting bin must be positive");
    return efficiency * 2.0 * kappa * photons * bin;
}

std::vector<double> counts_model(const std::vector<double>& photons, double efficiency, double bin,
                                 double kappa)
{
    std::vector<double> out;
    out.reserve(photons.size());
    for (double n : photons)
        out.push_back(counts_model(n, efficiency, bin, kappa));
    return out;
}

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

double max_abs(const hilbert::Matrix& m)
{
    return m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
}

hilbert::Vector product_ket(const hilbert::Vector& fock, const hilbert::Vector& spin)
{
    hilbert::Vector out(fock.size() * spin.size());
    for (Eigen::Index n = 0; n < fock.size(); ++n)
        out.segment(n * spin.size(), spin.size()) = fock(n) * spin;
    return out;
}

hilbert::Vector spin_down(const hilbert::SpinSpace& spin)
{
    hilbert::Vector v = hilbert::Vector::Zero(spin.dim());
    v(0) = 1.0;
    return v;
}

double spectral_distance(const hilbert::Matrix& a, const hilbert::Matrix& b)
{
    return max_abs(a - b);
}

// Relative distance between the coupling where the normal state turns
// unstable and the closed-form critical coupling, maximised over a grid.
double jacobian_threshold_mismatch(double kappa, bool corrupt_sign)
{
    const std::vector<double> freqs = {units::MHz(0.1), units::MHz(0.5), units::MHz(1.0), units::MHz(1.5),
                                       units::MHz(2.0)};
    double worst = 0.0;
    for (double w0 : freqs) {
        for (double wc : freqs) {
            params::EffectiveParams eff;
            eff.omega = wc;
            eff.omega0 = w0;
            eff.kappa = kappa;
            const double lc = params::critical_coupling(eff);
            params::EffectiveParams fixture = eff;
            if (corrupt_sign)
                fixture.omega0 = -fixture.omega0;
            auto rate = [&](double lam) {
                return meanfield::normal_state_growth_rate(meanfield::with_coupling(fixture, lam));
            };
            double lo = 0.5 * lc, hi = 2.0 * lc;
            if (rate(lo) >= 0.0 || rate(hi) <= 0.0)
                return inf;
            for (int k = 0; k < 60; ++k) {
                const double mid = 0.5 * (lo + hi);
                (rate(mid) > 0.0 ? hi : lo) = mid;
            }
            worst = std::max(worst, std::abs(0.5 * (lo + hi) / lc - 1.0));
        }
    }
    return worst;
}

} // namespace

std::vector<CheckResult> quantum_check(const QuantumCheckConfig& q)
{
    std::vector<CheckResult> out;
    auto add = [&out](std::string id, double measured, double tol, std::string detail = {}) {
        out.push_back({std::move(id), measured, tol, measured <= tol, std::move(detail)});
    };
    auto guarded = [&](const std::string& id, double tol, auto&& body) {
        try {
            add(id, body(), tol);
        } catch (const std::exception& e) {
            add(id, inf, tol, e.what());
        }
    };

    const hilbert::FockSpace fock_small(std::min(q.n_max, 6));
    const hilbert::SpinSpace spin(q.n_lambda);
    const auto ops = hilbert::composite_ops(fock_small, spin);
    const double lam = 0.37 * std::max(std::abs(q.omega), std::abs(q.omega0));

    guarded("hilbert.canonical", 1e-10, [&] {
        const auto a = hilbert::annihilation(fock_small);
        const hilbert::Matrix c = hilbert::commutator(a, a.adjoint()).matrix();
        const int n = fock_small.n_max;
        return max_abs(c.topLeftCorner(n, n) - hilbert::Matrix::Identity(n, n));
    });
    guarded("hilbert.su2", 1e-10, [&] {
        const auto j = hilbert::collective_ops(spin);
        const double e1 = max_abs((hilbert::commutator(j.plus, j.minus) - hilbert::cplx(2.0) * j.z).matrix());
        const double e2 = max_abs((hilbert::commutator(j.z, j.plus) - j.plus).matrix());
        const double e3 = max_abs((hilbert::commutator(j.z, j.minus) + j.minus).matrix());
        return std::max({e1, e2, e3});
    });
    guarded("hilbert.hermitian", 1e-10, [&] {
        return hilbert::hamiltonian_scaled(q.omega, q.omega0, q.delta, lam, 1.1 * lam, fock_small, spin)
            .hermiticity_defect();
    });
    guarded("tc.excitation", 1e-10, [&] {
        const auto h = hilbert::hamiltonian_tc(q.omega, q.omega0, lam, fock_small, spin);
        return commutator(h, ops.n + ops.j_z).norm();
    });
    guarded("dicke.parity", 1e-10, [&] {
        const auto h = hilbert::hamiltonian_scaled(q.omega, q.omega0, q.delta, lam, lam, fock_small, spin);
        return commutator(h, hilbert::parity_operator(fock_small, spin)).norm();
    });

    // Closed-system dynamics on a small space.
    const hilbert::FockSpace fock_dyn(8);
    const hilbert::SpinSpace spin_dyn(std::min<long>(q.n_lambda, 2));
    const auto ops_dyn = hilbert::composite_ops(fock_dyn, spin_dyn);
    const auto rho0 = hilbert::DensityMatrix::pure(
        product_ket(hilbert::coherent_ket(fock_dyn, {0.6, 0.2}), spin_down(spin_dyn)), ops_dyn.dims);
    lindblad::EvolveSpec closed;
    closed.t_final = 5.0 / std::max({std::abs(q.omega), std::abs(q.omega0), 0.1});
    closed.sample_interval = closed.t_final / 10.0;
    closed.rel_tol = 1e-11;
    closed.abs_tol = 1e-13;
    closed.truncation_limit = 1e-2;

    guarded("tc.excitation_dynamics", 1e-8, [&] {
        const auto h = hilbert::hamiltonian_tc(q.omega, q.omega0, lam, fock_dyn, spin_dyn);
        const auto x = ops_dyn.n + ops_dyn.j_z;
        const auto r = lindblad::evolve(rho0, h, 0.0, closed);
        double drift = 0.0;
        for (const auto& s : r.states)
            drift = std::max(drift, std::abs(s.expect(x) - rho0.expect(x)));
        return drift;
    });
    guarded("dicke.parity_dynamics", 1e-8, [&] {
        const auto h = hilbert::hamiltonian_scaled(q.omega, q.omega0, q.delta, lam, lam, fock_dyn, spin_dyn);
        const auto p = hilbert::parity_operator(fock_dyn, spin_dyn);
        const auto r = lindblad::evolve(rho0, h, 0.0, closed);
        double drift = 0.0;
        for (const auto& s : r.states)
            drift = std::max(drift, std::abs(s.expect(p) - rho0.expect(p)));
        return drift;
    });

    // Open dynamics with the configured decay.
    {
        const auto h = hilbert::hamiltonian_scaled(q.omega, q.omega0, q.delta, lam, lam, fock_dyn, spin_dyn);
        lindblad::EvolveSpec open = closed;
        try {
            const auto r = lindblad::evolve(rho0, h, q.kappa, open);
            double herm = 0.0;
            for (const auto& s : r.states)
                herm = std::max(herm, max_abs(s.matrix() - s.matrix().adjoint()));
            add("lindblad.trace", r.max_trace_drift, 1e-8);
            add("lindblad.hermiticity", herm, 1e-10);
            add("lindblad.positivity", std::max(0.0, -r.min_eigenvalue), 1e-7);
            if (q.kappa == 0.0) {
                double purity = 0.0;
                for (const auto& s : r.states)
                    purity = std::max(purity, std::abs(s.purity() - 1.0));
                add("lindblad.purity", purity, 1e-8);
            }
        } catch (const std::exception& e) {
            add("lindblad.trace", inf, 1e-8, e.what());
        }
    }

    if (q.kappa > 0.0) {
        guarded("lindblad.steady_vs_evolve", 1e-6, [&] {
            const hilbert::SpinSpace two(2);
            const auto o = hilbert::composite_ops(fock_dyn, two);
            params::EffectiveParams eff;
            eff.omega = q.omega;
            eff.omega0 = q.omega0;
            eff.kappa = q.kappa;
            const double l = 0.5 * params::critical_coupling(q.omega0, q.omega - 0.5 * q.delta, q.kappa);
            const auto h = hilbert::hamiltonian_scaled(q.omega, q.omega0, q.delta, l, l, fock_dyn, two);
            const auto ss = lindblad::steady_state(h, q.kappa);
            lindblad::EvolveSpec spec;
            const Eigen::ComplexEigenSolver<hilbert::Matrix> es(
                hilbert::Matrix(lindblad::liouvillian_matrix(h, q.kappa)), false);
            double gap = std::numeric_limits<double>::infinity();
            for (const auto& ev : es.eigenvalues())
                if (std::abs(ev) > 1e-9)
                    gap = std::min(gap, -ev.real());
            spec.t_final = 25.0 / std::max(gap, 1e-3 * q.kappa);
            spec.rel_tol = 1e-10;
            spec.abs_tol = 1e-13;
            const auto start = hilbert::DensityMatrix::basis(fock_dyn, two, 0, -1.0);
            const auto r = lindblad::evolve(start, h, q.kappa, spec);
            const auto& last = r.states.back();
            double diff = 0.0;
            for (const auto* op : {&o.n, &o.j_z, &o.a})
                diff = std::max(diff, std::abs(last.expect(*op) - ss.expect(*op)));
            return std::max(diff, spectral_distance(last.matrix(), ss.matrix()));
        });
    }

    guarded("meanfield.jacobian", 1e-2, [&] {
        return jacobian_threshold_mismatch(q.kappa > 0.0 ? q.kappa : 0.5, q.fault == "omega0_sign");
    });

    params::EffectiveParams mf;
    mf.omega = q.omega;
    mf.omega0 = q.omega0;
    mf.delta = q.delta;
    mf.kappa = q.kappa;
    mf.n_lambda = q.n_lambda;
    const double scale = std::max({std::abs(q.omega), std::abs(q.omega0), 0.1});

    guarded("meanfield.spin_length", 1e-8, [&] {
        const double lc = params::critical_coupling(mf);
        meanfield::MeanFieldSpec spec;
        spec.t_final = 200.0 / scale;
        const auto r = meanfield::integrate_mean_field(meanfield::MeanFieldState::seeded(0.05),
                                                       meanfield::with_coupling(mf, q.above * lc), spec);
        return r.max_spin_drift;
    });
    guarded("meanfield.z2", 1e-12, [&] {
        const double lc = params::critical_coupling(mf);
        const auto eff = meanfield::with_coupling(mf, q.above * lc);
        meanfield::MeanFieldSpec spec;
        spec.t_final = 50.0 / scale;
        const auto r1 = meanfield::integrate_mean_field(meanfield::MeanFieldState::seeded(1e-3), eff, spec);
        const auto r2 = meanfield::integrate_mean_field(meanfield::MeanFieldState::seeded(-1e-3), eff, spec);
        const auto& s1 = r1.states.back();
        const auto& s2 = r2.states.back();
        return std::max({std::abs(s1.a_c + s2.a_c), std::abs(s1.s_minus + s2.s_minus), std::abs(s1.s_z - s2.s_z)});
    });

    if (q.kappa > 0.0) {
        const hilbert::FockSpace fock(q.n_max);
        const auto o = hilbert::composite_ops(fock, spin);
        const double nl = static_cast<double>(q.n_lambda);
        auto quantum_photons = [&](double l) {
            const auto h = hilbert::hamiltonian_scaled(q.omega, q.omega0, q.delta, l, l, fock, spin);
            return lindblad::steady_state(h, q.kappa).expect(o.n).real();
        };
        guarded("crossval.above", q.agreement, [&] {
            const double lc = params::critical_coupling(mf);
            const double quantum = quantum_photons(q.above * lc) / nl;
            const auto st = meanfield::steady_state(meanfield::with_coupling(mf, q.above * lc));
            const double classical = std::norm(st.a_c);
            return std::abs(quantum - classical) / classical;
        });
        guarded("crossval.below", 0.1, [&] {
            return quantum_photons(q.below * params::critical_coupling(mf));
        });
    }

    guarded("spectrum.single_excitation", 1e-10, [&] {
        double worst = 0.0;
        for (long atoms : {1L, 4L}) {
            const hilbert::SpinSpace s(atoms);
            const hilbert::FockSpace f(2);
            const double wc = 1.3 * scale, w0 = 0.9 * scale, l = 0.4 * scale;
            const auto h = hilbert::hamiltonian_tc(wc, w0, l, f, s).matrix();
            const double j = s.j();
            const int ground = hilbert::basis_index(s, 0, -j);
            const int photon = hilbert::basis_index(s, 1, -j);
            const int flip = hilbert::basis_index(s, 0, -j + 1);
            Eigen::Matrix2cd block;
            block << h(photon, photon), h(photon, flip), h(flip, photon), h(flip, flip);
            block -= h(ground, ground) * Eigen::Matrix2cd::Identity();
            const Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd>(block).eigenvalues();
            const auto modes = spectrum::tc_normal_modes(wc, w0, l);
            worst = std::max({worst, std::abs(ev(0) - modes.lower), std::abs(ev(1) - modes.upper)});
        }
        return worst;
    });

    guarded("determinism", 0.0, [&] {
        meanfield::MeanFieldSpec spec;
        spec.t_final = 20.0 / scale;
        const auto eff = meanfield::with_coupling(mf, 1.2 * (mf.kappa > 0 ? params::critical_coupling(mf) : scale));
        const auto a = meanfield::integrate_mean_field(meanfield::MeanFieldState::seeded(), eff, spec);
        const auto b = meanfield::integrate_mean_field(meanfield::MeanFieldState::seeded(), eff, spec);
        const auto va = meanfield::to_vector(a.states.back());
        const auto vb = meanfield::to_vector(b.states.back());
        return (va.array() == vb.array()).all() ? 0.0 : 1.0;
    });
    return out;
}

namespace {

std::string utc_now()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Json mhz(double w)
{
    return to_MHz(w);
}

Json number_or_null(double v)
{
    return std::isfinite(v) ? Json(v) : Json(nullptr);
}

Json effective_json(const params::EffectiveParams& e)
{
    Json j;
    j["omega_MHz"] = mhz(e.omega);
    j["omega0_MHz"] = mhz(e.omega0);
    j["delta_MHz"] = mhz(e.delta);
    j["lower_state_cavity_MHz"] = mhz(e.lower_state_cavity());
    j["lambda_r_MHz"] = mhz(e.lambda_r);
    j["lambda_s_MHz"] = mhz(e.lambda_s);
    j["lambda_MHz"] = mhz(e.dicke_coupling());
    j["omega_dS_MHz"] = mhz(e.omega_ds);
    j["Delta_r_MHz"] = mhz(e.delta_r);
    j["Delta_s_MHz"] = mhz(e.delta_s);
    j["N_lambda"] = e.n_lambda;
    try {
        j["lambda_c_MHz"] = mhz(params::critical_coupling(e));
    } catch (const Error&) {
        j["lambda_c_MHz"] = nullptr;
    }
    return j;
}

void print_aligned(std::ostream& log, const std::string& title, const Json& j)
{
    log << title << "\n";
    for (const auto& [k, v] : j.items())
        log << "  " << std::left << std::setw(24) << k << " " << v.dump() << "\n";
}

RunRecord run_params(const ScenarioConfig& s, std::ostream& log)
{
    RunRecord rec;
    const auto dicke = params::effective_params(s.dicke, s.dicke_stark ? std::optional<double>(*s.dicke_stark *
                                                                        (s.power_per_beam / s.dicke_stark_power))
                                                                  : std::nullopt);
    const auto dicke_evaluated = params::effective_params(s.dicke);
    const auto tc = params::effective_params(s.tc, s.tc_stark);

    Json lab;
    lab["N_total"] = s.dicke.n_total;
    lab["omega_d_MHz"] = mhz(params::dispersive_shift(static_cast<double>(s.dicke.n_total), s.dicke));
    lab["power_per_beam_mW"] = s.power_per_beam;
    lab["c_rabi_MHz_per_sqrt_mW"] = mhz(s.calibration.c_rabi);
    lab["rabi_MHz"] = mhz(s.dicke.rabi_r);
    lab["asymmetry"] = (dicke.lambda_s - dicke.lambda_r) / (dicke.lambda_s + dicke.lambda_r);
    lab["omega_dS_evaluated_MHz"] = mhz(dicke_evaluated.omega_ds);
    lab["scattering_rate_per_ms"] = params::scattering_rate_estimate(s.dicke);
    lab["detection_efficiency"] = s.detection_efficiency;

    rec.summary["lab"] = lab;
    rec.summary["dicke"] = effective_json(dicke);
    rec.summary["tc"] = effective_json(tc);
    print_aligned(log, "lab", lab);
    print_aligned(log, "dicke (both beams)", rec.summary["dicke"]);
    print_aligned(log, "tc (single beam)", rec.summary["tc"]);

    std::ostringstream text;
    print_aligned(text, "lab", lab);
    print_aligned(text, "dicke (both beams)", rec.summary["dicke"]);
    print_aligned(text, "tc (single beam)", rec.summary["tc"]);
    rec.add("params.txt", text.str());
    return rec;
}

RunRecord run_transmission(const ScenarioConfig& s, std::ostream& log)
{
    RunRecord rec;
    const auto eff = params::effective_params(s.tc, s.tc_stark);
    const hilbert::FockSpace fock(s.transmission_n_max);
    const hilbert::SpinSpace spin(s.transmission_spin_atoms);
    const double eta_p = eff.kappa * std::sqrt(s.probe_photons);
    const auto scan = lindblad::transmission_scan(eff, s.transmission_probe, eta_p, fock, spin);

    CsvTable table({"delta_p_MHz", "n_ss", "transmission"});
    for (const auto& p : scan)
        table.add_row(std::vector<double>{to_MHz(p.delta_p), p.n_ss, p.normalized});
    rec.add("transmission.csv", table);

    const auto modes = spectrum::tc_normal_modes(eff.lower_state_cavity(), eff.omega0, eff.lambda_r);
    Json sum;
    sum["lambda_r_MHz"] = mhz(eff.lambda_r);
    sum["mode_lower_MHz"] = mhz(spectrum::to_probe_detuning(eff, modes.lower));
    sum["mode_upper_MHz"] = mhz(spectrum::to_probe_detuning(eff, modes.upper));
    try {
        const auto fit = spectrum::splitting_from_scan(scan, 0.5 * eff.kappa);
        sum["peak1_MHz"] = mhz(fit.peak1);
        sum["peak2_MHz"] = mhz(fit.peak2);
        sum["half_splitting_MHz"] = mhz(0.5 * fit.splitting);
        sum["fit_width_MHz"] = mhz(fit.width);
        sum["fit_residual"] = fit.residual;
    } catch (const FitDegenerate& e) {
        sum["fit_error"] = e.what();
    }
    rec.summary = sum;
    print_aligned(log, "transmission", sum);
    return rec;
}

RunRecord run_splitting_map(const ScenarioConfig& s, std::ostream& log)
{
    RunRecord rec;
    spectrum::CrossingMapOptions opts;
    opts.bin_width = s.map_bin;
    opts.n_max = s.map_n_max;
    opts.spin_atoms = s.map_spin_atoms;
    opts.eta_p = s.tc.kappa * std::sqrt(s.probe_photons);
    if (s.map_fixed_coupling)
        opts.fixed_lambda_r = params::effective_params(s.tc, s.tc_stark).lambda_r;
    const auto map = spectrum::crossing_map(s.tc, s.map_atoms, s.map_probe, opts, s.tc_stark);

    CsvTable longform({"bin_center_MHz", "delta_p_MHz", "transmission"});
    CsvTable overlay({"bin_center_MHz", "traces", "cavity_MHz", "omega0_MHz", "lower_MHz", "upper_MHz"});
    Json json;
    json["probe_MHz"] = Json::array();
    for (double p : map.probe_grid)
        json["probe_MHz"].push_back(to_MHz(p));
    json["bins"] = Json::array();

    Json sum;
    double best = inf;
    for (const auto& b : map.bins) {
        for (std::size_t k = 0; k < map.probe_grid.size(); ++k)
            longform.add_row(std::vector<double>{to_MHz(b.center), to_MHz(map.probe_grid[k]), b.transmission[k]});
        overlay.add_row(std::vector<double>{to_MHz(b.center), static_cast<double>(b.traces), to_MHz(b.cavity),
                                            to_MHz(b.omega0), to_MHz(b.branches.lower), to_MHz(b.branches.upper)});
        json["bins"].push_back({{"center_MHz", to_MHz(b.center)}, {"transmission", b.transmission}});
        const double gap = b.branches.splitting();
        if (gap < best) {
            best = gap;
            sum["min_gap_bin_MHz"] = to_MHz(b.center);
            sum["min_gap_MHz"] = to_MHz(gap);
            std::vector<std::pair<double, double>> xy;
            for (std::size_t k = 0; k < map.probe_grid.size(); ++k)
                xy.emplace_back(map.probe_grid[k], b.transmission[k]);
            try {
                sum["min_gap_fitted_MHz"] = to_MHz(spectrum::splitting_from_scan(xy, 0.5 * s.tc.kappa).splitting);
            } catch (const FitDegenerate& e) {
                sum["min_gap_fitted_MHz"] = nullptr;
            }
        }
    }
    sum["bins"] = map.bins.size();
    rec.add("map.csv", longform);
    rec.add("overlay.csv", overlay);
    rec.add("map.json", json);
    rec.summary = sum;
    print_aligned(log, "splitting map", sum);
    return rec;
}

RunRecord run_ramp(const ScenarioConfig& s, std::ostream& log)
{
    RunRecord rec;
    const auto model = s.power_model();
    const auto r = meanfield::ramp_experiment(model, s.ramp, s.detector, s.ramp_options);

    CsvTable table({"t_us", "P_mW", "lambda_MHz", "a2", "s_z", "photons", "counts"});
    for (const auto& p : r.series)
        table.add_row(std::vector<double>{p.t, p.power, to_MHz(p.lambda), p.a2, p.s_z, p.photons,
                                          counts_model(p.photons, s.detection_efficiency, s.counts_bin,
                                                       model.cfg.kappa)});
    rec.add("ramp.csv", table);

    Json sum;
    sum["P_threshold_mW"] = r.threshold.p_threshold;
    sum["lambda_threshold_MHz"] = mhz(r.threshold.lambda_at_threshold);
    sum["detection_time_us"] = r.threshold.detection_time;
    try {
        const double ps = meanfield::static_threshold_power(model, s.ramp.p_start, s.ramp.p_end);
        sum["P_static_mW"] = ps;
        sum["lambda_c_static_MHz"] = mhz(params::critical_coupling(model.at_power(ps)));
    } catch (const Error& e) {
        sum["static_error"] = e.what();
    }
    rec.summary = sum;
    print_aligned(log, "ramp", sum);
    return rec;
}

RunRecord run_threshold_map(const ScenarioConfig& s, std::ostream& log)
{
    RunRecord rec;
    meanfield::ThresholdMapOptions opts;
    opts.band_high = s.band_high;
    opts.band_low = s.band_low;
    opts.cross_check = s.cross_check;
    opts.ramp = s.ramp_options;
    opts.ramp.stop_at_detection = true;
    const auto rows = meanfield::threshold_map(s.power_model(), s.threshold_atoms, s.ramp, s.detector, opts);

    CsvTable table({"omega_d_MHz", "N", "P_threshold_mW", "lambda_dynamic_MHz", "P_static_mW",
                    "lambda_c_static_MHz", "P_static_band_high_mW", "P_static_band_low_mW",
                    "P_static_no_stark_mW", "lambda_c_scan_MHz", "detected", "note"});
    Json points = Json::array();
    for (const auto& r : rows) {
        table.add_row({format_number(to_MHz(r.omega_d)), std::to_string(r.n_total),
                       format_number(r.ramp.p_threshold), format_number(std::abs(to_MHz(r.ramp.lambda_at_threshold))),
                       format_number(r.p_static), format_number(to_MHz(r.lambda_static)),
                       format_number(r.p_static_high), format_number(r.p_static_low),
                       format_number(r.p_static_no_stark), format_number(to_MHz(r.lambda_scan)),
                       r.ramp.detected ? "true" : "false", r.note});
        points.push_back({{"omega_d_MHz", to_MHz(r.omega_d)},
                          {"N", r.n_total},
                          {"P_threshold_mW", number_or_null(r.ramp.p_threshold)},
                          {"P_static_mW", number_or_null(r.p_static)}});
    }
    rec.add("threshold_map.csv", table);
    Json sum;
    sum["points"] = points;
    sum["rows"] = rows.size();
    rec.summary = sum;
    log << "threshold map: " << rows.size() << " atom numbers\n";
    for (const auto& r : rows)
        log << "  omega_d = " << std::setw(8) << to_MHz(r.omega_d) << " MHz  P_ramp = " << std::setw(10)
            << r.ramp.p_threshold << " mW  P_static = " << std::setw(10) << r.p_static << " mW"
            << (r.note.empty() ? "" : "  [" + r.note + "]") << "\n";
    return rec;
}

RunRecord run_quantum_check(const ScenarioConfig& s, std::ostream& log)
{
    RunRecord rec;
    const auto results = quantum_check(s.quantum);
    CsvTable table({"check", "measured", "tolerance", "passed", "detail"});
    Json checks = Json::array();
    for (const auto& r : results) {
        table.add_row({r.id, format_number(r.measured), format_number(r.tolerance), r.passed ? "PASS" : "FAIL", r.detail});
        checks.push_back({{"check", r.id},
                          {"measured", number_or_null(r.measured)},
                          {"tolerance", r.tolerance},
                          {"passed", r.passed}});
        log << (r.passed ? "PASS " : "FAIL ") << std::left << std::setw(28) << r.id << " measured "
            << format_number(r.measured) << "  tolerance " << format_number(r.tolerance)
            << (r.detail.empty() ? "" : "  (" + r.detail + ")") << "\n";
    }
    rec.add("checks.csv", table);
    rec.summary["checks"] = checks;
    return rec;
}

} // namespace

RunRecord run_experiment(const ScenarioConfig& scenario, std::ostream& log)
{
    switch (scenario.experiment) {
    case Experiment::params: return run_params(scenario, log);
    case Experiment::transmission: return run_transmission(scenario, log);
    case Experiment::splitting_map: return run_splitting_map(scenario, log);
    case Experiment::ramp: return run_ramp(scenario, log);
    case Experiment::threshold_map: return run_threshold_map(scenario, log);
    case Experiment::quantum_check: return run_quantum_check(scenario, log);
    }
    throw Error("unhandled experiment");
}

int run(const RunRequest& request, std::ostream& out, std::ostream& err)
{
    ScenarioConfig scenario;
    ConfigFile file;
    try {
        const Experiment experiment = parse_experiment(request.experiment);
        file = request.config_path.empty() ? ConfigFile::parse("", "<none>") : ConfigFile::load(request.config_path);
        for (const auto& o : request.overrides)
            file.set(o);
        scenario = build_scenario(file, experiment);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const Error& e) {
        err << "invalid configuration: " << e.what() << "\n";
        return exit_config;
    }

    const std::string started = utc_now();
    RunRecord record;
    try {
        record = run_experiment(scenario, out);
    } catch (const Error& e) {
        err << experiment_name(scenario.experiment) << " failed: " << e.what() << "\n";
        return exit_runtime;
    }

    Json& m = record.manifest;
    m["program"] = "dicke-sim";
    m["version"] = version;
    m["experiment"] = experiment_name(scenario.experiment);
    m["config_file"] = file.origin();
    m["config"] = Json::object();
    for (const auto& [k, e] : file.entries())
        m["config"][k] = e.raw;
    m["overrides"] = request.overrides;
    m["command"] = request.command;
    m["files"] = Json::array();
    for (const auto& [name, _] : record.files)
        m["files"].push_back(name);
    m["started_utc"] = started;
    m["finished_utc"] = utc_now();

    int code = exit_ok;
    if (scenario.experiment == Experiment::quantum_check) {
        for (const auto& c : record.summary["checks"]) {
            if (!c["passed"].get<bool>()) {
                const CheckFailed failure("check failed", c["check"].get<std::string>());
                err << "check failed: " << failure.check_id() << "\n";
                record.summary["failed_check"] = failure.check_id();
                code = exit_check_failed;
                break;
            }
        }
    }

    if (!request.out_dir.empty()) {
        try {
            write_record(record, request.out_dir);
        } catch (const ConfigError& e) {
            err << "config error: " << e.what() << "\n";
            return exit_config;
        } catch (const std::exception& e) {
            err << "writing results failed: " << e.what() << "\n";
            return exit_runtime;
        }
    }
    return code;
}

} // namespace dicke::expcli
