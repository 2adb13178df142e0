#include "dicke/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include <unsupported/Eigen/LevenbergMarquardt>
#include <unsupported/Eigen/NumericalDiff>

#include "dicke/errors.hpp"
#include "dicke/parallel.hpp"

namespace dicke::spectrum {

namespace {

// Parameters: A1, c1, A2, c2, w.
struct TwoLorentzians : Eigen::DenseFunctor<double>
{
    const std::vector<std::pair<double, double>>* data;

    explicit TwoLorentzians(const std::vector<std::pair<double, double>>& d)
        : Eigen::DenseFunctor<double>(5, static_cast<int>(d.size())), data(&d)
    {
    }

    static double shape(double x, double c, double w)
    {
        const double u = (x - c) / w;
        return 1.0 / (1.0 + u * u);
    }

    static double model(const Eigen::VectorXd& p, double x)
    {
        return p(0) * shape(x, p(1), p(4)) + p(2) * shape(x, p(3), p(4));
    }

    int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& fvec) const
    {
        for (std::size_t i = 0; i < data->size(); ++i)
            fvec(static_cast<Eigen::Index>(i)) = model(p, (*data)[i].first) - (*data)[i].second;
        return 0;
    }
};

std::vector<std::size_t> local_maxima(const std::vector<std::pair<double, double>>& scan)
{
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < scan.size(); ++i) {
        const double y = scan[i].second;
        const bool left = i == 0 || y > scan[i - 1].second;
        const bool right = i + 1 == scan.size() || y >= scan[i + 1].second;
        if (left && right)
            idx.push_back(i);
    }
    return idx;
}

} // namespace

NormalModes tc_normal_modes(double omega_cav, double omega0, double lambda_r)
{
    const double mean = 0.5 * (omega_cav + omega0);
    const double half = 0.5 * (omega_cav - omega0);
    const double root = std::sqrt(half * half + lambda_r * lambda_r);
    return {mean - root, mean + root};
}

AvoidedCrossing avoided_crossing(const std::vector<double>& omega_cav_grid, double omega0,
                                 double lambda_r)
{
    AvoidedCrossing out;
    out.splitting_min = std::numeric_limits<double>::infinity();
    for (double w : omega_cav_grid) {
        const auto m = tc_normal_modes(w, omega0, lambda_r);
        out.branch_lower.emplace_back(w, m.lower);
        out.branch_upper.emplace_back(w, m.upper);
        out.splitting_min = std::min(out.splitting_min, m.splitting());
    }
    return out;
}

SplittingFit splitting_from_scan(std::vector<std::pair<double, double>> scan, double width_seed)
{
    if (scan.size() < 6)
        throw FitDegenerate("scan too short for a two-Lorentzian fit");
    if (!(width_seed > 0.0))
        throw OutsideValidity("width seed must be positive");
    std::sort(scan.begin(), scan.end());

    double peak = 0.0;
    for (const auto& [x, y] : scan)
        peak = std::max(peak, y);
    if (!(peak > 0.0))
        throw FitDegenerate("scan has no positive signal");
    for (auto& p : scan)
        p.second /= peak;

    auto maxima = local_maxima(scan);
    if (maxima.size() < 2)
        throw FitDegenerate("scan shows a single peak");
    std::partial_sort(maxima.begin(), maxima.begin() + 2, maxima.end(),
                      [&](std::size_t a, std::size_t b) { return scan[a].second > scan[b].second; });
    const std::size_t i1 = std::min(maxima[0], maxima[1]);
    const std::size_t i2 = std::max(maxima[0], maxima[1]);

    Eigen::VectorXd p(5);
    p << scan[i1].second, scan[i1].first, scan[i2].second, scan[i2].first, width_seed;

    TwoLorentzians f(scan);
    Eigen::NumericalDiff<TwoLorentzians> diff(f);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<TwoLorentzians>> lm(diff);
    lm.setXtol(1e-12);
    lm.setFtol(1e-12);
    lm.setMaxfev(4000);
    lm.minimize(p);

    if (!p.allFinite())
        throw FitDegenerate("fit diverged");
    SplittingFit fit;
    fit.width = std::abs(p(4));
    fit.amplitude1 = p(0) * peak;
    fit.amplitude2 = p(2) * peak;
    fit.peak1 = std::min(p(1), p(3));
    fit.peak2 = std::max(p(1), p(3));
    if (p(1) > p(3))
        std::swap(fit.amplitude1, fit.amplitude2);
    fit.splitting = fit.peak2 - fit.peak1;

    Eigen::VectorXd r(static_cast<Eigen::Index>(scan.size()));
    f(p, r);
    fit.residual = peak * std::sqrt(r.squaredNorm() / static_cast<double>(scan.size()));

    if (fit.splitting < 2.0 * fit.width)
        throw FitDegenerate("peaks unresolved: separation " + std::to_string(fit.splitting) +
                            " below the fitted FWHM " + std::to_string(2.0 * fit.width));
    return fit;
}

SplittingFit splitting_from_scan(const std::vector<lindblad::TransmissionPoint>& scan, double width_seed)
{
    std::vector<std::pair<double, double>> xy;
    xy.reserve(scan.size());
    for (const auto& p : scan)
        xy.emplace_back(p.delta_p, p.normalized);
    return splitting_from_scan(std::move(xy), width_seed);
}

params::EffectiveParams effective_for_atoms(const params::PhysicalConfig& cfg, long atoms,
                                            std::optional<double> stark_shift)
{
    if (atoms < 0)
        throw OutsideValidity("atom number must be non-negative");
    if (atoms > 0) {
        params::PhysicalConfig c = cfg;
        c.n_total = atoms;
        return params::effective_params(c, stark_shift);
    }
    params::PhysicalConfig c = cfg;
    c.n_total = 1;
    params::EffectiveParams eff = params::effective_params(c, stark_shift);
    eff.omega = eff.empty_cavity;
    eff.delta = 0.0;
    eff.lambda_r = 0.0;
    eff.lambda_s = 0.0;
    return eff;
}

CrossingMap crossing_map(const params::PhysicalConfig& cfg, const std::vector<long>& atom_numbers,
                         const std::vector<double>& probe_grid, const CrossingMapOptions& opts,
                         std::optional<double> stark_shift)
{
    if (atom_numbers.empty() || probe_grid.empty())
        throw OutsideValidity("crossing map needs nonempty atom-number and probe grids");
    if (!(opts.bin_width > 0.0))
        throw OutsideValidity("bin width must be positive");

    const hilbert::FockSpace fock(opts.n_max);
    const hilbert::SpinSpace spin(opts.spin_atoms);
    const double eta_p = opts.eta_p > 0.0 ? opts.eta_p : 0.1 * cfg.kappa;

    struct Trace
    {
        double omega_d;
        params::EffectiveParams eff;
        std::vector<double> values;
    };
    auto traces = parallel_map(atom_numbers.size(), [&](std::size_t i) {
        const long atoms = atom_numbers[i];
        Trace tr;
        tr.eff = effective_for_atoms(cfg, atoms, stark_shift);
        if (opts.fixed_lambda_r && atoms > 0)
            tr.eff.lambda_r = *opts.fixed_lambda_r;
        tr.omega_d = atoms > 0 ? params::dispersive_shift(static_cast<double>(atoms), cfg) : 0.0;
        const auto scan = lindblad::transmission_scan(tr.eff, probe_grid, eta_p, fock, spin, opts.steady);
        for (const auto& p : scan)
            tr.values.push_back(p.normalized);
        return tr;
    });

    std::map<long, CrossingBin> bins;
    for (const auto& tr : traces) {
        const long key = std::lround(tr.omega_d / opts.bin_width);
        auto [it, fresh] = bins.try_emplace(key);
        CrossingBin& b = it->second;
        if (fresh) {
            b.center = static_cast<double>(key) * opts.bin_width;
            b.transmission.assign(probe_grid.size(), 0.0);
        }
        for (std::size_t k = 0; k < probe_grid.size(); ++k)
            b.transmission[k] += tr.values[k];
        // Overlay lines, averaged over the traces of the bin.
        const params::EffectiveParams& e = tr.eff;
        const auto m = tc_normal_modes(e.lower_state_cavity(), e.omega0, e.lambda_r);
        b.cavity += to_probe_detuning(e, e.lower_state_cavity());
        b.omega0 += to_probe_detuning(e, e.omega0);
        b.branches.lower += to_probe_detuning(e, m.lower);
        b.branches.upper += to_probe_detuning(e, m.upper);
        ++b.traces;
    }

    CrossingMap out;
    out.probe_grid = probe_grid;
    for (auto& [key, b] : bins) {
        const double n = static_cast<double>(b.traces);
        for (double& v : b.transmission)
            v /= n;
        b.cavity /= n;
        b.omega0 /= n;
        b.branches.lower /= n;
        b.branches.upper /= n;
        out.bins.push_back(std::move(b));
    }
    return out;
}

} // namespace dicke::spectrum
