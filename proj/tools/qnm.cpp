// Copyright 2025 The qnm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// qnm: Fisher-information toolkit for stochastic-signal sensing with bosonic
// modes. Subcommands: qfi, cfi, bounds, sweep, optimize, protocol, waveform,
// selftest. Exit codes: 0 ok, 1 numerical-tolerance failure (selftest),
// 2 usage or configuration error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qnm/bounds.hpp"
#include "qnm/channels.hpp"
#include "qnm/fisher.hpp"
#include "qnm/fock.hpp"
#include "qnm/gaussian.hpp"
#include "qnm/optimize.hpp"
#include "qnm/protocols.hpp"
#include "qnm/waveform.hpp"

namespace {

constexpr const char* kVersion = "qnm 0.1.0";

using qnm::CMat;
using qnm::Mat;
using qnm::Vec;
namespace fock = qnm::fock;
namespace fisher = qnm::fisher;
namespace channels = qnm::channels;
namespace bounds = qnm::bounds;

struct CliError {
    std::string message;
};

int max_dim_ceiling() {
    if (const char* env = std::getenv("QNM_MAX_DIM")) {
        const int v = std::atoi(env);
        if (v > 1) return v;
    }
    return 1500;
}

void check_dim(int dim) {
    if (dim < 2) throw CliError{"dim: must be >= 2"};
    if (dim > max_dim_ceiling())
        throw CliError{"dim: exceeds the configured ceiling (QNM_MAX_DIM)"};
}

std::vector<double> parse_grid(const std::string& text, const char* field) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw CliError{std::string(field) + ": cannot parse '" + tok + "'"};
        }
    }
    if (out.empty()) throw CliError{std::string(field) + ": empty grid"};
    return out;
}

struct CommonOpts {
    std::string state = "vacuum";
    double sigma = 0.1;
    std::string sigma_grid;
    double eta = 0.0;
    double eta_a = 0.0;
    double sigma_x = 0.0;
    double sigma_p = 0.0;
    double big_n = 1.0;
    double delta = 0.2;
    double alpha_re = 1.0;
    double alpha_im = 0.0;
    int fock_n = 0;
    std::string state_file;
    int dim = 60;
    int nodes = 41;
    std::uint64_t seed = 1;
    std::string out_path;
    std::string format = "csv";
    std::string config_path;
};

nlohmann::json effective_config(const CLI::App& cmd, const CommonOpts& o) {
    nlohmann::json j;
    j["command"] = cmd.get_name();
    j["state"] = o.state;
    j["sigma"] = o.sigma;
    if (!o.sigma_grid.empty()) j["sigma_grid"] = o.sigma_grid;
    j["eta"] = o.eta;
    j["eta_a"] = o.eta_a;
    j["sigma_x"] = o.sigma_x;
    j["sigma_p"] = o.sigma_p;
    j["N"] = o.big_n;
    j["delta"] = o.delta;
    j["dim"] = o.dim;
    j["nodes"] = o.nodes;
    j["seed"] = o.seed;
    j["format"] = o.format;
    return j;
}

std::ostream& open_output(const CommonOpts& o, std::ofstream& file) {
    if (o.out_path.empty()) return std::cout;
    file.open(o.out_path);
    if (!file) throw CliError{"out: cannot open '" + o.out_path + "'"};
    return file;
}

fock::PureState build_state(const CommonOpts& o, const fock::TruncatedSpace& space) {
    if (!o.state_file.empty()) {
        std::ifstream in(o.state_file);
        if (!in) throw CliError{"state-file: cannot open '" + o.state_file + "'"};
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        try {
            fock::PureState psi = fock::state_from_json(text);
            if (psi.space.dim != space.dim)
                throw CliError{"state-file: dim mismatch with --dim"};
            return psi;
        } catch (const std::exception& e) {
            throw CliError{std::string("state-file: ") + e.what()};
        }
    }
    std::map<std::string, double> params;
    params["n"] = o.fock_n;
    params["N"] = o.big_n;
    params["delta"] = o.delta;
    params["alpha_re"] = o.alpha_re;
    params["alpha_im"] = o.alpha_im;
    try {
        return fock::make_state(o.state, params, space);
    } catch (const std::invalid_argument& e) {
        throw CliError{std::string("state: ") + e.what()};
    }
}

struct PointResult {
    double qfi = 0.0;
    double cfi_number = 0.0;
    double cfi_quadrature = 0.0;
    double leakage = 0.0;
};

PointResult evaluate_point(const fock::PureState& psi, double sigma, const CommonOpts& o,
                           bool with_cfi) {
    const fock::TruncatedSpace space = psi.space;
    fisher::EncodedState enc;
    if (o.sigma_x > 0.0 || o.sigma_p > 0.0) {
        // classical noise before the encoding, generic channel route
        Mat sc = Mat::Zero(2, 2);
        sc(0, 0) = o.sigma_x * o.sigma_x;
        sc(1, 1) = o.sigma_p * o.sigma_p;
        const channels::Channel noise = channels::classical_noise_channel(sc, space, o.nodes);
        CMat rho = fock::to_density(psi).matrix;
        if (o.eta > 0.0) rho = channels::apply_loss(rho, o.eta);
        rho = noise.apply(rho);
        enc.rho = fock::DensityMatrix{
            space, channels::random_displacement_channel(sigma, channels::DisplacementAxis::P,
                                                         space, o.nodes)
                       .apply(rho)};
        enc.drho = fisher::drho_encoding(rho, sigma, channels::DisplacementAxis::P, space, o.nodes);
        enc.leakage = 1.0 - enc.rho.matrix.trace().real();
    } else {
        enc = fisher::encode_lossy_pure(psi, o.eta, sigma, channels::DisplacementAxis::P, o.nodes);
    }
    PointResult res;
    res.qfi = fisher::qfi_spectral(enc.rho, enc.drho).value;
    res.leakage = enc.leakage;
    if (with_cfi) {
        res.cfi_number = fisher::cfi_povm(fisher::number_povm(space), enc.rho, enc.drho);
        res.cfi_quadrature = fisher::cfi_homodyne(enc.rho, enc.drho, qnm::kPi / 2.0);
    }
    return res;
}

int cmd_qfi(const CLI::App& cmd, const CommonOpts& o) {
    check_dim(o.dim);
    const fock::TruncatedSpace space(o.dim);
    const fock::PureState psi = build_state(o, space);
    const PointResult res = evaluate_point(psi, o.sigma, o, false);
    std::cout << "# " << kVersion << " config=" << effective_config(cmd, o).dump() << "\n";
    std::cout.precision(12);
    std::cout << res.qfi << "\n";
    return 0;
}

int cmd_cfi(const CLI::App& cmd, const CommonOpts& o, const std::string& measurement,
            double angle) {
    check_dim(o.dim);
    const fock::TruncatedSpace space(o.dim);
    const fock::PureState psi = build_state(o, space);
    const auto enc =
        fisher::encode_lossy_pure(psi, o.eta, o.sigma, channels::DisplacementAxis::P, o.nodes);
    double value = 0.0;
    if (measurement == "number") {
        value = fisher::cfi_povm(fisher::number_povm(space), enc.rho, enc.drho);
    } else if (measurement == "homodyne") {
        value = fisher::cfi_homodyne(enc.rho, enc.drho, angle);
    } else {
        throw CliError{"measurement: must be number or homodyne"};
    }
    std::cout << "# " << kVersion << " config=" << effective_config(cmd, o).dump() << "\n";
    std::cout.precision(12);
    std::cout << value << "\n";
    return 0;
}

int cmd_bounds_list() {
    for (const auto& [name, params] : bounds::catalog())
        std::cout << name << " (" << params << ")\n";
    return 0;
}

int cmd_bounds_eval(const std::string& name, const CommonOpts& o, bool n_infinite, double qfi_in) {
    bounds::BoundSpec spec;
    spec.name = name;
    spec.infinite_n = n_infinite;
    spec.params = {{"sigma", o.sigma},     {"eta", o.eta},         {"eta_a", o.eta_a},
                   {"sigma_x", o.sigma_x}, {"sigma_p", o.sigma_p}, {"N", o.big_n},
                   {"qfi", qfi_in}};
    try {
        std::cout.precision(12);
        std::cout << bounds::eval_bound(spec) << "\n";
    } catch (const std::invalid_argument& e) {
        throw CliError{e.what()};
    }
    return 0;
}

int cmd_sweep(const CLI::App& cmd, const CommonOpts& o) {
    check_dim(o.dim);
    if (o.sigma_grid.empty()) throw CliError{"sigma-grid: required for sweep"};
    const std::vector<double> grid = parse_grid(o.sigma_grid, "sigma-grid");
    for (const double s : grid)
        if (!(s >= 0.0)) throw CliError{"sigma-grid: values must be >= 0"};
    const fock::TruncatedSpace space(o.dim);
    const fock::PureState psi = build_state(o, space);
    const double mean_n = fock::mean_number(psi);

    std::ofstream file;
    std::ostream& os = open_output(o, file);
    os << "# " << kVersion << " config=" << effective_config(cmd, o).dump() << "\n";
    os.precision(10);
    if (o.format == "csv") {
        os << "state,N,sigma,eta,qfi,cfi_number,cfi_quadrature,leakage,dim,deriv_method\n";
        for (const double s : grid) {
            const PointResult r = evaluate_point(psi, s, o, true);
            os << o.state << ',' << mean_n << ',' << s << ',' << o.eta << ',' << r.qfi << ','
               << r.cfi_number << ',' << r.cfi_quadrature << ',' << r.leakage << ',' << o.dim
               << ",analytic\n";
        }
    } else if (o.format == "json") {
        nlohmann::json rows = nlohmann::json::array();
        for (const double s : grid) {
            const PointResult r = evaluate_point(psi, s, o, true);
            rows.push_back({{"state", o.state},
                            {"N", mean_n},
                            {"sigma", s},
                            {"eta", o.eta},
                            {"qfi", r.qfi},
                            {"cfi_number", r.cfi_number},
                            {"cfi_quadrature", r.cfi_quadrature},
                            {"leakage", r.leakage},
                            {"dim", o.dim},
                            {"deriv_method", "analytic"}});
        }
        os << rows.dump(2) << "\n";
    } else {
        throw CliError{"format: must be csv or json"};
    }
    return 0;
}

int cmd_optimize(const CLI::App& cmd, const CommonOpts& o, int spacing, int peaks, int particles,
                 int iters, const std::string& method, double target) {
    check_dim(o.dim);
    qnm::optimize::ChannelConfig cfg{o.sigma, o.eta, o.dim, o.nodes};
    qnm::optimize::SwarmBudget budget;
    budget.particles = particles;
    budget.iterations = iters;
    budget.target = target;
    qnm::optimize::SparseMethod m;
    if (method == "swarm")
        m = qnm::optimize::SparseMethod::Swarm;
    else if (method == "gradient")
        m = qnm::optimize::SparseMethod::Gradient;
    else if (method == "swarm_then_gradient")
        m = qnm::optimize::SparseMethod::SwarmThenGradient;
    else
        throw CliError{"method: must be swarm, gradient or swarm_then_gradient"};
    qnm::optimize::OptimizationRun run;
    try {
        run = qnm::optimize::optimize_sparse(spacing, peaks, cfg, m, budget, o.seed);
    } catch (const std::invalid_argument& e) {
        throw CliError{e.what()};
    }
    std::ofstream file;
    std::ostream& os = open_output(o, file);
    os << "# " << kVersion << " config=" << effective_config(cmd, o).dump() << "\n";
    os << run.to_json() << "\n";
    std::cerr << "best_qfi " << run.best_qfi << " mean_number " << run.best_mean_number << "\n";
    return 0;
}

int cmd_protocol(const CLI::App& cmd, const CommonOpts& o, const std::string& ratios_text,
                 const std::string& shots_text, int trials) {
    const std::vector<double> ratios = parse_grid(ratios_text, "ratios");
    const std::vector<double> shot_grid = parse_grid(shots_text, "M-grid");
    if (!(o.sigma > 0.0)) throw CliError{"sigma: must be > 0 for protocol"};
    if (trials < 2) throw CliError{"trials: must be >= 2"};
    std::ofstream file;
    std::ostream& os = open_output(o, file);
    os << "# " << kVersion << " config=" << effective_config(cmd, o).dump() << "\n";
    os << "M,scheme,mu_over_sigma,mse_sigma,mse_mu,stderr,clamp_rate\n";
    os.precision(8);
    for (const double md : shot_grid) {
        const int shots = static_cast<int>(md);
        if (shots < 2 || shots % 2 != 0) throw CliError{"M-grid: entries must be even and >= 2"};
        for (const double ratio : ratios) {
            const double mu = ratio * o.sigma;
            for (const char* scheme : {"nonadaptive", "adaptive"}) {
                double mse_s = 0.0, mse_m = 0.0, sq_s = 0.0;
                int clamps = 0;
                for (int t = 0; t < trials; ++t) {
                    const auto tr =
                        std::string(scheme) == "nonadaptive"
                            ? qnm::protocols::simulate_nonadaptive(mu, o.sigma, shots,
                                                                   o.seed + 7919 * t)
                            : qnm::protocols::simulate_adaptive(mu, o.sigma, shots,
                                                                o.seed + 7919 * t);
                    const double es = (tr.sigma_hat - o.sigma) * (tr.sigma_hat - o.sigma);
                    mse_s += es;
                    sq_s += es * es;
                    mse_m += (tr.mu_hat - mu) * (tr.mu_hat - mu);
                    clamps += tr.clamp_events;
                }
                mse_s /= trials;
                mse_m /= trials;
                const double se = std::sqrt(std::max(0.0, sq_s / trials - mse_s * mse_s) / trials);
                os << shots << ',' << scheme << ',' << ratio << ',' << mse_s << ',' << mse_m << ','
                   << se << ',' << static_cast<double>(clamps) / trials << "\n";
            }
        }
    }
    return 0;
}

int cmd_waveform(const CLI::App& cmd, const CommonOpts& o, const std::string& model_path,
                 double alpha) {
    std::ifstream in(model_path);
    if (!in) throw CliError{"model: cannot open '" + model_path + "'"};
    std::vector<double> omegas, gains, phis;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c))
            throw CliError{"model: rows must be omega,gain,phi"};
        try {
            omegas.push_back(std::stod(a));
            gains.push_back(std::stod(b));
            phis.push_back(std::stod(c));
        } catch (const std::exception&) {
            throw CliError{"model: cannot parse row '" + line + "'"};
        }
    }
    if (omegas.empty()) throw CliError{"model: empty table"};
    Vec om = Eigen::Map<Vec>(omegas.data(), static_cast<int>(omegas.size()));
    Vec gn = Eigen::Map<Vec>(gains.data(), static_cast<int>(gains.size()));
    Vec ph = Eigen::Map<Vec>(phis.data(), static_cast<int>(phis.size()));
    const qnm::waveform::WaveformModel model = qnm::waveform::tabulated_model(om, gn, ph);
    const Vec theta = (Vec(1) << alpha).finished();
    Vec per(om.size());
    for (int j = 0; j < om.size(); ++j) {
        const double s = model.s_yy(om(j), theta);
        per(j) = s > 0.0 ? qnm::waveform::qfi_psd_vacuum(gn(j), s) : 0.0;
    }
    const Mat qfim = qnm::waveform::qfim_psd_params(model, theta, per);
    std::ofstream file;
    std::ostream& os = open_output(o, file);
    nlohmann::json j;
    j["config"] = effective_config(cmd, o);
    j["alpha"] = alpha;
    j["per_frequency_qfi"] = std::vector<double>(per.data(), per.data() + per.size());
    j["qfim"] = nlohmann::json::array({nlohmann::json::array({qfim(0, 0)})});
    os << j.dump(2) << "\n";
    return 0;
}

int cmd_selftest() {
    int failures = 0;
    auto check = [&](const char* name, double value, double expected, double tol) {
        const bool ok = std::abs(value - expected) <= tol;
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << ": " << value << " (expected "
                  << expected << " +- " << tol << ")\n";
        if (!ok) ++failures;
    };

    {
        const fock::TruncatedSpace space(60);
        const auto enc = fisher::encode_lossy_pure(fock::fock_state(0, space), 0.0, 0.1,
                                                   channels::DisplacementAxis::P);
        check("vacuum qfi", fisher::qfi_spectral(enc.rho, enc.drho).value, 2.0 / 1.01, 1e-6);
        check("vacuum number cfi",
              fisher::cfi_povm(fisher::number_povm(space), enc.rho, enc.drho), 2.0 / 1.01, 1e-6);
        check("vacuum homodyne cfi", fisher::cfi_homodyne(enc.rho, enc.drho, qnm::kPi / 2.0),
              bounds::cfi_quadrature_vacuum(0.1), 1e-6);
    }
    {
        qnm::gaussian::GaussianState g = qnm::gaussian::make_smsv(1.0);
        g = qnm::gaussian::apply_gaussian_channel(g, qnm::gaussian::encode_1d(0.1));
        Mat dcov = Mat::Zero(2, 2);
        dcov(1, 1) = 0.2;
        check("smsv lossless qfi", qnm::gaussian::qfi_covariance(g.cov, dcov),
              4.0 / (0.02 + 1.0 / bounds::xi_n(1.0)), 1e-9);
    }
    {
        const auto opt = bounds::optimal_fock_n(0.1);
        check("optimal fock N", opt.best, 8.0, 0.0);
        check("optimal fock qfi", opt.value, 7.748, 2e-3);
    }
    {
        const auto ch = channels::qubit_random_rotation(1.0);
        qnm::CVec up(2);
        up << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
        const CMat rho = ch.apply(CMat(up * up.adjoint()));
        const double h = 1e-6;
        const CMat drho =
            (channels::qubit_random_rotation(1.0 + h).apply(CMat(up * up.adjoint())) -
             channels::qubit_random_rotation(1.0 - h).apply(CMat(up * up.adjoint()))) /
            (2.0 * h);
        check("qubit rotation qfi",
              fisher::qfi_spectral(fock::DensityMatrix{fock::TruncatedSpace(2), rho}, drho).value,
              bounds::ecqfi_qubit_rotation(1.0), 1e-7);
    }
    std::cout << (failures == 0 ? "selftest passed\n" : "selftest FAILED\n");
    return failures == 0 ? 0 : 1;
}

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--state", o.state, "input state kind");
    cmd->add_option("--sigma", o.sigma, "signal standard deviation");
    cmd->add_option("--sigma-grid", o.sigma_grid, "comma-separated sigma values");
    cmd->add_option("--eta", o.eta, "loss before the encoding");
    cmd->add_option("--eta-a", o.eta_a, "ancilla loss");
    cmd->add_option("--sigma-x", o.sigma_x, "classical noise std along x");
    cmd->add_option("--sigma-p", o.sigma_p, "classical noise std along p");
    cmd->add_option("--N", o.big_n, "mean occupation number");
    cmd->add_option("--delta", o.delta, "GKP Delta");
    cmd->add_option("--alpha-re", o.alpha_re, "coherent/cat amplitude (real)");
    cmd->add_option("--alpha-im", o.alpha_im, "coherent/cat amplitude (imag)");
    cmd->add_option("--n", o.fock_n, "Fock index");
    cmd->add_option("--state-file", o.state_file, "JSON state file (overrides --state)");
    cmd->add_option("--dim", o.dim, "truncated dimension");
    cmd->add_option("--nodes", o.nodes, "quadrature nodes");
    cmd->add_option("--seed", o.seed, "random seed");
    cmd->add_option("--out", o.out_path, "output path (default stdout)");
    cmd->add_option("--format", o.format, "csv or json");
    cmd->add_option("--config", o.config_path, "JSON config file (flags override)");
}

/// Config precedence: defaults < config file < flags.
void merge_config(const CLI::App* cmd, CommonOpts& o) {
    if (o.config_path.empty()) return;
    std::ifstream in(o.config_path);
    if (!in) throw CliError{"config: cannot open '" + o.config_path + "'"};
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw CliError{std::string("config: ") + e.what()};
    }
    auto apply = [&](const char* key, auto& field) {
        using T = std::decay_t<decltype(field)>;
        if (j.contains(key) && cmd->get_option("--" + std::string(key))->count() == 0)
            field = j.at(key).get<T>();
    };
    apply("state", o.state);
    apply("sigma", o.sigma);
    apply("sigma-grid", o.sigma_grid);
    apply("eta", o.eta);
    apply("eta-a", o.eta_a);
    apply("sigma-x", o.sigma_x);
    apply("sigma-p", o.sigma_p);
    apply("N", o.big_n);
    apply("delta", o.delta);
    apply("dim", o.dim);
    apply("nodes", o.nodes);
    apply("seed", o.seed);
    apply("format", o.format);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{kVersion};
    app.require_subcommand(1);

    CommonOpts o;
    auto* qfi = app.add_subcommand("qfi", "QFI of an encoded state");
    auto* cfi = app.add_subcommand("cfi", "CFI of a measurement");
    auto* bnd = app.add_subcommand("bounds", "closed-form bound catalog");
    auto* sweep = app.add_subcommand("sweep", "sigma sweep table");
    auto* opt = app.add_subcommand("optimize", "sparse-state search");
    auto* proto = app.add_subcommand("protocol", "Monte Carlo estimation protocols");
    auto* wave = app.add_subcommand("waveform", "spectral-density QFIM");
    auto* self = app.add_subcommand("selftest", "fast acceptance tier");
    (void)self;

    for (CLI::App* cmd : {qfi, cfi, sweep, opt, proto}) add_common(cmd, o);

    std::string measurement = "number";
    double angle = qnm::kPi / 2.0;
    cfi->add_option("--measurement", measurement, "number or homodyne");
    cfi->add_option("--angle", angle, "homodyne quadrature angle");

    auto* bnd_list = bnd->add_subcommand("list", "list formulas");
    auto* bnd_eval = bnd->add_subcommand("eval", "evaluate one formula");
    (void)bnd_list;
    std::string bound_name;
    std::string n_text = "1";
    double qfi_in = 0.0;
    bnd_eval->add_option("--name", bound_name, "formula name")->required();
    bnd_eval->add_option("--sigma", o.sigma, "");
    bnd_eval->add_option("--eta", o.eta, "");
    bnd_eval->add_option("--eta-a", o.eta_a, "");
    bnd_eval->add_option("--sigma-x", o.sigma_x, "");
    bnd_eval->add_option("--sigma-p", o.sigma_p, "");
    bnd_eval->add_option("--N", n_text, "occupation number or 'inf'");
    bnd_eval->add_option("--qfi", qfi_in, "QFI input for variance_form");

    int spacing = 20, peaks = 24, particles = 64, iters = 500;
    double target = 0.0;
    std::string method = "swarm_then_gradient";
    opt->add_option("--spacing", spacing, "Fock lattice spacing m");
    opt->add_option("--peaks", peaks, "coefficient count K");
    opt->add_option("--particles", particles, "swarm size");
    opt->add_option("--iters", iters, "swarm iterations");
    opt->add_option("--method", method, "swarm|gradient|swarm_then_gradient");
    opt->add_option("--target", target, "early-stop objective value");

    std::string ratios = "0,0.5,1";
    std::string m_grid = "10000";
    int trials = 1000;
    proto->add_option("--ratios", ratios, "mu/sigma ratios");
    proto->add_option("--M-grid", m_grid, "measurement counts");
    proto->add_option("--trials", trials, "Monte Carlo trials");

    std::string model_path;
    double alpha = 1.0;
    wave->add_option("--model", model_path, "CSV of omega,gain,phi rows")->required();
    wave->add_option("--alpha", alpha, "scale factor theta");
    wave->add_option("--out", o.out_path, "output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        for (const CLI::App* cmd : {qfi, cfi, sweep, opt, proto, wave})
            if (cmd->parsed()) merge_config(cmd, o);
        if (qfi->parsed()) return cmd_qfi(*qfi, o);
        if (cfi->parsed()) return cmd_cfi(*cfi, o, measurement, angle);
        if (bnd->parsed()) {
            if (bnd_list->parsed()) return cmd_bounds_list();
            if (bnd_eval->parsed()) {
                const bool inf = (n_text == "inf");
                if (!inf) {
                    try {
                        o.big_n = std::stod(n_text);
                    } catch (const std::exception&) {
                        throw CliError{"N: cannot parse '" + n_text + "'"};
                    }
                }
                return cmd_bounds_eval(bound_name, o, inf, qfi_in);
            }
            throw CliError{"bounds: need a list or eval subcommand"};
        }
        if (sweep->parsed()) return cmd_sweep(*sweep, o);
        if (opt->parsed())
            return cmd_optimize(*opt, o, spacing, peaks, particles, iters, method, target);
        if (proto->parsed()) return cmd_protocol(*proto, o, ratios, m_grid, trials);
        if (wave->parsed()) return cmd_waveform(*wave, o, model_path, alpha);
        return cmd_selftest();
    } catch (const CliError& e) {
        std::cerr << "error: " << e.message << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
