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

#include "qnm/optimize.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "qnm/fisher.hpp"

namespace qnm::optimize {

namespace {

/// Sector-blocked perturbative QFI at small finite sigma.
///
/// The lossy state of a lattice superposition sum c_k |m k> is block-diagonal
/// under the mod-m Fock grading, so its eigenbasis comes from small per-sector
/// problems. To O(sigma^4) the encoded state is rho + sigma^2 D with
/// D = x rho x - {x^2, rho}/2; the spectral QFI is evaluated after exactly
/// diagonalizing diag(p) + sigma^2 D on the subspace of small eigenvalues,
/// which handles support, null and marginal directions uniformly.
class SparseSurrogate {
  public:
    SparseSurrogate(int spacing, int peaks, const ChannelConfig& config)
        : m_(spacing), peaks_(peaks), cfg_(config) {
        if (spacing < 1 || peaks < 1) throw std::invalid_argument("optimize_sparse: bad lattice");
        if (spacing * (peaks - 1) >= config.dim)
            throw std::invalid_argument("optimize_sparse: dimension too small for the lattice");
        const int d = config.dim;
        sector_of_.resize(d);
        for (int j = 0; j < d; ++j) sector_of_[j] = j % m_;
        sector_idx_.assign(m_, {});
        for (int j = 0; j < d; ++j) sector_idx_[j % m_].push_back(j);
        x_vals_ = Vec(d - 1);
        for (int j = 0; j + 1 < d; ++j) x_vals_(j) = std::sqrt((j + 1) / 2.0);
    }

    [[nodiscard]] double eval(const CVec& coeffs) const {
        const int d = cfg_.dim;
        CVec psi = CVec::Zero(d);
        for (int k = 0; k < peaks_; ++k) psi(m_ * k) = coeffs(k);
        const double nrm = psi.norm();
        if (!(nrm > 0.0)) return 0.0;
        psi /= nrm;
        const CMat v = channels::loss_kraus_columns(psi, cfg_.eta, 1e-14);
        const int r = static_cast<int>(v.cols());

        // Per-sector eigendecomposition of rho = V V^dag. Each Kraus column
        // lives in one sector; group them.
        Vec p = Vec::Zero(d);
        std::vector<CMat> phi(m_); // per-sector eigenvector blocks
        for (int s = 0; s < m_; ++s) {
            const auto& idx = sector_idx_[s];
            const int ds = static_cast<int>(idx.size());
            CMat vs(ds, r);
            for (int i = 0; i < ds; ++i) vs.row(i) = v.row(idx[i]);
            Eigen::SelfAdjointEigenSolver<CMat> es(vs * vs.adjoint());
            phi[s] = es.eigenvectors();
            for (int i = 0; i < ds; ++i) p(idx[i]) = std::max(0.0, es.eigenvalues()(i));
        }

        // Thin projections: T0 = Phi^dag V, T1 = Phi^dag (x V), T2 = Phi^dag (x^2 V).
        const CMat xv = apply_x(v);
        const CMat x2v = apply_x(xv);
        const CMat t0 = project(phi, v);
        const CMat t1 = project(phi, xv);
        const CMat t2 = project(phi, x2v);
        CMat dm = t1 * t1.adjoint();
        const CMat cross = t2 * t0.adjoint();
        dm -= 0.5 * (cross + cross.adjoint());

        const double s2 = cfg_.sigma * cfg_.sigma;
        if (s2 == 0.0) throw std::invalid_argument("sparse surrogate: sigma must be > 0");
        // Soft subspace: exact diagonalization where p is comparable to the
        // sigma^2 perturbation.
        double dscale = 0.0;
        for (int i = 0; i < d; ++i) dscale = std::max(dscale, std::abs(dm(i, i).real()));
        const double theta = 300.0 * s2 * dscale;
        std::vector<int> active, big;
        for (int i = 0; i < d; ++i) (p(i) < theta ? active : big).push_back(i);
        const int na = static_cast<int>(active.size());
        Vec ptil(d);
        if (na > 0) {
            CMat h(na, na);
            for (int a = 0; a < na; ++a)
                for (int b = 0; b < na; ++b)
                    h(a, b) = s2 * dm(active[a], active[b]) +
                              ((a == b) ? Complex(p(active[a]), 0.0) : Complex(0.0, 0.0));
            Eigen::SelfAdjointEigenSolver<CMat> es(h);
            const CMat& rot = es.eigenvectors();
            // Rotate the active rows/cols of D.
            CMat da(na, d);
            for (int a = 0; a < na; ++a) da.row(a) = dm.row(active[a]);
            const CMat da_rot = rot.adjoint() * da;
            for (int a = 0; a < na; ++a) dm.row(active[a]) = da_rot.row(a);
            CMat dc(d, na);
            for (int a = 0; a < na; ++a) dc.col(a) = dm.col(active[a]);
            const CMat dc_rot = dc * rot;
            for (int a = 0; a < na; ++a) dm.col(active[a]) = dc_rot.col(a);
            for (int a = 0; a < na; ++a) ptil(active[a]) = std::max(0.0, es.eigenvalues()(a));
        }
        for (const int b : big) ptil(b) = p(b) + s2 * dm(b, b).real();

        double total = 0.0;
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                const double den = ptil(j) + ptil(k);
                if (den > 1e-19) total += std::norm(dm(j, k)) / den;
            }
        return 8.0 * s2 * total;
    }

    [[nodiscard]] CVec decode(const Vec& z) const {
        CVec c(peaks_);
        for (int k = 0; k < peaks_; ++k) c(k) = Complex(z(k), z(peaks_ + k));
        return c;
    }

    [[nodiscard]] fock::PureState state_of(const CVec& coeffs) const {
        return fock::sparse_state(m_, coeffs, fock::TruncatedSpace(cfg_.dim));
    }

  private:
    [[nodiscard]] CMat apply_x(const CMat& v) const {
        const int d = cfg_.dim;
        CMat out = CMat::Zero(d, v.cols());
        for (int c = 0; c < v.cols(); ++c)
            for (int rrow = 0; rrow < d; ++rrow) {
                Complex acc(0.0, 0.0);
                if (rrow + 1 < d) acc += x_vals_(rrow) * v(rrow + 1, c);
                if (rrow > 0) acc += x_vals_(rrow - 1) * v(rrow - 1, c);
                out(rrow, c) = acc;
            }
        return out;
    }

    [[nodiscard]] CMat project(const std::vector<CMat>& phi, const CMat& v) const {
        CMat out(cfg_.dim, v.cols());
        for (int s = 0; s < m_; ++s) {
            const auto& idx = sector_idx_[s];
            const int ds = static_cast<int>(idx.size());
            CMat rows(ds, v.cols());
            for (int i = 0; i < ds; ++i) rows.row(i) = v.row(idx[i]);
            const CMat proj = phi[s].adjoint() * rows;
            for (int i = 0; i < ds; ++i) out.row(idx[i]) = proj.row(i);
        }
        return out;
    }

    int m_;
    int peaks_;
    ChannelConfig cfg_;
    std::vector<int> sector_of_;
    std::vector<std::vector<int>> sector_idx_;
    Vec x_vals_;
};

double exact_qfi(const fock::PureState& psi, const ChannelConfig& cfg) {
    const auto enc = fisher::encode_lossy_pure(psi, cfg.eta, cfg.sigma,
                                               channels::DisplacementAxis::P, cfg.quad_nodes);
    return fisher::qfi_spectral(enc.rho, enc.drho).value;
}

} // namespace

std::string OptimizationRun::to_json() const {
    nlohmann::json j;
    j["method"] = method;
    j["seed"] = seed;
    j["config"] = {{"sigma", config.sigma},
                   {"eta", config.eta},
                   {"dim", config.dim},
                   {"quad_nodes", config.quad_nodes}};
    j["history"] = history;
    j["evaluations"] = evaluations;
    j["best_qfi"] = best_qfi;
    j["best_mean_number"] = best_mean_number;
    auto& amps = j["best_state"] = nlohmann::json::array();
    for (int i = 0; i < best_state.amplitudes.size(); ++i)
        amps.push_back({best_state.amplitudes(i).real(), best_state.amplitudes(i).imag()});
    return j.dump();
}

double biconvex_objective(const fock::PureState& psi, const CMat& x_var,
                          const channels::LossyEncoding& family) {
    if ((x_var - x_var.adjoint()).cwiseAbs().maxCoeff() >
        1e-8 * std::max(1.0, x_var.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("biconvex_objective: X must be Hermitian");
    const CMat term = family.adjoint(x_var * x_var) - 2.0 * family.adjoint_sigma_derivative(x_var);
    return (psi.amplitudes.adjoint() * term * psi.amplitudes)(0).real();
}

OptimizationRun acs_search(const fock::PureState& psi0, const channels::LossyEncoding& family,
                           int max_iters, double tol) {
    psi0.validate();
    OptimizationRun run;
    run.method = "acs";
    run.config = {family.sigma(), family.eta(), family.space().dim, 0};
    fock::PureState psi = psi0;
    double prev = -1e300;
    for (int it = 0; it < max_iters; ++it) {
        const CMat rho = family.apply(psi.amplitudes * psi.amplitudes.adjoint());
        const CMat drho = family.derivative(psi.amplitudes * psi.amplitudes.adjoint());
        const CMat l = fisher::sld(fock::DensityMatrix{psi.space, rho}, drho);
        const double neg_f = -biconvex_objective(psi, l, family);
        if (!run.history.empty() && neg_f < run.history.back() - 1e-9)
            throw std::logic_error("acs_search: monotonicity violated");
        run.history.push_back(std::max(neg_f, run.history.empty() ? neg_f : run.history.back()));
        run.evaluations += 1;
        // psi step: leading eigenvector of 2 dLambda^dag(L) - Lambda^dag(L^2)
        const CMat a = 2.0 * family.adjoint_sigma_derivative(l) - family.adjoint(l * l);
        Eigen::SelfAdjointEigenSolver<CMat> es(a);
        psi.amplitudes = es.eigenvectors().col(family.space().dim - 1);
        if (std::abs(neg_f - prev) < tol) break;
        prev = neg_f;
    }
    run.best_state = psi;
    run.best_qfi = run.history.empty() ? 0.0 : run.history.back();
    run.best_mean_number = fock::mean_number(psi);
    return run;
}

Vec finite_diff_gradient(const std::function<double(const Vec&)>& objective, const Vec& coords,
                         double h) {
    if (!(h >= 1e-7 && h <= 1e-3))
        throw std::invalid_argument("finite_diff_gradient: h must be in [1e-7, 1e-3]");
    Vec g(coords.size());
    for (int i = 0; i < coords.size(); ++i) {
        Vec up = coords, dn = coords;
        up(i) += h;
        dn(i) -= h;
        const double fu = objective(up);
        const double fd = objective(dn);
        if (!std::isfinite(fu) || !std::isfinite(fd))
            throw std::invalid_argument("finite_diff_gradient: objective not finite");
        g(i) = (fu - fd) / (2.0 * h);
    }
    return g;
}

double sparse_qfi_surrogate(const CVec& coeffs, int spacing, const ChannelConfig& config) {
    SparseSurrogate s(spacing, static_cast<int>(coeffs.size()), config);
    return s.eval(coeffs);
}

OptimizationRun optimize_sparse(int spacing, int peaks, const ChannelConfig& config,
                                SparseMethod method, const SwarmBudget& budget,
                                std::uint64_t seed) {
    if (budget.iterations < 1) throw std::invalid_argument("optimize_sparse: budget must be >= 1");
    const SparseSurrogate surrogate(spacing, peaks, config);
    OptimizationRun run;
    run.seed = seed;
    run.config = config;
    run.method = method == SparseMethod::Swarm            ? "swarm"
                 : method == SparseMethod::Gradient       ? "gradient"
                                                          : "swarm_then_gradient";
    const int nc = 2 * peaks;
    long evals = 0;
    auto objective = [&](const Vec& z) {
        ++evals;
        return surrogate.eval(surrogate.decode(z));
    };

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    auto random_point = [&] {
        Vec z(nc);
        for (int i = 0; i < nc; ++i) z(i) = unit(rng);
        return z;
    };

    Vec gbest;
    double gval = -1e300;
    if (method != SparseMethod::Gradient) {
        const int np = budget.particles;
        std::vector<Vec> pos(np), vel(np), pbest(np);
        Vec pval(np);
        for (int i = 0; i < np; ++i) {
            pos[i] = random_point();
            vel[i] = Vec::Zero(nc);
            pbest[i] = pos[i];
            pval(i) = objective(pos[i]);
            if (pval(i) > gval) {
                gval = pval(i);
                gbest = pos[i];
            }
        }
        run.history.push_back(gval);
        const double inertia = 0.7, cognitive = 1.5, social = 1.5;
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        for (int it = 0; it < budget.iterations; ++it) {
            for (int i = 0; i < np; ++i) {
                for (int k = 0; k < nc; ++k) {
                    vel[i](k) = inertia * vel[i](k) + cognitive * u01(rng) * (pbest[i](k) - pos[i](k)) +
                                social * u01(rng) * (gbest(k) - pos[i](k));
                }
                pos[i] += vel[i];
                const double v = objective(pos[i]);
                if (v > pval(i)) {
                    pval(i) = v;
                    pbest[i] = pos[i];
                    if (v > gval) {
                        gval = v;
                        gbest = pos[i];
                    }
                }
            }
            run.history.push_back(gval);
            if (budget.target > 0.0 && gval >= budget.target) break;
        }
    } else {
        gbest = random_point();
        gval = objective(gbest);
        run.history.push_back(gval);
    }

    if (method != SparseMethod::Swarm) {
        // Gradient polish with backtracking line search on the sphere
        // (renormalization happens inside the surrogate).
        Vec z = gbest;
        double fz = gval;
        double step = 0.05;
        const int polish_iters = std::max(10, budget.iterations / 10);
        for (int it = 0; it < polish_iters; ++it) {
            const Vec g = finite_diff_gradient(objective, z, 1e-5);
            const double gn = g.norm();
            if (gn < 1e-12) break;
            bool improved = false;
            double s = step;
            for (int back = 0; back < 12; ++back) {
                Vec cand = z + s * g / gn;
                cand /= cand.norm();
                const double fc = objective(cand);
                if (fc > fz) {
                    z = cand;
                    fz = fc;
                    step = s * 1.5;
                    improved = true;
                    break;
                }
                s *= 0.5;
            }
            run.history.push_back(std::max(fz, run.history.back()));
            if (!improved) break;
        }
        if (fz > gval) {
            gval = fz;
            gbest = z;
        }
    }

    run.evaluations = evals;
    CVec best_c = surrogate.decode(gbest);
    best_c /= best_c.norm();
    run.best_state = surrogate.state_of(best_c);
    run.best_qfi = exact_qfi(run.best_state, config);
    run.best_mean_number = fock::mean_number(run.best_state);
    return run;
}

} // namespace qnm::optimize
