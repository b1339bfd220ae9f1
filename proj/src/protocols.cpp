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

#include "qnm/protocols.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

#include "qnm/quadrature.hpp"

namespace qnm::protocols {

namespace {

/// Exact number distribution via the completed-square Gaussian integral;
/// the integrand is a Gaussian times a polynomial of degree 2n, so
/// Gauss-Hermite with > n nodes is exact up to roundoff. Node terms are
/// combined in the log domain: alpha^{2n}/(2^n n!) overflows long before the
/// weighted sum does.
Vec number_table(double mu, double sigma, int nmax) {
    const double s2 = sigma * sigma;
    const double c = (1.0 + s2) / (2.0 * s2);
    const double m0 = mu / (1.0 + s2);
    const int nodes = nmax + 12;
    static thread_local std::map<int, std::pair<Vec, Vec>> cache;
    auto it = cache.find(nodes);
    if (it == cache.end()) it = cache.emplace(nodes, gauss_hermite(nodes)).first;
    const Vec& t = it->second.first;
    const Vec& w = it->second.second;
    const double log_pref = -mu * mu / (2.0 * (1.0 + s2)) -
                            0.5 * std::log(2.0 * kPi * s2) - 0.5 * std::log(c);
    Vec log_w(nodes), log_a2(nodes);
    for (int k = 0; k < nodes; ++k) {
        log_w(k) = std::log(w(k));
        const double a = m0 + t(k) / std::sqrt(c);
        log_a2(k) = (a == 0.0) ? -1e300 : 2.0 * std::log(std::abs(a));
    }
    Vec out(nmax);
    double log_n_fact = 0.0;
    for (int n = 0; n < nmax; ++n) {
        if (n > 0) log_n_fact += std::log(static_cast<double>(n));
        double peak = -1e300;
        for (int k = 0; k < nodes; ++k) peak = std::max(peak, log_w(k) + n * log_a2(k));
        double total = 0.0;
        for (int k = 0; k < nodes; ++k) total += std::exp(log_w(k) + n * log_a2(k) - peak);
        out(n) = std::exp(log_pref + peak - n * std::log(2.0) - log_n_fact) * total;
    }
    return out;
}

int sample_from_cdf(const Vec& cdf, double u) {
    int lo = 0, hi = static_cast<int>(cdf.size()) - 1;
    while (lo < hi) {
        const int mid = (lo + hi) / 2;
        if (cdf(mid) < u)
            lo = mid + 1;
        else
            hi = mid;
    }
    return lo;
}

std::mt19937_64 make_rng(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      0x9e3779b9u};
    return std::mt19937_64(seq);
}

} // namespace

Vec displaced_number_distribution(double mu, double sigma, double tail_tol) {
    if (!(sigma > 0.0)) throw std::invalid_argument("displaced_number_distribution: sigma > 0");
    // mean photon number (mu^2 + sigma^2)/2 sets the needed table length
    const double nbar = 0.5 * (mu * mu + sigma * sigma);
    int nmax = static_cast<int>(std::ceil(8.0 + 3.0 * nbar + 10.0 * std::sqrt(nbar + 1.0)));
    for (;;) {
        Vec p = number_table(mu, sigma, nmax);
        double cum = 0.0;
        for (int n = 0; n < nmax; ++n) cum += p(n);
        if (1.0 - cum < tail_tol || nmax > 100000) return p;
        nmax *= 2;
    }
}

Mat number_cfim(double mu, double sigma, double step) {
    const Vec p0 = displaced_number_distribution(mu, sigma);
    const int nmax = static_cast<int>(p0.size());
    auto table = [&](double m, double s) { return number_table(m, s, nmax); };
    const Vec dmu = (table(mu + step, sigma) - table(mu - step, sigma)) / (2.0 * step);
    const Vec dsg = (table(mu, sigma + step) - table(mu, sigma - step)) / (2.0 * step);
    Mat out = Mat::Zero(2, 2);
    for (int n = 0; n < nmax; ++n) {
        if (p0(n) < 1e-14) continue;
        const Vec d = (Vec(2) << dmu(n), dsg(n)).finished();
        out += d * d.transpose() / p0(n);
    }
    return out;
}

void ProtocolTrace::validate() const {
    if (sigma_hat < 0.0) throw std::logic_error("ProtocolTrace: negative sigma estimate");
}

ProtocolTrace simulate_nonadaptive(double mu, double sigma, int shots, std::uint64_t seed) {
    if (!(sigma > 0.0)) throw std::invalid_argument("simulate_nonadaptive: sigma > 0");
    if (shots < 2 || shots % 2 != 0)
        throw std::invalid_argument("simulate_nonadaptive: M must be even and >= 2");
    const int half = shots / 2;
    auto rng = make_rng(seed);
    std::normal_distribution<double> quad(mu, std::sqrt(0.5 + sigma * sigma));
    const Vec pn = displaced_number_distribution(mu, sigma);
    Vec cdf(pn.size());
    double acc = 0.0;
    for (int i = 0; i < pn.size(); ++i) {
        acc += pn(i);
        cdf(i) = acc;
    }
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    ProtocolTrace tr;
    tr.seed = seed;
    tr.shots = shots;
    tr.quadrature_outcomes.reserve(half);
    tr.number_outcomes.reserve(half);
    double psum = 0.0;
    long nsum = 0;
    for (int i = 0; i < half; ++i) {
        const double p = quad(rng);
        tr.quadrature_outcomes.push_back(p);
        psum += p;
    }
    for (int i = 0; i < half; ++i) {
        const int n = sample_from_cdf(cdf, unif(rng) * acc);
        tr.number_outcomes.push_back(n);
        nsum += n;
    }
    tr.mu_hat = psum / half;
    const double s2 = 2.0 * static_cast<double>(nsum) / half - tr.mu_hat * tr.mu_hat;
    tr.sigma_sq_hat = s2;
    if (s2 < 0.0) {
        tr.sigma_hat = 0.0;
        tr.clamp_events = 1;
    } else {
        tr.sigma_hat = std::sqrt(s2);
    }
    return tr;
}

ProtocolTrace simulate_adaptive(double mu, double sigma, int shots, std::uint64_t seed) {
    if (!(sigma > 0.0)) throw std::invalid_argument("simulate_adaptive: sigma > 0");
    if (shots < 2 || shots % 2 != 0)
        throw std::invalid_argument("simulate_adaptive: M must be even and >= 2");
    const int rounds = shots / 2;
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double quad_sd = std::sqrt(0.5 + sigma * sigma);
    ProtocolTrace tr;
    tr.seed = seed;
    tr.shots = shots;
    tr.quadrature_outcomes.reserve(rounds);
    tr.number_outcomes.reserve(rounds);
    tr.applied_displacements.reserve(rounds);
    std::vector<double> mean_after(rounds);
    double mean = mu; // running <p> of the state
    std::normal_distribution<double> std_normal(0.0, 1.0);
    for (int k = 1; k <= rounds; ++k) {
        const double p = mean + quad_sd * std_normal(rng);
        tr.quadrature_outcomes.push_back(p);
        const double shift = -p / k;
        tr.applied_displacements.push_back(shift);
        mean += shift;
        mean_after[k - 1] = mean;
        // number measurement on the displaced state (mean `mean`, std sigma)
        const Vec pn = displaced_number_distribution(mean, sigma, 1e-10);
        Vec cdf(pn.size());
        double acc = 0.0;
        for (int i = 0; i < pn.size(); ++i) {
            acc += pn(i);
            cdf(i) = acc;
        }
        tr.number_outcomes.push_back(sample_from_cdf(cdf, unif(rng) * acc));
    }
    // post-processing: mu_i estimated against the final residual mean
    const double mu_m = mean_after[rounds - 1];
    double sum_n = 0.0, sum_mu2 = 0.0;
    for (int k = 0; k < rounds; ++k) {
        sum_n += tr.number_outcomes[k];
        const double mu_i = mean_after[k] - mu_m;
        sum_mu2 += mu_i * mu_i;
    }
    // The protocol estimates mu from the accumulated nulling displacement.
    tr.mu_hat = mu - mu_m;
    const double s2 = 2.0 * sum_n / rounds - sum_mu2 / rounds;
    tr.sigma_sq_hat = s2;
    if (s2 < 0.0) {
        tr.sigma_hat = 0.0;
        tr.clamp_events = 1;
    } else {
        tr.sigma_hat = std::sqrt(s2);
    }
    return tr;
}

Mat joint_measurement_cfim(int copies, double variance) {
    if (copies < 2) throw std::invalid_argument("joint_measurement_cfim: M must be >= 2");
    if (!(variance > 0.0)) throw std::invalid_argument("joint_measurement_cfim: V must be > 0");
    Mat out = Mat::Zero(2, 2);
    out(0, 0) = 4.0 * variance * copies;
    out(1, 1) = 4.0 * variance * (copies - 1);
    return out;
}

namespace {

/// Single-copy state under exp(-i theta H), theta ~ N(mu, sigma^2):
/// elementwise damping in the H eigenbasis by the Gaussian characteristic
/// function exp(-i mu d - sigma^2 d^2 / 2), d = lambda_j - lambda_k.
struct DampedState {
    CMat rho, dmu, dsigma;
};

DampedState damped_state(const CVec& psi_eig, const Vec& lambda, double mu, double sigma) {
    const int d = static_cast<int>(psi_eig.size());
    DampedState out;
    out.rho = CMat(d, d);
    out.dmu = CMat(d, d);
    out.dsigma = CMat(d, d);
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
            const double diff = lambda(j) - lambda(k);
            const Complex factor =
                std::exp(Complex(-0.5 * sigma * sigma * diff * diff, -mu * diff));
            const Complex base = psi_eig(j) * std::conj(psi_eig(k)) * factor;
            out.rho(j, k) = base;
            out.dmu(j, k) = -kI * diff * base;
            out.dsigma(j, k) = -sigma * diff * diff * base;
        }
    return out;
}

CMat kron_all(const std::vector<const CMat*>& mats) {
    CMat out = *mats[0];
    for (size_t i = 1; i < mats.size(); ++i) {
        const CMat& b = *mats[i];
        CMat next(out.rows() * b.rows(), out.cols() * b.cols());
        for (int r = 0; r < out.rows(); ++r)
            for (int c = 0; c < out.cols(); ++c)
                next.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = out(r, c) * b;
        out = std::move(next);
    }
    return out;
}

CVec kron_vec(const std::vector<const CVec*>& vecs) {
    CVec out = *vecs[0];
    for (size_t i = 1; i < vecs.size(); ++i) {
        const CVec& b = *vecs[i];
        CVec next(out.size() * b.size());
        for (int r = 0; r < out.size(); ++r) next.segment(r * b.size(), b.size()) = out(r) * b;
        out = std::move(next);
    }
    return out;
}

} // namespace

Mat joint_bruteforce_check(const CVec& psi, const CMat& generator, int copies, double mu,
                           double sigma) {
    const int d = static_cast<int>(psi.size());
    if (copies < 2 || copies > 3 || d > 8)
        throw std::invalid_argument("joint_bruteforce_check: M <= 3 and dim <= 8 only");
    Eigen::SelfAdjointEigenSolver<CMat> es(generator);
    const CVec psi_eig = es.eigenvectors().adjoint() * psi;
    const DampedState single = damped_state(psi_eig, es.eigenvalues(), mu, sigma);

    // M-copy state and its parameter derivatives by the product rule.
    std::vector<const CMat*> blocks(copies, &single.rho);
    const CMat rho_m = kron_all(blocks);
    CMat dmu_m = CMat::Zero(rho_m.rows(), rho_m.cols());
    CMat dsg_m = CMat::Zero(rho_m.rows(), rho_m.cols());
    for (int i = 0; i < copies; ++i) {
        std::vector<const CMat*> bmu(copies, &single.rho), bsg(copies, &single.rho);
        bmu[i] = &single.dmu;
        bsg[i] = &single.dsigma;
        dmu_m += kron_all(bmu);
        dsg_m += kron_all(bsg);
    }

    // Collective probe vectors: |e_i> = psi..phi1..psi with
    // phi1 = (H - <H>)|psi>/sqrt(V).
    const Complex h_mean = psi.adjoint() * generator * psi;
    CVec phi1 = generator * psi - h_mean * psi;
    phi1.normalize();
    const CVec psi_e = psi_eig;
    const CVec phi1_e = es.eigenvectors().adjoint() * phi1;
    std::vector<CVec> e_vecs;
    for (int i = 0; i < copies; ++i) {
        std::vector<const CVec*> parts(copies, &psi_e);
        parts[i] = &phi1_e;
        e_vecs.push_back(kron_vec(parts));
    }
    CVec e_s = CVec::Zero(e_vecs[0].size());
    for (const auto& e : e_vecs) e_s += e;
    e_s /= std::sqrt(static_cast<double>(copies));
    // Anti-symmetric combinations: orthonormal basis of span{e_i} - e_s.
    std::vector<CVec> anti;
    for (int i = 0; i < copies; ++i) {
        CVec cand = e_vecs[i] - (e_s.adjoint() * e_vecs[i])(0) * e_s;
        for (const auto& prev : anti) cand -= (prev.adjoint() * cand)(0) * prev;
        const double nrm = cand.norm();
        if (nrm > 1e-10) anti.push_back(cand / nrm);
    }
    std::vector<const CVec*> all_psi(copies, &psi_e);
    const CVec psi_m = kron_vec(all_psi);
    const CVec sym_probe = (psi_m + kI * e_s) / std::sqrt(2.0);

    std::vector<CVec> projectors = {sym_probe};
    for (const auto& a : anti) projectors.push_back(a);

    // CFIM of the projective outcomes plus the completion effect.
    Mat cfim = Mat::Zero(2, 2);
    double p_rest = 1.0;
    Vec dp_rest = Vec::Zero(2);
    for (const auto& proj : projectors) {
        const double p = std::real((proj.adjoint() * rho_m * proj)(0));
        const Vec dp = (Vec(2) << std::real((proj.adjoint() * dmu_m * proj)(0)),
                        std::real((proj.adjoint() * dsg_m * proj)(0)))
                           .finished();
        p_rest -= p;
        dp_rest -= dp;
        if (p > 1e-18) cfim += dp * dp.transpose() / p;
    }
    if (p_rest > 1e-18) cfim += dp_rest * dp_rest.transpose() / p_rest;
    return cfim;
}

} // namespace qnm::protocols
