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

#include "qnm/bounds.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace qnm::bounds {

namespace {

void check_range(double v, double lo, double hi, const char* name) {
    if (!(v >= lo) || !(v < hi) || std::isnan(v))
        throw std::invalid_argument(std::string("bounds: parameter out of domain: ") + name);
}

void check_nonneg(double v, const char* name) {
    if (!(v >= 0.0) || std::isnan(v))
        throw std::invalid_argument(std::string("bounds: parameter out of domain: ") + name);
}

[[noreturn]] void divergent(const char* name) {
    throw std::invalid_argument(std::string(name) + ": diverges at N = infinity");
}

} // namespace

OccupationN::OccupationN(double n) : n_(n) {
    check_nonneg(n, "N");
}

OccupationN OccupationN::infinite() { return OccupationN(); }

double OccupationN::value() const {
    if (infinite_) throw std::invalid_argument("OccupationN: infinite sentinel has no finite value");
    return n_;
}

double xi_n(double n) {
    check_nonneg(n, "N");
    return n + 0.5 + std::sqrt(n * (n + 1.0));
}

double ecqfi_lossless(double sigma, const OccupationN& n) {
    check_nonneg(sigma, "sigma");
    if (n.is_infinite()) {
        if (sigma == 0.0) divergent("ecqfi_lossless");
        return 2.0 / (sigma * sigma);
    }
    return 4.0 / (2.0 * sigma * sigma + 1.0 / xi_n(n.value()));
}

double ecqfi_lossy(double sigma, double eta) {
    check_nonneg(sigma, "sigma");
    check_range(eta, 0.0, 1.0, "eta");
    if (eta == 0.0 && sigma == 0.0) divergent("ecqfi_lossy");
    return 2.0 / (eta + sigma * sigma);
}

double ub_lossy_constrained(double sigma, double eta, const OccupationN& n) {
    check_nonneg(sigma, "sigma");
    check_range(eta, 0.0, 1.0, "eta");
    if (n.is_infinite()) return ecqfi_lossy(sigma, eta);
    return 4.0 / (2.0 * (eta + sigma * sigma) + (1.0 - eta) / xi_n(n.value()));
}

double qfi_vacuum(double sigma) {
    check_nonneg(sigma, "sigma");
    return 2.0 / (1.0 + sigma * sigma);
}

double cfi_quadrature_vacuum(double sigma) {
    check_nonneg(sigma, "sigma");
    const double v = 0.5 + sigma * sigma;
    return 2.0 * sigma * sigma / (v * v);
}

double qfi_smsv_lossy_he(double sigma, double eta) {
    check_nonneg(sigma, "sigma");
    check_range(eta, 0.0, 1.0, "eta");
    const double d = eta + 2.0 * sigma * sigma;
    if (d == 0.0) divergent("qfi_smsv_lossy_he");
    return 8.0 * sigma * sigma / (d * d);
}

double qfi_vacuum_classical(double sigma, double sigma_x, double sigma_p) {
    check_nonneg(sigma, "sigma");
    check_nonneg(sigma_x, "sigma_x");
    check_nonneg(sigma_p, "sigma_p");
    const double s2 = sigma * sigma, x2 = sigma_x * sigma_x, p2 = sigma_p * sigma_p;
    const double kappa = s2 + x2 + p2 + 2.0 * x2 * (s2 + p2);
    if (kappa == 0.0) return 2.0; // pure vacuum limit of qfi_vacuum at sigma -> 0
    const double num = 2.0 * s2 * (1.0 + 2.0 * x2) * (1.0 + 2.0 * x2);
    return num / (kappa * (kappa + 1.0));
}

double ecqfi_parallel(double sigma, double sigma_p, const OccupationN& n) {
    check_nonneg(sigma, "sigma");
    check_nonneg(sigma_p, "sigma_p");
    const double t2 = sigma * sigma + sigma_p * sigma_p;
    const double inv_xi = n.is_infinite() ? 0.0 : 1.0 / xi_n(n.value());
    if (t2 == 0.0 && inv_xi == 0.0) divergent("ecqfi_parallel");
    if (t2 == 0.0) return 0.0;
    return 4.0 * sigma * sigma / (t2 * (2.0 * t2 + inv_xi));
}

double ecqfi_parallel_loss(double sigma, double sigma_p, double eta) {
    check_nonneg(sigma, "sigma");
    check_nonneg(sigma_p, "sigma_p");
    check_range(eta, 0.0, 1.0, "eta");
    const double t2 = sigma * sigma + sigma_p * sigma_p;
    if (t2 == 0.0) return eta > 0.0 ? 0.0 : throw std::invalid_argument("ecqfi_parallel_loss: zero denominators");
    return 2.0 * sigma * sigma / ((eta + t2) * t2);
}

double qfi_fock(double n, double eta) {
    check_nonneg(n, "N");
    check_range(eta, 0.0, 1.0, "eta");
    // stable for large N: exp(N log(1-eta))
    return 2.0 * std::exp(n * std::log1p(-eta)) * (n + 1.0);
}

double qfi_tmsv_1d_he(double sigma, double eta, double eta_a) {
    check_nonneg(sigma, "sigma");
    check_range(eta, 0.0, 1.0, "eta");
    check_range(eta_a, 0.0, 1.0, "eta_a");
    const double s2 = sigma * sigma;
    // Perfect storage: the high-energy limit is exactly the lossy ECQFI.
    if (eta_a == 0.0) return 2.0 / (eta + s2);
    const double g = eta + eta_a - 2.0 * eta * eta_a;
    const double xi = 2.0 * (1.0 - eta) * eta * eta_a *
                      (eta * eta * (2.0 * (eta_a - 1.0) * eta_a + 1.0) -
                       2.0 * eta * eta_a * eta_a + eta_a * eta_a);
    return 2.0 * (1.0 - eta_a) * s2 * g * g / (xi + s2 * g * g * g);
}

double qfi_tmsv_2d_he(double sigma, double eta, double eta_a) {
    check_nonneg(sigma, "sigma");
    check_range(eta, 0.0, 1.0, "eta");
    check_range(eta_a, 0.0, 1.0, "eta_a");
    const double s2 = sigma * sigma;
    const double den = (eta + s2) * ((1.0 - eta) * eta_a + (1.0 - eta_a) * s2);
    if (den == 0.0) divergent("qfi_tmsv_2d_he");
    return 4.0 * (1.0 - eta_a) * s2 / den;
}

double qfi_tmsv_perp(const OccupationN& n) {
    if (n.is_infinite()) divergent("qfi_tmsv_perp");
    const double v = n.value();
    return 8.0 * v * (v + 1.0) / (2.0 * v + 1.0);
}

double ecqfi_axion_2d(double sigma, double eta, const OccupationN& n) {
    check_nonneg(sigma, "sigma");
    check_range(eta, 0.0, 1.0, "eta");
    const double s2 = sigma * sigma;
    if (n.is_infinite()) {
        if (eta == 0.0 && s2 == 0.0) divergent("ecqfi_axion_2d");
        return 4.0 / (eta + s2);
    }
    const double nv = n.value();
    const double num = 4.0 * (eta + nv * (eta + 2.0 * s2) + s2);
    const double den = (eta + s2) * (nv * (eta + 2.0 * s2) + s2 + 1.0);
    if (den == 0.0) divergent("ecqfi_axion_2d");
    return num / den;
}

double ecqfi_det_lossless(const OccupationN& n) {
    if (n.is_infinite()) divergent("ecqfi_det_lossless");
    return 4.0 * xi_n(n.value());
}

double ecqfi_det_lossy(const OccupationN& n, double eta) {
    check_range(eta, 0.0, 1.0, "eta");
    if (n.is_infinite()) {
        if (eta == 0.0) divergent("ecqfi_det_lossy");
        return 2.0 / eta;
    }
    const double xi = xi_n(n.value());
    return 4.0 * xi / (eta * (2.0 * xi - 1.0) + 1.0);
}

double ecqfi_qubit_rotation(double sigma) {
    check_nonneg(sigma, "sigma");
    const double s2 = sigma * sigma;
    if (s2 == 0.0) return 1.0;
    return s2 / std::expm1(s2);
}

double variance_form(double sigma, double qfi) {
    if (!(sigma > 0.0)) throw std::invalid_argument("variance_form: sigma must be > 0");
    return qfi / (4.0 * sigma * sigma);
}

OptimalFock optimal_fock_n(double eta) {
    if (!(eta > 0.0) || !(eta < 1.0))
        throw std::invalid_argument("optimal_fock_n: eta must be in (0,1)");
    // Search around the analytic optimum N ~ -1/log(1-eta) - 1 but verify by
    // enumeration; the maximizer is unimodal in N.
    const double guess = -1.0 / std::log1p(-eta) - 1.0;
    const int hi = std::max(4, static_cast<int>(std::ceil(guess)) * 4 + 8);
    double best_v = -1.0;
    int best_n = 0;
    for (int k = 0; k <= hi; ++k) {
        const double v = qfi_fock(k, eta);
        if (v > best_v * (1.0 + 1e-15)) {
            best_v = v;
            best_n = k;
        }
    }
    OptimalFock out;
    out.best = best_n;
    out.value = best_v;
    for (int k = 0; k <= hi; ++k)
        if (qfi_fock(k, eta) >= best_v * (1.0 - 1e-12)) out.argmax_set.push_back(k);
    return out;
}

namespace {

struct Entry {
    const char* params;
    std::function<double(const BoundSpec&)> fn;
};

double get(const BoundSpec& s, const std::string& key) {
    auto it = s.params.find(key);
    if (it == s.params.end())
        throw std::invalid_argument("eval_bound: missing parameter " + key + " for " + s.name);
    return it->second;
}

OccupationN get_n(const BoundSpec& s) {
    if (s.infinite_n) return OccupationN::infinite();
    return OccupationN(get(s, "N"));
}

const std::vector<std::pair<std::string, Entry>>& table() {
    static const std::vector<std::pair<std::string, Entry>> t = {
        {"xi_N", {"N", [](const BoundSpec& s) { return xi_n(get(s, "N")); }}},
        {"ecqfi_lossless", {"sigma,N", [](const BoundSpec& s) { return ecqfi_lossless(get(s, "sigma"), get_n(s)); }}},
        {"ecqfi_lossy", {"sigma,eta", [](const BoundSpec& s) { return ecqfi_lossy(get(s, "sigma"), get(s, "eta")); }}},
        {"ub_lossy_constrained",
         {"sigma,eta,N", [](const BoundSpec& s) { return ub_lossy_constrained(get(s, "sigma"), get(s, "eta"), get_n(s)); }}},
        {"qfi_vacuum", {"sigma", [](const BoundSpec& s) { return qfi_vacuum(get(s, "sigma")); }}},
        {"cfi_quadrature_vacuum", {"sigma", [](const BoundSpec& s) { return cfi_quadrature_vacuum(get(s, "sigma")); }}},
        {"qfi_smsv_lossy_he", {"sigma,eta", [](const BoundSpec& s) { return qfi_smsv_lossy_he(get(s, "sigma"), get(s, "eta")); }}},
        {"qfi_vacuum_classical",
         {"sigma,sigma_x,sigma_p",
          [](const BoundSpec& s) { return qfi_vacuum_classical(get(s, "sigma"), get(s, "sigma_x"), get(s, "sigma_p")); }}},
        {"ecqfi_parallel",
         {"sigma,sigma_p,N", [](const BoundSpec& s) { return ecqfi_parallel(get(s, "sigma"), get(s, "sigma_p"), get_n(s)); }}},
        {"ecqfi_parallel_loss",
         {"sigma,sigma_p,eta",
          [](const BoundSpec& s) { return ecqfi_parallel_loss(get(s, "sigma"), get(s, "sigma_p"), get(s, "eta")); }}},
        {"qfi_fock", {"N,eta", [](const BoundSpec& s) { return qfi_fock(get(s, "N"), get(s, "eta")); }}},
        {"qfi_tmsv_1d_he",
         {"sigma,eta,eta_a", [](const BoundSpec& s) { return qfi_tmsv_1d_he(get(s, "sigma"), get(s, "eta"), get(s, "eta_a")); }}},
        {"qfi_tmsv_2d_he",
         {"sigma,eta,eta_a", [](const BoundSpec& s) { return qfi_tmsv_2d_he(get(s, "sigma"), get(s, "eta"), get(s, "eta_a")); }}},
        {"qfi_tmsv_perp", {"N", [](const BoundSpec& s) { return qfi_tmsv_perp(get_n(s)); }}},
        {"ecqfi_axion_2d",
         {"sigma,eta,N", [](const BoundSpec& s) { return ecqfi_axion_2d(get(s, "sigma"), get(s, "eta"), get_n(s)); }}},
        {"ecqfi_det_lossless", {"N", [](const BoundSpec& s) { return ecqfi_det_lossless(get_n(s)); }}},
        {"ecqfi_det_lossy", {"N,eta", [](const BoundSpec& s) { return ecqfi_det_lossy(get_n(s), get(s, "eta")); }}},
        {"ecqfi_qubit_rotation", {"sigma", [](const BoundSpec& s) { return ecqfi_qubit_rotation(get(s, "sigma")); }}},
        {"variance_form", {"sigma,qfi", [](const BoundSpec& s) { return variance_form(get(s, "sigma"), get(s, "qfi")); }}},
    };
    return t;
}

} // namespace

double eval_bound(const BoundSpec& spec) {
    for (const auto& [name, entry] : table())
        if (name == spec.name) return entry.fn(spec);
    throw std::invalid_argument("eval_bound: unknown formula name: " + spec.name);
}

std::vector<std::pair<std::string, std::string>> catalog() {
    std::vector<std::pair<std::string, std::string>> out;
    out.reserve(table().size());
    for (const auto& [name, entry] : table()) out.emplace_back(name, entry.params);
    return out;
}

} // namespace qnm::bounds
