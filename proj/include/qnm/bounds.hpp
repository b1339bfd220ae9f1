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

#pragma once

#include <map>
#include <string>
#include <vector>

namespace qnm::bounds {

/// Mean occupation number, with an explicit infinite-energy case. Several
/// closed forms stay finite as N -> infinity while others diverge; keeping
/// the sentinel out of the double range avoids silent overflow.
class OccupationN {
  public:
    OccupationN(double n); // NOLINT(google-explicit-constructor)
    static OccupationN infinite();
    [[nodiscard]] bool is_infinite() const { return infinite_; }
    /// Finite value; throws if infinite.
    [[nodiscard]] double value() const;

  private:
    OccupationN() : infinite_(true) {}
    double n_ = 0.0;
    bool infinite_ = false;
};

/// Maximal position variance of a pure state with mean occupation N:
/// xi_N = N + 1/2 + sqrt(N(N+1)), attained by SMSV.
double xi_n(double n);

// Closed-form Fisher-information expressions. sigma is the standard
// deviation of the random displacement, eta/eta_a are loss fractions,
// sigma_x/sigma_p classical-noise levels.
double ecqfi_lossless(double sigma, const OccupationN& n);
double ecqfi_lossy(double sigma, double eta);
double ub_lossy_constrained(double sigma, double eta, const OccupationN& n);
double qfi_vacuum(double sigma);
double cfi_quadrature_vacuum(double sigma);
double qfi_smsv_lossy_he(double sigma, double eta);
double qfi_vacuum_classical(double sigma, double sigma_x, double sigma_p);
double ecqfi_parallel(double sigma, double sigma_p, const OccupationN& n);
double ecqfi_parallel_loss(double sigma, double sigma_p, double eta);
double qfi_fock(double n, double eta);
double qfi_tmsv_1d_he(double sigma, double eta, double eta_a);
double qfi_tmsv_2d_he(double sigma, double eta, double eta_a);
double qfi_tmsv_perp(const OccupationN& n);
double ecqfi_axion_2d(double sigma, double eta, const OccupationN& n);
double ecqfi_det_lossless(const OccupationN& n);
double ecqfi_det_lossy(const OccupationN& n, double eta);
double ecqfi_qubit_rotation(double sigma);
/// Chain rule between the sigma and sigma^2 parametrizations:
/// I(sigma^2) = I(sigma) / (4 sigma^2).
double variance_form(double sigma, double qfi);

/// Optimal Fock input under loss: argmax over integers of qfi_fock(N, eta).
/// Ties within 1e-12 relative are reported together; `best` is the smallest.
struct OptimalFock {
    int best;
    std::vector<int> argmax_set;
    double value;
};
OptimalFock optimal_fock_n(double eta);

/// Named catalog for the CLI. Parameters are looked up by name
/// (sigma, eta, eta_a, sigma_x, sigma_p, N; N may be "inf").
struct BoundSpec {
    std::string name;
    std::map<std::string, double> params; // N==inf encoded via infinite_n
    bool infinite_n = false;
};
double eval_bound(const BoundSpec& spec);
std::vector<std::pair<std::string, std::string>> catalog(); // name, parameter list

} // namespace qnm::bounds
