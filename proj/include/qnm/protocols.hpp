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

#include <cstdint>
#include <vector>

#include "qnm/types.hpp"

namespace qnm::protocols {

/// Photon-number distribution of the vacuum after a random displacement of
/// mean mu and std sigma along p: p(n) = int N(a; mu, s^2) e^{-a^2/2}
/// (a^2/2)^n / n! da, evaluated by exact Gauss-Hermite quadrature on the
/// completed square. The table is truncated once the cumulative tail falls
/// below `tail_tol`.
Vec displaced_number_distribution(double mu, double sigma, double tail_tol = 1e-12);

/// CFIM of a number measurement with respect to (mu, sigma).
Mat number_cfim(double mu, double sigma, double step = 1e-6);

/// One Monte Carlo run of the separate-measurements protocol. M counts the
/// total number of measurements; half are quadrature shots and half number
/// shots (adaptive: M/2 rounds of one quadrature + one number measurement).
struct ProtocolTrace {
    std::uint64_t seed = 0;
    int shots = 0; // M
    std::vector<double> quadrature_outcomes;
    std::vector<int> number_outcomes;
    std::vector<double> applied_displacements; // adaptive only
    double mu_hat = 0.0;
    double sigma_hat = 0.0;    // sqrt of the clamped variance estimate
    double sigma_sq_hat = 0.0; // unclamped variance estimate (may be negative)
    int clamp_events = 0;      // sigma^2 estimate clamped at zero
    void validate() const;
};

ProtocolTrace simulate_nonadaptive(double mu, double sigma, int shots, std::uint64_t seed);
ProtocolTrace simulate_adaptive(double mu, double sigma, int shots, std::uint64_t seed);

/// Analytic CFIM of the collective (anti)symmetric-basis measurement on M
/// copies: 4 V diag(M, M-1) for generator variance V.
Mat joint_measurement_cfim(int copies, double variance);

/// Explicit finite-dimensional check of the joint-measurement construction:
/// builds the M-copy product state under the random-unitary channel
/// exp(-i theta H), theta ~ N(mu, sigma^2), projects onto
/// (|psi>^{otimes M} + i |e_s>)/sqrt(2) and the anti-symmetric vectors, and
/// returns the CFIM with respect to (mu, sigma).
Mat joint_bruteforce_check(const CVec& psi, const CMat& generator, int copies, double mu,
                           double sigma);

} // namespace qnm::protocols
