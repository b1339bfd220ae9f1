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
#include <functional>
#include <string>
#include <vector>

#include "qnm/channels.hpp"
#include "qnm/fock.hpp"
#include "qnm/types.hpp"

namespace qnm::optimize {

struct ChannelConfig {
    double sigma = 1e-3;
    double eta = 0.0;
    int dim = 60;
    int quad_nodes = 41;
};

struct OptimizationRun {
    std::vector<double> history; // best objective per iteration, non-decreasing
    fock::PureState best_state;
    double best_qfi = 0.0;         // recomputed by the spectral engine
    double best_mean_number = 0.0;
    long evaluations = 0;
    std::string method;
    std::uint64_t seed = 0;
    ChannelConfig config;
    std::string to_json() const;
};

/// Biconvex objective f(psi, X) = <psi| Lambda^dag(X^2) - 2 dLambda^dag(X) |psi>.
/// When X is the SLD of Lambda(|psi><psi|), -f equals the QFI.
double biconvex_objective(const fock::PureState& psi, const CMat& x_var,
                          const channels::LossyEncoding& family);

/// Alternate convex search: X-step solves the SLD, psi-step takes the leading
/// eigenvector of 2 dLambda^dag(X) - Lambda^dag(X^2). -f is monotone
/// non-decreasing across iterations.
OptimizationRun acs_search(const fock::PureState& psi0, const channels::LossyEncoding& family,
                           int max_iters, double tol = 1e-10);

enum class SparseMethod { Swarm, Gradient, SwarmThenGradient };

struct SwarmBudget {
    int particles = 64;
    int iterations = 500;
    /// Stop once the surrogate best exceeds this (0 disables early stopping).
    double target = 0.0;
};

/// Search over sparse Fock superpositions sum_k c_k |spacing * k> for the
/// maximal QFI of the lossy random-displacement channel. Particle-swarm
/// iterations run on a perturbative sector-blocked QFI surrogate (exact to
/// O(sigma^4)); the reported best_qfi is recomputed by the full spectral
/// engine. Deterministic for a fixed seed.
OptimizationRun optimize_sparse(int spacing, int peaks, const ChannelConfig& config,
                                SparseMethod method, const SwarmBudget& budget,
                                std::uint64_t seed);

/// Central-difference gradient over real coordinates.
Vec finite_diff_gradient(const std::function<double(const Vec&)>& objective, const Vec& coords,
                         double h);

/// The surrogate itself, exposed for validation against the spectral engine.
double sparse_qfi_surrogate(const CVec& coeffs, int spacing, const ChannelConfig& config);

} // namespace qnm::optimize
