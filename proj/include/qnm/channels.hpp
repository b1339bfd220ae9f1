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
#include <memory>
#include <string>
#include <vector>

#include "qnm/fock.hpp"
#include "qnm/types.hpp"

namespace qnm::channels {

enum class DisplacementAxis { P, X, Both };

/// Quantum channel as an ordered Kraus family on a truncated space.
/// sum K^dag K = 1 holds only up to a completeness defect introduced by the
/// cutoff; the defect is measured, never assumed away.
class Channel {
  public:
    Channel(fock::TruncatedSpace space, std::vector<CMat> kraus, std::string label,
            std::map<std::string, double> params = {});

    [[nodiscard]] const fock::TruncatedSpace& space() const { return space_; }
    [[nodiscard]] const std::vector<CMat>& kraus() const { return kraus_; }
    [[nodiscard]] const std::string& label() const { return label_; }
    [[nodiscard]] const std::map<std::string, double>& params() const { return params_; }

    [[nodiscard]] CMat apply(const CMat& rho) const;
    [[nodiscard]] fock::DensityMatrix apply(const fock::DensityMatrix& rho) const;

    /// max |(sum K^dag K - 1)_{jk}|.
    [[nodiscard]] double completeness_defect() const;

    /// dim^2 x dim^2 superoperator in column-major vectorization, built
    /// lazily and only for small dims (memory guard). Concurrent builders
    /// race benignly: last writer discards.
    [[nodiscard]] std::shared_ptr<const CMat> superoperator() const;
    static constexpr int kSuperopMaxDim = 40;

  private:
    fock::TruncatedSpace space_;
    std::vector<CMat> kraus_;
    std::string label_;
    std::map<std::string, double> params_;
    mutable std::shared_ptr<const CMat> superop_;
};

/// Pure loss (zero-temperature bath), Kraus
/// K_n = (1/sqrt(n!)) (sqrt(eta) a)^n (1-eta)^{(a^dag a - n)/2}.
/// Operators with negligible norm at this cutoff are pruned; the resulting
/// completeness defect is reported by the channel.
Channel loss_channel(double eta, const fock::TruncatedSpace& space);

/// Random displacement with Gaussian-distributed amplitude (std sigma) along
/// the given axis, realized by Gauss-Hermite quadrature: Kraus
/// {sqrt(w_k) exp(i alpha_k x)} for axis P (and the p-generator for axis X).
/// Axis Both composes independent x- and p-axis channels.
Channel random_displacement_channel(double sigma, DisplacementAxis axis,
                                    const fock::TruncatedSpace& space, int quad_nodes = 41);

/// Classical noise: adds Sigma_C (2x2 PSD, quadrature units) to Gaussian
/// covariance; realized as random displacements along the principal axes.
Channel classical_noise_channel(const Mat& sigma_c, const fock::TruncatedSpace& space,
                                int quad_nodes = 41);

/// Dark counts: adds m particles with probability p_th(m) = Nbar^m/(1+Nbar)^{m+1}.
Channel dark_count_channel(double n_bar, const fock::TruncatedSpace& space);

/// Involutive permutation unitary swapping |1> and |k>, stabilizing |0>.
CMat swap_control(int k, const fock::TruncatedSpace& space);

/// Weak-decay channel for jump operators sharing one rate:
/// K_{0,j} = 1/sqrt(m) - (gT sqrt(m)/2) Y_j^dag Y_j, K_{1,j} = sqrt(gT) Y_j.
/// Warns (via the returned flag in params: "short_time_ok") when
/// gT * max_j tr(Y rho Y^dag) is not small; trace is preserved to O((gT)^2).
Channel weak_decay_channel(const std::vector<CMat>& jump_ops, double gamma_t,
                           const fock::TruncatedSpace& space);

struct QubitChannels {
    Channel dephasing;         // off-diagonals damped by exp(-gamma_deph T)
    Channel amplitude_damping; // |1><1| population damped by exp(-gamma_loss T)
    Channel random_rotation;   // Gaussian phase diffusion of strength sigma
};
Channel qubit_dephasing(double gamma_t);
Channel qubit_amplitude_damping(double gamma_t);
Channel qubit_random_rotation(double sigma);

/// Kraus products K_a B_b: apply(compose(a,b), rho) == a.apply(b.apply(rho)).
Channel compose(const Channel& a, const Channel& b);

/// Structure-exploiting loss application, O(dim^2) per Kraus term.
CMat apply_loss(const CMat& rho, double eta);

/// Weighted Kraus columns of the loss channel acting on a pure state:
/// rho_loss = V V^dag with V(:,m) = K_m psi; columns with squared norm below
/// `tol` are dropped.
CMat loss_kraus_columns(const CVec& psi, double eta, double tol = 1e-15);

/// Random-displacement encoding (axis P) preceded by loss, with structured
/// Schroedinger/Heisenberg application and the analytic sigma-derivative.
/// The workhorse family for the optimizer and the derivative supplier.
class LossyEncoding {
  public:
    LossyEncoding(double eta, double sigma, const fock::TruncatedSpace& space, int quad_nodes = 41);

    [[nodiscard]] double eta() const { return eta_; }
    [[nodiscard]] double sigma() const { return sigma_; }
    [[nodiscard]] const fock::TruncatedSpace& space() const { return space_; }

    [[nodiscard]] CMat apply(const CMat& rho) const;            // Lambda_sigma(loss(rho))
    [[nodiscard]] CMat derivative(const CMat& rho) const;       // d/dsigma of apply
    [[nodiscard]] CMat adjoint(const CMat& a) const;            // Heisenberg picture
    [[nodiscard]] CMat adjoint_sigma_derivative(const CMat& a) const;

  private:
    [[nodiscard]] CMat encode(const CMat& rho, bool adjoint_dir) const;
    double eta_;
    double sigma_;
    fock::TruncatedSpace space_;
    int nodes_;
    Vec quad_nodes_, quad_weights_;
    Mat x_eigvecs_;
    Vec x_eigvals_;
};

} // namespace qnm::channels
