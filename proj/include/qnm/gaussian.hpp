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

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "qnm/types.hpp"

namespace qnm::gaussian {

/// Gaussian state of M bosonic modes in dimensionless quadrature units
/// (vacuum covariance = I/2). Quadratures are ordered (x1, p1, ..., xM, pM).
struct GaussianState {
    int num_modes = 1;
    Vec mean; // length 2M
    Mat cov;  // 2M x 2M, symmetric

    /// Checks symmetry, dimensions and the uncertainty principle
    /// (all symplectic eigenvalues >= 1/2 - 1e-9). Throws on violation.
    void validate() const;
    /// Purity gamma = det(2 Sigma)^(-1/2).
    [[nodiscard]] double purity() const;
};

struct GaussianNoiseConfig {
    double eta = 0.0;     // loss before the encoding, in [0,1)
    double eta_a = 0.0;   // ancilla loss, in [0,1)
    double sigma_x = 0.0; // classical noise std along x, >= 0
    double sigma_p = 0.0; // classical noise std along p, >= 0
    void validate() const;
};

/// State constructors. Parameter conventions:
///   vacuum: no parameters
///   coherent: complex amplitude alpha (mean = sqrt(2)(Re, Im))
///   smsv: mean occupation N per mode, anti-squeezed in x (Var x = xi_N)
///   tmsv: two-mode squeezed vacuum with N per mode
GaussianState make_vacuum(int num_modes = 1);
/// Dispatch by kind name: vacuum | coherent | smsv | tmsv. Numeric
/// parameters: N, alpha_re, alpha_im.
GaussianState make_gaussian(const std::string& kind, const std::map<std::string, double>& params);
GaussianState make_coherent(Complex alpha);
GaussianState make_smsv(double n);
GaussianState make_tmsv(double n);

enum class ChannelKind { Loss, ClassicalNoise, Encode1D, Encode2D, Squeeze, Displace };

/// One Gaussian channel acting on (mean, cov). Factories below populate the
/// relevant fields; `mode` is 0-based.
struct ChannelSpec {
    ChannelKind kind;
    int mode = 0;
    double eta = 0.0;   // Loss
    double sigma = 0.0; // Encode1D / Encode2D
    double r = 0.0;     // Squeeze: cov -> S cov S with S = diag(e^-r, e^r) on the mode
    Mat sigma_c;        // ClassicalNoise: PSD matrix added to cov
    Vec displacement;   // Displace: added to mean
};
ChannelSpec loss(double eta, int mode = 0);
ChannelSpec classical_noise(const Mat& sigma_c);
ChannelSpec encode_1d(double sigma, int mode = 0);
ChannelSpec encode_2d(double sigma, int mode = 0);
ChannelSpec squeeze(double r, int mode = 0);
ChannelSpec displace(const Vec& v);

GaussianState apply_gaussian_channel(const GaussianState& state, const ChannelSpec& channel);

/// Applies the standard pre-encoding noise stack: loss on the signal mode,
/// ancilla loss when a second mode exists, then classical noise.
GaussianState apply_noise(const GaussianState& state, const GaussianNoiseConfig& config);

/// Single-mode QFI for a parameter encoded in the covariance matrix only:
/// Tr[(S^-1 dS)^2] / (2(1+g^2)) + 2 (dg)^2 / (1-g^4), with the purity
/// derivative obtained analytically from dS by Jacobi's formula.
double qfi_covariance(const Mat& cov, const Mat& dcov);

/// M-mode covariance-encoded QFI, 2 Tr[dS Y] with 4 S Y S - w Y w = dS.
/// Solved in the Williamson basis where the kernel decouples into 2x2
/// mode-pair blocks; singular (pure-pure) channels are dropped when the
/// per-pair denominator falls below `pinv_cutoff`.
double qfi_covariance_multimode(const Mat& cov, const Mat& dcov, double pinv_cutoff = 1e-12);

/// Single-mode Gaussian QFIM with mean- and covariance-encoded parameters.
Mat qfim_gaussian(const Vec& mean, const Mat& cov, const std::vector<Vec>& dmean_list,
                  const std::vector<Mat>& dcov_list);

/// Symplectic eigenvalues (ascending). Vacuum gives M copies of 1/2.
Vec symplectic_eigenvalues(const Mat& cov);

/// Williamson normal form: cov = S diag(nu_1,nu_1,...,nu_M,nu_M) S^T with
/// S symplectic in the (x1,p1,...) ordering. Internal building block for
/// qfi_covariance_multimode.
struct WilliamsonForm {
    Vec nu; // length M
    Mat s;  // 2M x 2M symplectic
};
WilliamsonForm williamson(const Mat& cov);

/// Permutation helpers between (x1,p1,...,xM,pM) and (x1..xM,p1..pM).
Mat to_xxpp(const Mat& paired);
Mat from_xxpp(const Mat& xxpp);

/// Asymptotic small-signal test for the Rayleigh curse: not cursed iff some
/// symplectic eigenvalue fits 1/2 + k sigma^2 with k > 0 (log-log slope
/// 2 +- 0.05 and the track approaching 1/2).
struct CurseDiagnostic {
    bool cursed = true;
    std::optional<double> fitted_k;
    bool indeterminate = false;
};
CurseDiagnostic rayleigh_curse_diagnostic(const std::function<Mat(double)>& cov_of_sigma,
                                          const Vec& sigma_grid);

} // namespace qnm::gaussian
