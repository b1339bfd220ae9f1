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
#include <string>
#include <vector>

#include "qnm/channels.hpp"
#include "qnm/fock.hpp"
#include "qnm/types.hpp"

namespace qnm::fisher {

enum class DerivativeMethod { Analytic, CentralDiff };

/// Fisher-information value with its numerical provenance.
struct FisherResult {
    double value = 0.0;
    DerivativeMethod derivative_method = DerivativeMethod::Analytic;
    double central_diff_step = 0.0;
    double eigen_cutoff = 1e-12;
    double leakage = 0.0;
    int dim = 0;
    bool flagged = false; // leakage above 1e-4 or ill-separated spectrum
    // Cutoff sensitivity: the same sum at 1e-10 and 1e-14.
    double value_cutoff_1e10 = 0.0;
    double value_cutoff_1e14 = 0.0;
};

/// POVM as a list of PSD effects summing to identity within 1e-9.
struct Povm {
    std::vector<CMat> effects;
    void validate() const;
};
Povm number_povm(const fock::TruncatedSpace& space);

/// Spectral QFI: sum over eigenpairs with p_j + p_k > eigen_cutoff of
/// 2 |<phi_j| drho |phi_k>|^2 / (p_j + p_k).
FisherResult qfi_spectral(const fock::DensityMatrix& rho, const CMat& drho,
                          double eigen_cutoff = 1e-12);

/// Symmetric logarithmic derivative: (1/2){L, rho} reconstructs drho on the
/// retained support.
CMat sld(const fock::DensityMatrix& rho, const CMat& drho, double eigen_cutoff = 1e-12);

/// Multi-parameter QFIM, (1/2) tr(rho {L_i, L_j}).
Mat qfim(const fock::DensityMatrix& rho, const std::vector<CMat>& drho_list,
         double eigen_cutoff = 1e-12);

/// Im tr(rho [L_i, L_j]) entries; all ~0 means the QCRB is saturable.
Mat weak_commutativity(const fock::DensityMatrix& rho, const std::vector<CMat>& sld_list);

/// Classical FI of a POVM: sum (dp_i)^2 / p_i, dropping terms with
/// p_i < 1e-14 and |dp_i| < 1e-14.
double cfi_povm(const Povm& povm, const fock::DensityMatrix& rho, const CMat& drho);
Mat cfim_povm(const Povm& povm, const fock::DensityMatrix& rho, const std::vector<CMat>& drho_list);

struct HomodyneGrid {
    double x_min = 0.0, x_max = 0.0; // auto from moments if x_min == x_max
    int points = 801;
};
/// Homodyne CFI at the given quadrature angle (0 = x, pi/2 = p) computed from
/// position-basis densities on a trapezoid grid.
double cfi_homodyne(const fock::DensityMatrix& rho, const CMat& drho, double angle,
                    const HomodyneGrid& grid = {});

/// Small-signal limit 4 <H Pi_perp H> where Pi_perp projects onto the null
/// space of rho_pre (eigenvalues below rank_cutoff).
FisherResult small_signal_qfi(const fock::DensityMatrix& rho_pre, const CMat& generator,
                              double rank_cutoff = 1e-10);
/// Multiple jump operators sharing a rate: 4 T sum_j <Y_j^dag Pi_perp Y_j>.
FisherResult small_signal_qfi_multi(const fock::DensityMatrix& rho_pre,
                                    const std::vector<CMat>& jump_ops, double total_time = 1.0,
                                    double rank_cutoff = 1e-10);

/// d rho / d sigma for a sigma-parametrized channel family.
/// Analytic: node-weight derivative of the Gauss-Hermite realization of the
/// random-displacement channel (axis P or X). CentralDiff: symmetric
/// difference of the family at sigma +- h with a roundoff detector.
CMat drho_encoding(const CMat& rho_in, double sigma, channels::DisplacementAxis axis,
                   const fock::TruncatedSpace& space, int quad_nodes = 41);
CMat drho_central(const std::function<channels::Channel(double)>& family, const CMat& rho_in,
                  double sigma, double h = 1e-4);

/// rho(sigma) and d rho/d sigma for a pure input followed by loss and the
/// random-displacement encoding, exploiting the low rank of the lossy state.
/// Covers the 1D (axis P) and isotropic 2D encodings.
struct EncodedState {
    fock::DensityMatrix rho;
    CMat drho;
    double leakage = 0.0;
};
EncodedState encode_lossy_pure(const fock::PureState& psi, double eta, double sigma,
                               channels::DisplacementAxis axis, int quad_nodes = 41);

/// Projectors onto the SLD eigenbasis (the optimal single-parameter POVM).
Povm sld_eigenbasis_povm(const fock::DensityMatrix& rho, const CMat& drho,
                         double eigen_cutoff = 1e-12);

} // namespace qnm::fisher
