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

#include "qnm/types.hpp"

namespace qnm::fock {

/// Truncated single-mode Fock space spanned by |0> ... |dim-1>.
struct TruncatedSpace {
    int dim = 2;
    TruncatedSpace() = default;
    explicit TruncatedSpace(int d);
};

/// Pure state on dim^num_modes amplitudes (num_modes is 1, or 2 for TMSV).
struct PureState {
    TruncatedSpace space;
    int num_modes = 1;
    CVec amplitudes;
    void validate() const; // unit norm within 1e-10
};

struct DensityMatrix {
    TruncatedSpace space;
    CMat matrix;
    /// Hermitian within 1e-10, eigenvalues >= -1e-10, trace in [1 - leakage_tol, 1].
    void validate(double leakage_tol = 1e-4) const;
    [[nodiscard]] double leakage() const; // 1 - trace
};

DensityMatrix to_density(const PureState& psi);

struct Operators {
    CMat annihilate; // <n-1|a|n> = sqrt(n)
    CMat create;
    CMat position; // x = (a + a^dag)/sqrt(2), vacuum Var(x) = 1/2
    CMat momentum; // p = (a - a^dag)/(i sqrt(2))
    CMat number;
};
Operators operators(const TruncatedSpace& space);

/// Real tridiagonal position operator, handy for fast channel application.
Mat position_real(const TruncatedSpace& space);

// State constructors. All return unit-norm states and throw if the
// amplitude tail beyond the cutoff would exceed 1e-8 in probability.
PureState fock_state(int n, const TruncatedSpace& space);
PureState coherent_state(Complex alpha, const TruncatedSpace& space);
/// Mean occupation N, anti-squeezed in x: Var(x) = xi_N.
PureState smsv_state(double n, const TruncatedSpace& space);
/// Even cat (|alpha> + |-alpha>)/norm.
PureState cat_state(Complex alpha, const TruncatedSpace& space);
/// Finite-energy grid state: Gaussian-windowed superposition of displaced
/// squeezed peaks (spacing 2 sqrt(pi), peak count 2J+1 with
/// 2 pi Delta^2 J^2 >= 20). Built in the position basis from
/// Hermite-function wavefunctions sampled by Gauss-Hermite quadrature.
PureState gkp_delta_state(double delta, const TruncatedSpace& space);
/// |psi> = sum_k c_k |m k>; requires m (K-1) < dim.
PureState sparse_state(int spacing, const CVec& coeffs, const TruncatedSpace& space);
/// Two-mode squeezed vacuum as a dim^2 product-basis vector, N per mode.
PureState tmsv_state(double n, const TruncatedSpace& space);

/// Dispatch by kind name for the CLI: fock|coherent|smsv|cat|gkp_delta|sparse|tmsv.
/// Numeric parameters: n, alpha_re, alpha_im, N, delta, spacing.
PureState make_state(const std::string& kind, const std::map<std::string, double>& params,
                     const TruncatedSpace& space);

double mean_number(const PureState& psi);
double mean_number(const DensityMatrix& rho);

/// Displacement unitary exp(alpha a^dag - alpha^* a) on the truncated space.
/// Throws if applying it to the vacuum leaks more than 1e-6 out of the
/// retained block.
CMat displacement(Complex alpha, const TruncatedSpace& space);
/// Squeezing unitary exp(r (a^2 - a^dag^2)/2); r > 0 squeezes x
/// (Var x -> e^{-2r}/2 on vacuum).
CMat squeeze(double r, const TruncatedSpace& space);

/// psi_n(x) for n = 0..nmax-1 on the given grid (vacuum Var(x) = 1/2
/// convention); row n holds psi_n.
Mat position_wavefunctions(int nmax, const Vec& x);

/// JSON interchange: amplitudes as arrays of (re, im) pairs.
std::string state_to_json(const PureState& psi);
PureState state_from_json(const std::string& text);

} // namespace qnm::fock
