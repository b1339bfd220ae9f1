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
#include <vector>

#include "qnm/types.hpp"

namespace qnm::waveform {

/// Per-frequency description of a linear device coupled to a stationary
/// random process: gain G(Omega) = |chi_{pi/2}(Omega)|^2 / 2 and the
/// parametrized spectral density S_yy(Omega | theta).
struct WaveformModel {
    Vec omega;                                                  // frequency grid
    Vec gain;                                                   // G(Omega_j) >= 0
    std::function<double(double, const Vec&)> s_yy;             // S_yy(Omega, theta) >= 0
    std::function<Vec(double, const Vec&)> ds_yy_dtheta = {};   // optional analytic gradient
    void validate(const Vec& theta) const;
};

/// Tabulated S_yy with linear interpolation; values scaled by theta(0).
WaveformModel tabulated_model(const Vec& omega, const Vec& gain, const Vec& s_values);

/// Synthetic stand-in spectrum for the scale-factor estimation example.
/// Not a fiducial astrophysical template; shape only.
double synthetic_geontropic_phi(double omega);
WaveformModel geontropic_model(const Vec& omega, const Vec& gain);

/// sigma(Omega, theta) = sqrt(G S_yy).
double sigma_at(const WaveformModel& model, double omega, const Vec& theta);

/// QFI with respect to S_yy at one frequency from the QFI with respect to
/// sigma: G^2/(2 sigma^2) * I(sigma), the factor 2 covering the independent
/// real and imaginary mode pair.
double qfi_psd(double gain, double s_yy, double qfi_sigma);
/// Same limit expressed through the variance form I(sigma^2) = I(sigma)/(4 sigma^2),
/// usable at sigma = 0 when the variance-form limit is finite.
double qfi_psd_from_variance(double gain, double qfi_variance);
/// Vacuum input closed form G / (S (1 + G S)).
double qfi_psd_vacuum(double gain, double s_yy);

/// Parameter QFIM over the grid: sum_k I[S(Omega_k)] dS/dtheta_i dS/dtheta_j.
/// per_frequency_qfi holds I[S_yy(Omega_k)]; derivatives come from the model
/// (analytic if provided, else central differences on theta).
Mat qfim_psd_params(const WaveformModel& model, const Vec& theta, const Vec& per_frequency_qfi);

/// Orthonormal temporal modes on a time grid.
struct TemporalBasis {
    Mat modes;   // rows = basis functions sampled on the grid
    Vec times;
    double dt = 0.0;
    [[nodiscard]] Mat gram() const;
};

/// cos/sin quadrature pair per positive frequency, normalized on [0, T].
/// Warns (throws) on aliasing when the grid has fewer than 4 points per
/// period.
TemporalBasis build_quadrature_basis(const Vec& frequencies, const Vec& time_grid);

/// Karhunen-Loeve modes of a symmetric correlation kernel sampled on a time
/// grid: eigenpairs of H dt with sigma_k = sqrt(eigenvalue).
struct KlModes {
    Vec sigmas;
    Mat modes; // rows orthonormal w.r.t. the grid inner product
};
KlModes kl_modes(const Mat& kernel, double dt, int count);

} // namespace qnm::waveform
