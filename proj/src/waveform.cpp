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

#include "qnm/waveform.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace qnm::waveform {

void WaveformModel::validate(const Vec& theta) const {
    if (omega.size() == 0 || omega.size() != gain.size())
        throw std::invalid_argument("WaveformModel: grid/gain size mismatch");
    if (gain.minCoeff() < 0.0) throw std::invalid_argument("WaveformModel: negative gain");
    if (!s_yy) throw std::invalid_argument("WaveformModel: missing S_yy");
    for (int j = 0; j < omega.size(); ++j)
        if (s_yy(omega(j), theta) < 0.0)
            throw std::invalid_argument("WaveformModel: negative S_yy on the grid");
}

WaveformModel tabulated_model(const Vec& omega, const Vec& gain, const Vec& s_values) {
    if (omega.size() != s_values.size())
        throw std::invalid_argument("tabulated_model: table size mismatch");
    WaveformModel m;
    m.omega = omega;
    m.gain = gain;
    Vec om = omega, sv = s_values;
    m.s_yy = [om, sv](double w, const Vec& theta) {
        const double scale = theta.size() > 0 ? theta(0) : 1.0;
        if (w <= om(0)) return scale * sv(0);
        if (w >= om(om.size() - 1)) return scale * sv(sv.size() - 1);
        int lo = 0;
        while (om(lo + 1) < w) ++lo;
        const double t = (w - om(lo)) / (om(lo + 1) - om(lo));
        return scale * ((1.0 - t) * sv(lo) + t * sv(lo + 1));
    };
    m.ds_yy_dtheta = [om, sv, base = m.s_yy](double w, const Vec& theta) {
        Vec g = Vec::Zero(theta.size());
        if (theta.size() > 0) g(0) = base(w, (Vec(1) << 1.0).finished());
        return g;
    };
    return m;
}

double synthetic_geontropic_phi(double omega) {
    // Smooth dimensionless bump; placeholder shape, not a fiducial spectrum.
    const double w = omega;
    return w * w / (1.0 + w * w * w * w);
}

WaveformModel geontropic_model(const Vec& omega, const Vec& gain) {
    WaveformModel m;
    m.omega = omega;
    m.gain = gain;
    m.s_yy = [](double w, const Vec& theta) { return theta(0) * synthetic_geontropic_phi(w); };
    m.ds_yy_dtheta = [](double w, const Vec& theta) {
        Vec g(theta.size());
        g(0) = synthetic_geontropic_phi(w);
        return g;
    };
    return m;
}

double sigma_at(const WaveformModel& model, double omega, const Vec& theta) {
    int j = -1;
    for (int i = 0; i < model.omega.size(); ++i)
        if (std::abs(model.omega(i) - omega) < 1e-12) {
            j = i;
            break;
        }
    if (j < 0) throw std::invalid_argument("sigma_at: omega not on the grid");
    const double s = model.s_yy(omega, theta);
    return std::sqrt(model.gain(j) * s);
}

double qfi_psd(double gain, double s_yy, double qfi_sigma) {
    const double s2 = gain * s_yy; // sigma^2
    if (!(s2 > 0.0)) throw std::invalid_argument("qfi_psd: sigma = 0; use qfi_psd_from_variance");
    return gain * gain / (2.0 * s2) * qfi_sigma;
}

double qfi_psd_from_variance(double gain, double qfi_variance) {
    return 2.0 * gain * gain * qfi_variance;
}

double qfi_psd_vacuum(double gain, double s_yy) {
    if (!(s_yy > 0.0)) throw std::invalid_argument("qfi_psd_vacuum: S_yy must be > 0");
    return gain / (s_yy * (1.0 + gain * s_yy));
}

Mat qfim_psd_params(const WaveformModel& model, const Vec& theta, const Vec& per_frequency_qfi) {
    model.validate(theta);
    if (per_frequency_qfi.size() != model.omega.size())
        throw std::invalid_argument("qfim_psd_params: per-frequency QFI size mismatch");
    const int np = static_cast<int>(theta.size());
    Mat out = Mat::Zero(np, np);
    for (int k = 0; k < model.omega.size(); ++k) {
        Vec grad(np);
        if (model.ds_yy_dtheta) {
            grad = model.ds_yy_dtheta(model.omega(k), theta);
        } else {
            for (int i = 0; i < np; ++i) {
                Vec tp = theta, tm = theta;
                const double h = 1e-6 * std::max(1.0, std::abs(theta(i)));
                tp(i) += h;
                tm(i) -= h;
                grad(i) = (model.s_yy(model.omega(k), tp) - model.s_yy(model.omega(k), tm)) / (2.0 * h);
            }
        }
        out += per_frequency_qfi(k) * grad * grad.transpose();
    }
    return out;
}

Mat TemporalBasis::gram() const {
    Mat g = modes * modes.transpose() * dt;
    return g;
}

TemporalBasis build_quadrature_basis(const Vec& frequencies, const Vec& time_grid) {
    const int nt = static_cast<int>(time_grid.size());
    if (nt < 8) throw std::invalid_argument("build_quadrature_basis: time grid too short");
    const double dt = time_grid(1) - time_grid(0);
    const double t_total = time_grid(nt - 1) - time_grid(0);
    TemporalBasis basis;
    basis.times = time_grid;
    basis.dt = dt;
    basis.modes = Mat(2 * frequencies.size(), nt);
    for (int j = 0; j < frequencies.size(); ++j) {
        const double w = frequencies(j);
        if (w * dt > kPi / 2.0)
            throw std::invalid_argument("build_quadrature_basis: grid under-sampled (aliasing)");
        if (w * t_total < 10.0 * 2.0 * kPi)
            throw std::invalid_argument("build_quadrature_basis: fewer than 10 periods in the window");
        for (int i = 0; i < nt; ++i) {
            basis.modes(2 * j, i) = std::cos(w * time_grid(i));
            basis.modes(2 * j + 1, i) = std::sin(w * time_grid(i));
        }
    }
    for (int r = 0; r < basis.modes.rows(); ++r) {
        const double nrm = std::sqrt(basis.modes.row(r).squaredNorm() * dt);
        basis.modes.row(r) /= nrm;
    }
    return basis;
}

KlModes kl_modes(const Mat& kernel, double dt, int count) {
    if (kernel.rows() != kernel.cols())
        throw std::invalid_argument("kl_modes: kernel must be square");
    if ((kernel - kernel.transpose()).cwiseAbs().maxCoeff() >
        1e-10 * std::max(1.0, kernel.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("kl_modes: kernel must be symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(kernel * dt);
    const int n = static_cast<int>(kernel.rows());
    count = std::min(count, n);
    KlModes out;
    out.sigmas = Vec(count);
    out.modes = Mat(count, n);
    for (int i = 0; i < count; ++i) {
        const double ev = es.eigenvalues()(n - 1 - i);
        out.sigmas(i) = std::sqrt(std::max(0.0, ev));
        out.modes.row(i) = es.eigenvectors().col(n - 1 - i).transpose() / std::sqrt(dt);
    }
    return out;
}

} // namespace qnm::waveform
