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

#include "qnm/gaussian.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "qnm/bounds.hpp"

namespace qnm::gaussian {

namespace {

Mat omega_paired(int num_modes) {
    Mat w = Mat::Zero(2 * num_modes, 2 * num_modes);
    for (int i = 0; i < num_modes; ++i) {
        w(2 * i, 2 * i + 1) = 1.0;
        w(2 * i + 1, 2 * i) = -1.0;
    }
    return w;
}

Mat sym_sqrt(const Mat& a) {
    Eigen::SelfAdjointEigenSolver<Mat> es(a);
    Vec ev = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

void check_mode(int mode, int num_modes) {
    if (mode < 0 || mode >= num_modes)
        throw std::out_of_range("gaussian: mode index out of range");
}

} // namespace

void GaussianState::validate() const {
    if (num_modes < 1 || mean.size() != 2 * num_modes || cov.rows() != 2 * num_modes ||
        cov.cols() != 2 * num_modes)
        throw std::invalid_argument("GaussianState: inconsistent dimensions");
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("GaussianState: covariance not symmetric");
    const Vec nu = symplectic_eigenvalues(cov);
    if (nu.minCoeff() < 0.5 - 1e-9)
        throw std::invalid_argument("GaussianState: uncertainty principle violated");
}

double GaussianState::purity() const {
    return 1.0 / std::sqrt((2.0 * cov).determinant());
}

void GaussianNoiseConfig::validate() const {
    if (!(eta >= 0.0 && eta < 1.0)) throw std::invalid_argument("GaussianNoiseConfig: eta");
    if (!(eta_a >= 0.0 && eta_a < 1.0)) throw std::invalid_argument("GaussianNoiseConfig: eta_a");
    if (!(sigma_x >= 0.0)) throw std::invalid_argument("GaussianNoiseConfig: sigma_x");
    if (!(sigma_p >= 0.0)) throw std::invalid_argument("GaussianNoiseConfig: sigma_p");
}

GaussianState make_vacuum(int num_modes) {
    GaussianState s;
    s.num_modes = num_modes;
    s.mean = Vec::Zero(2 * num_modes);
    s.cov = 0.5 * Mat::Identity(2 * num_modes, 2 * num_modes);
    return s;
}

GaussianState make_coherent(Complex alpha) {
    GaussianState s = make_vacuum(1);
    s.mean(0) = std::sqrt(2.0) * alpha.real();
    s.mean(1) = std::sqrt(2.0) * alpha.imag();
    return s;
}

GaussianState make_smsv(double n) {
    if (!(n >= 0.0)) throw std::invalid_argument("make_smsv: N must be >= 0");
    const double xi = bounds::xi_n(n);
    GaussianState s = make_vacuum(1);
    s.cov(0, 0) = xi;
    s.cov(1, 1) = 0.25 / xi;
    return s;
}

GaussianState make_gaussian(const std::string& kind, const std::map<std::string, double>& params) {
    auto get = [&](const char* key, std::optional<double> fallback = {}) {
        auto it = params.find(key);
        if (it != params.end()) return it->second;
        if (fallback) return *fallback;
        throw std::invalid_argument(std::string("make_gaussian: missing parameter ") + key);
    };
    if (kind == "vacuum") return make_vacuum();
    if (kind == "coherent") return make_coherent(Complex(get("alpha_re"), get("alpha_im", 0.0)));
    if (kind == "smsv") return make_smsv(get("N"));
    if (kind == "tmsv") return make_tmsv(get("N"));
    throw std::invalid_argument("make_gaussian: unknown kind " + kind);
}

GaussianState make_tmsv(double n) {
    if (!(n >= 0.0)) throw std::invalid_argument("make_tmsv: N must be >= 0");
    GaussianState s = make_vacuum(2);
    const double nu = n + 0.5;
    const double c = std::sqrt(n * (n + 1.0));
    s.cov.diagonal().setConstant(nu);
    s.cov(0, 2) = s.cov(2, 0) = c;  // x1 x2
    s.cov(1, 3) = s.cov(3, 1) = -c; // p1 p2
    return s;
}

ChannelSpec loss(double eta, int mode) {
    if (!(eta >= 0.0 && eta < 1.0)) throw std::invalid_argument("loss: eta must be in [0,1)");
    ChannelSpec c;
    c.kind = ChannelKind::Loss;
    c.eta = eta;
    c.mode = mode;
    return c;
}

ChannelSpec classical_noise(const Mat& sigma_c) {
    Eigen::SelfAdjointEigenSolver<Mat> es(sigma_c);
    if (es.eigenvalues().minCoeff() < -1e-12)
        throw std::invalid_argument("classical_noise: Sigma_C not positive semi-definite");
    ChannelSpec c;
    c.kind = ChannelKind::ClassicalNoise;
    c.sigma_c = sigma_c;
    return c;
}

ChannelSpec encode_1d(double sigma, int mode) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("encode_1d: sigma must be >= 0");
    ChannelSpec c;
    c.kind = ChannelKind::Encode1D;
    c.sigma = sigma;
    c.mode = mode;
    return c;
}

ChannelSpec encode_2d(double sigma, int mode) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("encode_2d: sigma must be >= 0");
    ChannelSpec c;
    c.kind = ChannelKind::Encode2D;
    c.sigma = sigma;
    c.mode = mode;
    return c;
}

ChannelSpec squeeze(double r, int mode) {
    ChannelSpec c;
    c.kind = ChannelKind::Squeeze;
    c.r = r;
    c.mode = mode;
    return c;
}

ChannelSpec displace(const Vec& v) {
    ChannelSpec c;
    c.kind = ChannelKind::Displace;
    c.displacement = v;
    return c;
}

GaussianState apply_gaussian_channel(const GaussianState& state, const ChannelSpec& channel) {
    GaussianState out = state;
    const int m = state.num_modes;
    switch (channel.kind) {
        case ChannelKind::Loss: {
            check_mode(channel.mode, m);
            const double t = std::sqrt(1.0 - channel.eta);
            Vec scale = Vec::Ones(2 * m);
            scale(2 * channel.mode) = t;
            scale(2 * channel.mode + 1) = t;
            out.mean = scale.asDiagonal() * state.mean;
            out.cov = scale.asDiagonal() * state.cov * scale.asDiagonal();
            out.cov(2 * channel.mode, 2 * channel.mode) += channel.eta * 0.5;
            out.cov(2 * channel.mode + 1, 2 * channel.mode + 1) += channel.eta * 0.5;
            break;
        }
        case ChannelKind::ClassicalNoise: {
            if (channel.sigma_c.rows() != 2 * m)
                throw std::invalid_argument("classical_noise: Sigma_C dimension mismatch");
            out.cov = state.cov + channel.sigma_c;
            break;
        }
        case ChannelKind::Encode1D: {
            check_mode(channel.mode, m);
            out.cov(2 * channel.mode + 1, 2 * channel.mode + 1) += channel.sigma * channel.sigma;
            break;
        }
        case ChannelKind::Encode2D: {
            check_mode(channel.mode, m);
            out.cov(2 * channel.mode, 2 * channel.mode) += channel.sigma * channel.sigma;
            out.cov(2 * channel.mode + 1, 2 * channel.mode + 1) += channel.sigma * channel.sigma;
            break;
        }
        case ChannelKind::Squeeze: {
            check_mode(channel.mode, m);
            Vec scale = Vec::Ones(2 * m);
            scale(2 * channel.mode) = std::exp(-channel.r);
            scale(2 * channel.mode + 1) = std::exp(channel.r);
            out.mean = scale.asDiagonal() * state.mean;
            out.cov = scale.asDiagonal() * state.cov * scale.asDiagonal();
            break;
        }
        case ChannelKind::Displace: {
            if (channel.displacement.size() != 2 * m)
                throw std::invalid_argument("displace: vector dimension mismatch");
            out.mean = state.mean + channel.displacement;
            break;
        }
    }
    return out;
}

GaussianState apply_noise(const GaussianState& state, const GaussianNoiseConfig& config) {
    config.validate();
    GaussianState out = state;
    if (config.eta > 0.0) out = apply_gaussian_channel(out, loss(config.eta, 0));
    if (config.eta_a > 0.0 && state.num_modes > 1)
        out = apply_gaussian_channel(out, loss(config.eta_a, 1));
    if (config.sigma_x > 0.0 || config.sigma_p > 0.0) {
        Mat sc = Mat::Zero(2 * state.num_modes, 2 * state.num_modes);
        sc(0, 0) = config.sigma_x * config.sigma_x;
        sc(1, 1) = config.sigma_p * config.sigma_p;
        out = apply_gaussian_channel(out, classical_noise(sc));
    }
    return out;
}

double qfi_covariance(const Mat& cov, const Mat& dcov) {
    if (cov.rows() != 2 || cov.cols() != 2 || dcov.rows() != 2 || dcov.cols() != 2)
        throw std::invalid_argument("qfi_covariance: expects single-mode 2x2 matrices");
    const double det = cov.determinant();
    if (!(det > 0.0)) throw std::invalid_argument("qfi_covariance: singular covariance");
    const Mat inv_d = cov.inverse() * dcov;
    const double g = 1.0 / (2.0 * std::sqrt(det));
    const double dg = -0.5 * g * inv_d.trace(); // Jacobi's formula
    double value = (inv_d * inv_d).trace() / (2.0 * (1.0 + g * g));
    const double pure_gap = 1.0 - g * g * g * g;
    if (pure_gap > 1e-14) {
        value += 2.0 * dg * dg / pure_gap;
    } else if (std::abs(dg) > 1e-12) {
        throw std::invalid_argument("qfi_covariance: purity derivative nonzero at a pure state");
    }
    return value;
}

Vec symplectic_eigenvalues(const Mat& cov) {
    const int n2 = static_cast<int>(cov.rows());
    if (n2 % 2 != 0 || cov.cols() != n2)
        throw std::invalid_argument("symplectic_eigenvalues: need even square matrix");
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, cov.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("symplectic_eigenvalues: matrix not symmetric");
    const Mat m = omega_paired(n2 / 2) * cov;
    Eigen::EigenSolver<Mat> es(m);
    std::vector<double> mags;
    for (int i = 0; i < n2; ++i) {
        const double im = es.eigenvalues()(i).imag();
        if (im > 0.0) mags.push_back(im);
    }
    std::sort(mags.begin(), mags.end());
    Vec out(static_cast<int>(mags.size()));
    for (size_t i = 0; i < mags.size(); ++i) out(static_cast<int>(i)) = mags[i];
    return out;
}

WilliamsonForm williamson(const Mat& cov) {
    const int n2 = static_cast<int>(cov.rows());
    const int m = n2 / 2;
    const Mat half = sym_sqrt(cov);
    const Mat k = half * omega_paired(m) * half; // antisymmetric
    Eigen::RealSchur<Mat> schur(k);
    Mat t = schur.matrixT();
    Mat u = schur.matrixU();
    WilliamsonForm out;
    out.nu = Vec(m);
    for (int i = 0; i < m; ++i) {
        double nu = 0.5 * (t(2 * i, 2 * i + 1) - t(2 * i + 1, 2 * i));
        if (nu < 0.0) {
            u.col(2 * i).swap(u.col(2 * i + 1));
            nu = -nu;
        }
        if (!(nu > 0.0)) throw std::invalid_argument("williamson: singular covariance");
        out.nu(i) = nu;
    }
    Vec inv_sqrt(n2);
    for (int i = 0; i < m; ++i) {
        inv_sqrt(2 * i) = 1.0 / std::sqrt(out.nu(i));
        inv_sqrt(2 * i + 1) = inv_sqrt(2 * i);
    }
    out.s = half * u * inv_sqrt.asDiagonal();
    return out;
}

Mat to_xxpp(const Mat& paired) {
    const int n2 = static_cast<int>(paired.rows());
    const int m = n2 / 2;
    Mat out(n2, n2);
    std::vector<int> idx(n2);
    for (int i = 0; i < m; ++i) {
        idx[i] = 2 * i;
        idx[m + i] = 2 * i + 1;
    }
    for (int r = 0; r < n2; ++r)
        for (int c = 0; c < n2; ++c) out(r, c) = paired(idx[r], idx[c]);
    return out;
}

Mat from_xxpp(const Mat& xxpp) {
    const int n2 = static_cast<int>(xxpp.rows());
    const int m = n2 / 2;
    Mat out(n2, n2);
    for (int r = 0; r < n2; ++r)
        for (int c = 0; c < n2; ++c) {
            const int rp = (r < m) ? 2 * r : 2 * (r - m) + 1;
            const int cp = (c < m) ? 2 * c : 2 * (c - m) + 1;
            out(rp, cp) = xxpp(r, c);
        }
    return out;
}

double qfi_covariance_multimode(const Mat& cov, const Mat& dcov, double pinv_cutoff) {
    const int n2 = static_cast<int>(cov.rows());
    if (n2 % 2 != 0 || cov.cols() != n2 || dcov.rows() != n2 || dcov.cols() != n2)
        throw std::invalid_argument("qfi_covariance_multimode: dimension mismatch");
    const int m = n2 / 2;
    const WilliamsonForm w = williamson(cov);
    const Mat s_inv = w.s.inverse();
    const Mat b = s_inv * dcov * s_inv.transpose();
    // The Kronecker kernel 4 S (x) S - w (x) w acts on matrices as
    // Y -> 4 S Y S + w Y w; in the Williamson basis it decouples into 2x2
    // mode-pair blocks with eigenchannels f +- 1, f = 4 nu_i nu_j. The f - 1
    // channel is singular for a pure-pure mode pair and is dropped in
    // pseudo-inverse style.
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const double f = 4.0 * w.nu(i) * w.nu(j);
            const double bxx = b(2 * i, 2 * j), bxp = b(2 * i, 2 * j + 1);
            const double bpx = b(2 * i + 1, 2 * j), bpp = b(2 * i + 1, 2 * j + 1);
            double contrib = (bxx - bpp) * (bxx - bpp) / (2.0 * (f + 1.0)) +
                             (bxp + bpx) * (bxp + bpx) / (2.0 * (f + 1.0));
            if (std::abs(f - 1.0) > pinv_cutoff) {
                contrib += (bxx + bpp) * (bxx + bpp) / (2.0 * (f - 1.0)) +
                           (bxp - bpx) * (bxp - bpx) / (2.0 * (f - 1.0));
            }
            total += contrib;
        }
    }
    return 2.0 * total;
}

Mat qfim_gaussian(const Vec& mean, const Mat& cov, const std::vector<Vec>& dmean_list,
                  const std::vector<Mat>& dcov_list) {
    if (dmean_list.empty() || dmean_list.size() != dcov_list.size())
        throw std::invalid_argument("qfim_gaussian: parameter lists empty or mismatched");
    if (mean.size() != 2 || cov.rows() != 2)
        throw std::invalid_argument("qfim_gaussian: single-mode only");
    const int np = static_cast<int>(dmean_list.size());
    const double det = cov.determinant();
    if (!(det > 0.0)) throw std::invalid_argument("qfim_gaussian: singular covariance");
    const Mat cov_inv = cov.inverse();
    const double g = 1.0 / (2.0 * std::sqrt(det));
    Vec dg(np);
    std::vector<Mat> inv_d(np);
    for (int a = 0; a < np; ++a) {
        if (dmean_list[a].size() != 2 || dcov_list[a].rows() != 2)
            throw std::invalid_argument("qfim_gaussian: derivative dimension mismatch");
        inv_d[a] = cov_inv * dcov_list[a];
        dg(a) = -0.5 * g * inv_d[a].trace();
    }
    const double pure_gap = 1.0 - g * g * g * g;
    Mat out(np, np);
    for (int a = 0; a < np; ++a) {
        for (int c = a; c < np; ++c) {
            double v = (inv_d[a] * inv_d[c]).trace() / (2.0 * (1.0 + g * g));
            if (pure_gap > 1e-14) v += 2.0 * dg(a) * dg(c) / pure_gap;
            v += dmean_list[a].dot(cov_inv * dmean_list[c]);
            out(a, c) = v;
            out(c, a) = v;
        }
    }
    return out;
}

CurseDiagnostic rayleigh_curse_diagnostic(const std::function<Mat(double)>& cov_of_sigma,
                                          const Vec& sigma_grid) {
    CurseDiagnostic out;
    const int n = static_cast<int>(sigma_grid.size());
    if (n < 4) throw std::invalid_argument("rayleigh_curse_diagnostic: need >= 4 grid points");
    Vec s = sigma_grid;
    std::sort(s.data(), s.data() + n);
    if (!(s(0) > 0.0) || s(n - 1) / s(0) < 10.0)
        throw std::invalid_argument("rayleigh_curse_diagnostic: grid must span >= one decade of sigma > 0");
    Vec excess(n);
    for (int i = 0; i < n; ++i) {
        const Vec nu = symplectic_eigenvalues(cov_of_sigma(s(i)));
        excess(i) = nu.minCoeff() - 0.5;
    }
    // The eigenvalue track must approach 1/2 for the curse to be avoided.
    if (excess(0) > 1e-3) {
        out.cursed = true;
        return out;
    }
    for (int i = 0; i < n; ++i) {
        if (excess(i) <= 0.0) {
            out.indeterminate = true;
            return out;
        }
        if (i > 0 && excess(i) < excess(i - 1)) {
            out.indeterminate = true; // non-monotone track
            return out;
        }
    }
    // Least squares on log(nu - 1/2) = log k + slope * log sigma.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double lx = std::log(s(i)), ly = std::log(excess(i));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double logk = (sy - slope * sx) / n;
    const double k = std::exp(logk);
    // Residual check: the fit must actually describe the track.
    double max_res = 0.0;
    for (int i = 0; i < n; ++i)
        max_res = std::max(max_res, std::abs(std::log(excess(i)) - (logk + slope * std::log(s(i)))));
    if (max_res > 0.5) {
        out.indeterminate = true;
        return out;
    }
    // Intercept condition: extrapolated eigenvalue reaches 1/2 within 1e-6.
    const double extrapolated_gap = k * std::pow(s(0) / 10.0, slope);
    if (std::abs(slope - 2.0) <= 0.05 && k > 0.0 && extrapolated_gap < 1e-6 + 0.05 * excess(0)) {
        out.cursed = false;
        out.fitted_k = k;
    } else {
        out.cursed = true;
    }
    return out;
}

} // namespace qnm::gaussian
