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

#include "qnm/fock.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "qnm/bounds.hpp"
#include "qnm/quadrature.hpp"

namespace qnm::fock {

namespace {

constexpr double kTailTol = 1e-8;

void check_tail(const CVec& amps, const char* what) {
    const int d = static_cast<int>(amps.size());
    const int guard = std::max(2, d / 50);
    double tail = 0.0;
    for (int i = d - guard; i < d; ++i) tail += std::norm(amps(i));
    if (tail > kTailTol)
        throw std::invalid_argument(std::string(what) +
                                    ": amplitude support exceeds the cutoff; increase dim");
}

CVec normalized(CVec v) {
    const double n = v.norm();
    if (!(n > 0.0)) throw std::invalid_argument("fock: zero-norm state");
    return v / n;
}

/// exp(i H) for Hermitian H via eigendecomposition; exactly unitary.
CMat unitary_exp_i(const CMat& h) {
    Eigen::SelfAdjointEigenSolver<CMat> es(h);
    CVec phases(h.rows());
    for (int i = 0; i < h.rows(); ++i) phases(i) = std::exp(kI * es.eigenvalues()(i));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

void check_vacuum_leak(const CMat& u, const char* what) {
    const int d = static_cast<int>(u.rows());
    const int guard = std::max(2, d / 20);
    double leak = 0.0;
    for (int i = d - guard; i < d; ++i) leak += std::norm(u(i, 0));
    if (leak > 1e-6)
        throw std::invalid_argument(std::string(what) + ": leakage above tolerance at this dim");
}

} // namespace

TruncatedSpace::TruncatedSpace(int d) : dim(d) {
    if (d < 2) throw std::invalid_argument("TruncatedSpace: dim must be >= 2");
}

void PureState::validate() const {
    if (std::abs(amplitudes.norm() - 1.0) > 1e-10)
        throw std::invalid_argument("PureState: not normalized");
}

void DensityMatrix::validate(double leakage_tol) const {
    if (matrix.rows() != matrix.cols())
        throw std::invalid_argument("DensityMatrix: not square");
    const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
    if ((matrix - matrix.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw std::invalid_argument("DensityMatrix: not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMat> es(matrix);
    if (es.eigenvalues().minCoeff() < -1e-10)
        throw std::invalid_argument("DensityMatrix: negative eigenvalue");
    const double tr = matrix.trace().real();
    if (tr > 1.0 + 1e-10 || tr < 1.0 - leakage_tol)
        throw std::invalid_argument("DensityMatrix: trace outside [1 - leakage_tol, 1]");
}

double DensityMatrix::leakage() const { return 1.0 - matrix.trace().real(); }

DensityMatrix to_density(const PureState& psi) {
    if (psi.num_modes != 1)
        throw std::invalid_argument("to_density: single-mode states only");
    return DensityMatrix{psi.space, psi.amplitudes * psi.amplitudes.adjoint()};
}

Operators operators(const TruncatedSpace& space) {
    const int d = space.dim;
    Operators ops;
    ops.annihilate = CMat::Zero(d, d);
    for (int n = 1; n < d; ++n) ops.annihilate(n - 1, n) = std::sqrt(static_cast<double>(n));
    ops.create = ops.annihilate.adjoint();
    ops.position = (ops.annihilate + ops.create) / std::sqrt(2.0);
    ops.momentum = (ops.annihilate - ops.create) / (kI * std::sqrt(2.0));
    ops.number = CMat::Zero(d, d);
    for (int n = 0; n < d; ++n) ops.number(n, n) = n;
    return ops;
}

Mat position_real(const TruncatedSpace& space) {
    Mat x = Mat::Zero(space.dim, space.dim);
    for (int n = 0; n < space.dim - 1; ++n) {
        x(n, n + 1) = x(n + 1, n) = std::sqrt((n + 1) / 2.0);
    }
    return x;
}

PureState fock_state(int n, const TruncatedSpace& space) {
    if (n < 0 || n >= space.dim) throw std::invalid_argument("fock_state: n outside the cutoff");
    CVec v = CVec::Zero(space.dim);
    v(n) = 1.0;
    return PureState{space, 1, v};
}

PureState coherent_state(Complex alpha, const TruncatedSpace& space) {
    CVec v(space.dim);
    v(0) = std::exp(-0.5 * std::norm(alpha));
    for (int n = 1; n < space.dim; ++n) v(n) = v(n - 1) * alpha / std::sqrt(static_cast<double>(n));
    check_tail(v, "coherent_state");
    return PureState{space, 1, normalized(v)};
}

PureState smsv_state(double n, const TruncatedSpace& space) {
    if (!(n >= 0.0)) throw std::invalid_argument("smsv_state: N must be >= 0");
    // Var(x) = xi_N = e^{2r}/2: amplitudes of squeeze(-r)|0> with
    // c_{2k} proportional to tanh(r)^k sqrt((2k)!)/(2^k k!).
    const double xi = bounds::xi_n(n);
    const double th = std::tanh(0.5 * std::log(2.0 * xi));
    CVec v = CVec::Zero(space.dim);
    double log_c = 0.0; // log |c_{2k}| relative to c_0
    v(0) = 1.0;
    for (int k = 1; 2 * k < space.dim; ++k) {
        // |c_2k/c_{2k-2}| = th * sqrt((2k)(2k-1))/(2k)
        log_c += std::log(th) + 0.5 * (std::log(2.0 * k) + std::log(2.0 * k - 1.0)) - std::log(2.0 * k);
        v(2 * k) = std::exp(log_c);
    }
    check_tail(v, "smsv_state");
    return PureState{space, 1, normalized(v)};
}

PureState cat_state(Complex alpha, const TruncatedSpace& space) {
    const PureState plus = coherent_state(alpha, space);
    const PureState minus = coherent_state(-alpha, space);
    return PureState{space, 1, normalized(plus.amplitudes + minus.amplitudes)};
}

PureState gkp_delta_state(double delta, const TruncatedSpace& space) {
    if (!(delta > 0.0)) throw std::invalid_argument("gkp_delta_state: Delta must be > 0");
    const int d = space.dim;
    const int peaks_half = static_cast<int>(std::ceil(std::sqrt(20.0 / (2.0 * kPi)) / delta));
    // Per peak: int psi_n(x) exp(-(x - x0)^2 / (2 Delta^2)) dx with
    // x = x0 + sqrt(2) Delta t and Gauss-Hermite nodes in t. The node count
    // tracks the fastest Hermite oscillation across the peak width.
    const int nodes = std::max(64, static_cast<int>(std::ceil(std::sqrt(2.0 * d))) + 24);
    auto [t, w] = gauss_hermite(nodes);
    Vec c = Vec::Zero(d);
    Vec xs(nodes);
    for (int j = -peaks_half; j <= peaks_half; ++j) {
        const double x0 = 2.0 * std::sqrt(kPi) * j;
        const double envelope = std::exp(-2.0 * kPi * delta * delta * j * j);
        for (int k = 0; k < nodes; ++k) xs(k) = x0 + std::sqrt(2.0) * delta * t(k);
        const Mat psi = position_wavefunctions(d, xs);
        c += envelope * std::sqrt(2.0) * delta * (psi * w);
    }
    CVec v = c.cast<Complex>();
    check_tail(v, "gkp_delta_state");
    return PureState{space, 1, normalized(v)};
}

PureState sparse_state(int spacing, const CVec& coeffs, const TruncatedSpace& space) {
    const int k = static_cast<int>(coeffs.size());
    if (spacing < 1 || k < 1) throw std::invalid_argument("sparse_state: need spacing >= 1 and coefficients");
    if (spacing * (k - 1) >= space.dim)
        throw std::invalid_argument("sparse_state: lattice exceeds the cutoff dimension");
    CVec v = CVec::Zero(space.dim);
    for (int j = 0; j < k; ++j) v(spacing * j) = coeffs(j);
    return PureState{space, 1, normalized(v)};
}

PureState tmsv_state(double n, const TruncatedSpace& space) {
    if (!(n >= 0.0)) throw std::invalid_argument("tmsv_state: N must be >= 0");
    const int d = space.dim;
    const double r = std::asinh(std::sqrt(n));
    const double th = std::tanh(r);
    CVec v = CVec::Zero(d * d);
    double amp = 1.0;
    for (int k = 0; k < d; ++k) {
        v(k * d + k) = amp; // |k>|k>
        amp *= th;
    }
    // tail check on the Schmidt weights
    if (th > 0.0 && std::pow(th, 2.0 * (d - 1)) > kTailTol)
        throw std::invalid_argument("tmsv_state: Schmidt tail exceeds cutoff; increase dim");
    return PureState{space, 2, normalized(v)};
}

double mean_number(const PureState& psi) {
    const int d = psi.space.dim;
    double total = 0.0;
    if (psi.num_modes == 1) {
        for (int n = 0; n < d; ++n) total += n * std::norm(psi.amplitudes(n));
    } else {
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                total += 0.5 * (a + b) * std::norm(psi.amplitudes(a * d + b));
    }
    return total;
}

double mean_number(const DensityMatrix& rho) {
    double total = 0.0;
    for (int n = 0; n < rho.space.dim; ++n) total += n * rho.matrix(n, n).real();
    return total;
}

CMat displacement(Complex alpha, const TruncatedSpace& space) {
    const Operators ops = operators(space);
    const CMat h = -kI * (alpha * ops.create - std::conj(alpha) * ops.annihilate);
    CMat u = unitary_exp_i(h);
    check_vacuum_leak(u, "displacement");
    return u;
}

CMat squeeze(double r, const TruncatedSpace& space) {
    const Operators ops = operators(space);
    const CMat a2 = ops.annihilate * ops.annihilate;
    const CMat h = -kI * 0.5 * r * (a2 - a2.adjoint());
    CMat u = unitary_exp_i(h);
    check_vacuum_leak(u, "squeeze");
    return u;
}

Mat position_wavefunctions(int nmax, const Vec& x) {
    const int npts = static_cast<int>(x.size());
    Mat out(nmax, npts);
    for (int k = 0; k < npts; ++k) {
        const double x2 = x(k) * x(k);
        out(0, k) = std::pow(kPi, -0.25) * std::exp(-0.5 * x2);
        if (nmax > 1) out(1, k) = std::sqrt(2.0) * x(k) * out(0, k);
        for (int n = 1; n + 1 < nmax; ++n) {
            out(n + 1, k) = std::sqrt(2.0 / (n + 1.0)) * x(k) * out(n, k) -
                            std::sqrt(n / (n + 1.0)) * out(n - 1, k);
        }
    }
    return out;
}

PureState make_state(const std::string& kind, const std::map<std::string, double>& params,
                     const TruncatedSpace& space) {
    auto get = [&](const std::string& key, std::optional<double> fallback = {}) {
        auto it = params.find(key);
        if (it != params.end()) return it->second;
        if (fallback) return *fallback;
        throw std::invalid_argument("make_state: missing parameter " + key + " for kind " + kind);
    };
    if (kind == "fock") return fock_state(static_cast<int>(get("n")), space);
    if (kind == "vacuum") return fock_state(0, space);
    if (kind == "coherent")
        return coherent_state(Complex(get("alpha_re"), get("alpha_im", 0.0)), space);
    if (kind == "smsv") return smsv_state(get("N"), space);
    if (kind == "cat") return cat_state(Complex(get("alpha_re"), get("alpha_im", 0.0)), space);
    if (kind == "gkp_delta") return gkp_delta_state(get("delta"), space);
    if (kind == "tmsv") return tmsv_state(get("N"), space);
    throw std::invalid_argument("make_state: unknown kind " + kind);
}

std::string state_to_json(const PureState& psi) {
    nlohmann::json j;
    j["dim"] = psi.space.dim;
    j["num_modes"] = psi.num_modes;
    auto& amps = j["amplitudes"] = nlohmann::json::array();
    for (int i = 0; i < psi.amplitudes.size(); ++i)
        amps.push_back({psi.amplitudes(i).real(), psi.amplitudes(i).imag()});
    return j.dump();
}

PureState state_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    TruncatedSpace space(j.at("dim").get<int>());
    const int num_modes = j.value("num_modes", 1);
    const auto& amps = j.at("amplitudes");
    CVec v(static_cast<int>(amps.size()));
    for (size_t i = 0; i < amps.size(); ++i)
        v(static_cast<int>(i)) = Complex(amps[i][0].get<double>(), amps[i][1].get<double>());
    PureState out{space, num_modes, v};
    out.validate();
    return out;
}

} // namespace qnm::fock
