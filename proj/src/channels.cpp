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

#include "qnm/channels.hpp"

#include <Eigen/Eigenvalues>
#include <atomic>
#include <cmath>
#include <stdexcept>

#include "qnm/quadrature.hpp"

namespace qnm::channels {

namespace {

/// log(n!) table up to d.
Vec log_factorials(int d) {
    Vec lf(d + 1);
    lf(0) = 0.0;
    for (int n = 1; n <= d; ++n) lf(n) = lf(n - 1) + std::log(static_cast<double>(n));
    return lf;
}

/// exp(i alpha G) column applications for Hermitian G with an eigenbasis.
struct ExpGenerator {
    Eigen::SelfAdjointEigenSolver<CMat> es;
    explicit ExpGenerator(const CMat& g) : es(g) {}
    [[nodiscard]] CMat unitary(double alpha) const {
        CVec phases(es.eigenvalues().size());
        for (int i = 0; i < phases.size(); ++i)
            phases(i) = std::exp(kI * alpha * es.eigenvalues()(i));
        return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    }
};

Channel displacement_axis_channel(double sigma, bool along_p, const fock::TruncatedSpace& space,
                                  int quad_nodes, const char* label) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("random_displacement_channel: sigma >= 0");
    if (quad_nodes < 11 || quad_nodes % 2 == 0)
        throw std::invalid_argument("random_displacement_channel: quad_nodes must be odd and >= 11");
    const fock::Operators ops = fock::operators(space);
    // Displacing p by alpha uses exp(i alpha x); displacing x by beta uses
    // exp(-i beta p).
    const CMat gen = along_p ? ops.position : CMat(-ops.momentum);
    const ExpGenerator eg(gen);
    const GaussianQuadrature q(quad_nodes);
    std::vector<CMat> kraus;
    kraus.reserve(quad_nodes);
    for (int k = 0; k < quad_nodes; ++k) {
        const double alpha = std::sqrt(2.0) * sigma * q.nodes(k);
        kraus.push_back(std::sqrt(q.weights(k)) * eg.unitary(alpha));
    }
    return Channel(space, std::move(kraus), label,
                   {{"sigma", sigma}, {"nodes", static_cast<double>(quad_nodes)}});
}

} // namespace

Channel::Channel(fock::TruncatedSpace space, std::vector<CMat> kraus, std::string label,
                 std::map<std::string, double> params)
    : space_(space), kraus_(std::move(kraus)), label_(std::move(label)), params_(std::move(params)) {
    if (kraus_.empty()) throw std::invalid_argument("Channel: empty Kraus list");
    for (const auto& k : kraus_)
        if (k.rows() != space_.dim || k.cols() != space_.dim)
            throw std::invalid_argument("Channel: Kraus dimension mismatch");
}

CMat Channel::apply(const CMat& rho) const {
    if (rho.rows() != space_.dim || rho.cols() != space_.dim)
        throw std::invalid_argument("Channel::apply: space mismatch");
    CMat out = CMat::Zero(space_.dim, space_.dim);
    for (const auto& k : kraus_) out.noalias() += k * rho * k.adjoint();
    return out;
}

fock::DensityMatrix Channel::apply(const fock::DensityMatrix& rho) const {
    return fock::DensityMatrix{space_, apply(rho.matrix)};
}

double Channel::completeness_defect() const {
    CMat sum = CMat::Zero(space_.dim, space_.dim);
    for (const auto& k : kraus_) sum.noalias() += k.adjoint() * k;
    sum -= CMat::Identity(space_.dim, space_.dim);
    return sum.cwiseAbs().maxCoeff();
}

std::shared_ptr<const CMat> Channel::superoperator() const {
    if (superop_) return superop_;
    const int d = space_.dim;
    if (d > kSuperopMaxDim)
        throw std::invalid_argument("Channel::superoperator: dim exceeds the cache guard");
    auto s = std::make_shared<CMat>(CMat::Zero(d * d, d * d));
    // vec(K rho K^dag) = (conj(K) kron K) vec(rho), column-major.
    for (const auto& k : kraus_) {
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) s->block(i * d, j * d, d, d) += std::conj(k(i, j)) * k;
    }
    superop_ = s; // benign race: last writer wins
    return superop_;
}

Channel loss_channel(double eta, const fock::TruncatedSpace& space) {
    if (!(eta >= 0.0 && eta < 1.0)) throw std::invalid_argument("loss_channel: eta must be in [0,1)");
    const int d = space.dim;
    const Vec lf = log_factorials(d);
    std::vector<CMat> kraus;
    if (eta == 0.0) {
        kraus.push_back(CMat::Identity(d, d));
        return Channel(space, std::move(kraus), "loss", {{"eta", eta}});
    }
    const double log_eta = std::log(eta);
    const double log_keep = std::log1p(-eta);
    for (int n = 0; n < d; ++n) {
        CMat k = CMat::Zero(d, d);
        double max_entry = 0.0;
        for (int j = 0; j + n < d; ++j) {
            // <j| K_n |j+n> = sqrt( binom(j+n, n) eta^n (1-eta)^j )
            const double log_amp =
                0.5 * (lf(j + n) - lf(j) - lf(n) + n * log_eta + j * log_keep);
            const double amp = std::exp(log_amp);
            k(j, j + n) = amp;
            max_entry = std::max(max_entry, amp);
        }
        if (n > 0 && max_entry * max_entry < 1e-16) break; // negligible tail operators
        kraus.push_back(std::move(k));
    }
    return Channel(space, std::move(kraus), "loss", {{"eta", eta}});
}

CMat apply_loss(const CMat& rho, double eta) {
    if (!(eta >= 0.0 && eta < 1.0)) throw std::invalid_argument("apply_loss: eta must be in [0,1)");
    const int d = static_cast<int>(rho.rows());
    if (eta == 0.0) return rho;
    const Vec lf = log_factorials(d);
    const double log_eta = std::log(eta);
    const double log_keep = std::log1p(-eta);
    Vec f(d); // f_n(j) while scanning n
    CMat out = CMat::Zero(d, d);
    for (int n = 0; n < d; ++n) {
        const int span = d - n;
        double max_f = 0.0;
        for (int j = 0; j < span; ++j) {
            f(j) = std::exp(0.5 * (lf(j + n) - lf(j) - lf(n) + n * log_eta + j * log_keep));
            max_f = std::max(max_f, f(j));
        }
        if (n > 0 && max_f * max_f < 1e-18) break;
        out.topLeftCorner(span, span) +=
            f.head(span).asDiagonal() * rho.block(n, n, span, span) * f.head(span).asDiagonal();
    }
    return out;
}

CMat loss_kraus_columns(const CVec& psi, double eta, double tol) {
    const int d = static_cast<int>(psi.size());
    const Vec lf = log_factorials(d);
    std::vector<CVec> cols;
    if (eta == 0.0) {
        cols.push_back(psi);
    } else {
        const double log_eta = std::log(eta);
        const double log_keep = std::log1p(-eta);
        for (int n = 0; n < d; ++n) {
            CVec v = CVec::Zero(d);
            for (int j = 0; j + n < d; ++j) {
                const double amp =
                    std::exp(0.5 * (lf(j + n) - lf(j) - lf(n) + n * log_eta + j * log_keep));
                v(j) = amp * psi(j + n);
            }
            const double w = v.squaredNorm();
            if (w > tol)
                cols.push_back(std::move(v));
            else if (n > 5)
                break;
        }
    }
    CMat out(d, static_cast<int>(cols.size()));
    for (size_t c = 0; c < cols.size(); ++c) out.col(static_cast<int>(c)) = cols[c];
    return out;
}

Channel random_displacement_channel(double sigma, DisplacementAxis axis,
                                    const fock::TruncatedSpace& space, int quad_nodes) {
    switch (axis) {
        case DisplacementAxis::P:
            return displacement_axis_channel(sigma, true, space, quad_nodes, "encode_p");
        case DisplacementAxis::X:
            return displacement_axis_channel(sigma, false, space, quad_nodes, "encode_x");
        case DisplacementAxis::Both: {
            // Independent Gaussian weights factorize; see classical_noise_channel.
            Channel cx = displacement_axis_channel(sigma, false, space, quad_nodes, "encode_x");
            Channel cp = displacement_axis_channel(sigma, true, space, quad_nodes, "encode_p");
            Channel both = compose(cp, cx);
            return Channel(space, both.kraus(), "encode_2d",
                           {{"sigma", sigma}, {"nodes", static_cast<double>(quad_nodes)}});
        }
    }
    throw std::logic_error("random_displacement_channel: unreachable");
}

Channel classical_noise_channel(const Mat& sigma_c, const fock::TruncatedSpace& space,
                                int quad_nodes) {
    if (sigma_c.rows() != 2 || sigma_c.cols() != 2)
        throw std::invalid_argument("classical_noise_channel: Sigma_C must be 2x2");
    Eigen::SelfAdjointEigenSolver<Mat> es(sigma_c);
    if (es.eigenvalues().minCoeff() < -1e-12)
        throw std::invalid_argument("classical_noise_channel: Sigma_C not PSD");
    // Principal axes: displace along rotated quadratures. Generator of a
    // phase-space displacement along direction (dx, dp) is dp*x - dx*p.
    const fock::Operators ops = fock::operators(space);
    const GaussianQuadrature q(quad_nodes);
    std::vector<CMat> kraus;
    std::vector<std::pair<double, Vec>> axes;
    for (int i = 0; i < 2; ++i) {
        const double var = std::max(0.0, es.eigenvalues()(i));
        if (var > 0.0) axes.emplace_back(std::sqrt(var), es.eigenvectors().col(i));
    }
    if (axes.empty()) {
        kraus.push_back(CMat::Identity(space.dim, space.dim));
        return Channel(space, std::move(kraus), "classical_noise", {});
    }
    Channel acc = [&] {
        const auto& [std0, dir0] = axes[0];
        const CMat gen = dir0(1) * ops.position - dir0(0) * ops.momentum;
        const ExpGenerator eg(gen);
        std::vector<CMat> ks;
        for (int k = 0; k < quad_nodes; ++k)
            ks.push_back(std::sqrt(q.weights(k)) *
                         eg.unitary(std::sqrt(2.0) * std0 * q.nodes(k)));
        return Channel(space, std::move(ks), "classical_noise_axis", {});
    }();
    for (size_t a = 1; a < axes.size(); ++a) {
        const auto& [stda, dira] = axes[a];
        const CMat gen = dira(1) * ops.position - dira(0) * ops.momentum;
        const ExpGenerator eg(gen);
        std::vector<CMat> ks;
        for (int k = 0; k < quad_nodes; ++k)
            ks.push_back(std::sqrt(q.weights(k)) *
                         eg.unitary(std::sqrt(2.0) * stda * q.nodes(k)));
        acc = compose(Channel(space, std::move(ks), "classical_noise_axis", {}), acc);
    }
    return Channel(space, acc.kraus(), "classical_noise",
                   {{"sx2", sigma_c(0, 0)}, {"sp2", sigma_c(1, 1)}});
}

Channel dark_count_channel(double n_bar, const fock::TruncatedSpace& space) {
    if (!(n_bar >= 0.0)) throw std::invalid_argument("dark_count_channel: Nbar must be >= 0");
    const int d = space.dim;
    std::vector<CMat> kraus;
    if (n_bar == 0.0) {
        kraus.push_back(CMat::Identity(d, d));
        return Channel(space, std::move(kraus), "dark_count", {{"nbar", n_bar}});
    }
    const double ratio = n_bar / (1.0 + n_bar);
    double p = 1.0 / (1.0 + n_bar);
    for (int m = 0; m < d; ++m) {
        CMat k = CMat::Zero(d, d);
        for (int n = 0; n + m < d; ++n) k(n + m, n) = std::sqrt(p);
        kraus.push_back(std::move(k));
        p *= ratio;
        if (p < 1e-14) break;
    }
    return Channel(space, std::move(kraus), "dark_count", {{"nbar", n_bar}});
}

CMat swap_control(int k, const fock::TruncatedSpace& space) {
    if (k <= 1 || k >= space.dim)
        throw std::invalid_argument("swap_control: need 1 < k < dim");
    CMat u = CMat::Identity(space.dim, space.dim);
    u(1, 1) = 0.0;
    u(k, k) = 0.0;
    u(1, k) = 1.0;
    u(k, 1) = 1.0;
    return u;
}

Channel weak_decay_channel(const std::vector<CMat>& jump_ops, double gamma_t,
                           const fock::TruncatedSpace& space) {
    if (!(gamma_t >= 0.0)) throw std::invalid_argument("weak_decay_channel: gamma*T must be >= 0");
    if (jump_ops.empty()) throw std::invalid_argument("weak_decay_channel: no jump operators");
    const int d = space.dim;
    const double m = static_cast<double>(jump_ops.size());
    std::vector<CMat> kraus;
    for (const auto& y : jump_ops) {
        if (y.rows() != d || y.cols() != d)
            throw std::invalid_argument("weak_decay_channel: jump operator dimension mismatch");
        kraus.push_back(CMat::Identity(d, d) / std::sqrt(m) -
                        (gamma_t * std::sqrt(m) / 2.0) * (y.adjoint() * y));
        kraus.push_back(std::sqrt(gamma_t) * y);
    }
    return Channel(space, std::move(kraus), "weak_decay",
                   {{"gamma_t", gamma_t}, {"jumps", m}});
}

Channel qubit_dephasing(double gamma_t) {
    if (!(gamma_t >= 0.0)) throw std::invalid_argument("qubit_dephasing: rate >= 0");
    const fock::TruncatedSpace qubit(2);
    const double e = std::exp(-gamma_t);
    CMat k1 = std::sqrt((1.0 + e) / 2.0) * CMat::Identity(2, 2);
    CMat k2 = CMat::Zero(2, 2);
    k2(0, 0) = std::sqrt((1.0 - e) / 2.0);
    k2(1, 1) = -std::sqrt((1.0 - e) / 2.0);
    return Channel(qubit, {k1, k2}, "qubit_dephasing", {{"gamma_t", gamma_t}});
}

Channel qubit_amplitude_damping(double gamma_t) {
    if (!(gamma_t >= 0.0)) throw std::invalid_argument("qubit_amplitude_damping: rate >= 0");
    const fock::TruncatedSpace qubit(2);
    const double p = -std::expm1(-gamma_t); // 1 - e^{-gamma T}
    CMat k0 = CMat::Identity(2, 2);
    k0(1, 1) = std::sqrt(1.0 - p);
    CMat k1 = CMat::Zero(2, 2);
    k1(0, 1) = std::sqrt(p);
    return Channel(qubit, {k0, k1}, "qubit_amplitude_damping", {{"gamma_t", gamma_t}});
}

Channel qubit_random_rotation(double sigma) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("qubit_random_rotation: sigma >= 0");
    const fock::TruncatedSpace qubit(2);
    const double e = std::exp(-sigma * sigma / 2.0);
    CMat k1 = std::sqrt((1.0 + e) / 2.0) * CMat::Identity(2, 2);
    CMat k2 = CMat::Zero(2, 2);
    k2(0, 0) = std::sqrt((1.0 - e) / 2.0);
    k2(1, 1) = -std::sqrt((1.0 - e) / 2.0);
    return Channel(qubit, {k1, k2}, "qubit_random_rotation", {{"sigma", sigma}});
}

Channel compose(const Channel& a, const Channel& b) {
    if (a.space().dim != b.space().dim) throw std::invalid_argument("compose: space mismatch");
    std::vector<CMat> kraus;
    kraus.reserve(a.kraus().size() * b.kraus().size());
    for (const auto& ka : a.kraus())
        for (const auto& kb : b.kraus()) kraus.push_back(ka * kb);
    return Channel(a.space(), std::move(kraus), a.label() + "." + b.label());
}

LossyEncoding::LossyEncoding(double eta, double sigma, const fock::TruncatedSpace& space,
                             int quad_nodes)
    : eta_(eta), sigma_(sigma), space_(space), nodes_(quad_nodes) {
    if (!(eta >= 0.0 && eta < 1.0)) throw std::invalid_argument("LossyEncoding: eta in [0,1)");
    if (!(sigma >= 0.0)) throw std::invalid_argument("LossyEncoding: sigma >= 0");
    const GaussianQuadrature q(quad_nodes);
    quad_nodes_ = q.nodes;
    quad_weights_ = q.weights;
    Eigen::SelfAdjointEigenSolver<Mat> es(fock::position_real(space));
    x_eigvecs_ = es.eigenvectors();
    x_eigvals_ = es.eigenvalues();
}

CMat LossyEncoding::encode(const CMat& rho, bool adjoint_dir) const {
    const int d = space_.dim;
    const CMat rot = x_eigvecs_.transpose() * rho * x_eigvecs_;
    CMat acc = CMat::Zero(d, d);
    for (int k = 0; k < nodes_; ++k) {
        const double alpha = std::sqrt(2.0) * sigma_ * quad_nodes_(k) * (adjoint_dir ? -1.0 : 1.0);
        CVec ph(d);
        for (int i = 0; i < d; ++i) ph(i) = std::exp(kI * alpha * x_eigvals_(i));
        acc += quad_weights_(k) *
               CMat(ph.asDiagonal() * rot * ph.asDiagonal().toDenseMatrix().adjoint());
    }
    return x_eigvecs_ * acc * x_eigvecs_.transpose();
}

CMat LossyEncoding::apply(const CMat& rho) const { return encode(apply_loss(rho, eta_), false); }

CMat LossyEncoding::derivative(const CMat& rho) const {
    const int d = space_.dim;
    const CMat lossy = apply_loss(rho, eta_);
    const CMat rot = x_eigvecs_.transpose() * lossy * x_eigvecs_;
    const Mat x = fock::position_real(space_);
    CMat acc = CMat::Zero(d, d);
    for (int k = 0; k < nodes_; ++k) {
        const double alpha = std::sqrt(2.0) * sigma_ * quad_nodes_(k);
        CVec ph(d);
        for (int i = 0; i < d; ++i) ph(i) = std::exp(kI * alpha * x_eigvals_(i));
        const CMat a = x_eigvecs_ *
                       CMat(ph.asDiagonal() * rot * ph.asDiagonal().toDenseMatrix().adjoint()) *
                       x_eigvecs_.transpose();
        const CMat ga = x.cast<Complex>() * a;
        acc += quad_weights_(k) * std::sqrt(2.0) * quad_nodes_(k) * (kI * (ga - ga.adjoint()));
    }
    return acc;
}

namespace {

/// sum_n K_n^dag A K_n for the loss Kraus family (Heisenberg direction).
CMat loss_adjoint_apply(const CMat& a, double eta) {
    const int d = static_cast<int>(a.rows());
    if (eta == 0.0) return a;
    Vec lf(d + 1);
    lf(0) = 0.0;
    for (int n = 1; n <= d; ++n) lf(n) = lf(n - 1) + std::log(static_cast<double>(n));
    const double log_eta = std::log(eta);
    const double log_keep = std::log1p(-eta);
    CMat out = CMat::Zero(d, d);
    Vec f(d);
    for (int n = 0; n < d; ++n) {
        const int span = d - n;
        double max_f = 0.0;
        for (int j = 0; j < span; ++j) {
            f(j) = std::exp(0.5 * (lf(j + n) - lf(j) - lf(n) + n * log_eta + j * log_keep));
            max_f = std::max(max_f, f(j));
        }
        if (n > 0 && max_f * max_f < 1e-18) break;
        out.block(n, n, span, span) +=
            f.head(span).asDiagonal() * a.topLeftCorner(span, span) * f.head(span).asDiagonal();
    }
    return out;
}

} // namespace

CMat LossyEncoding::adjoint(const CMat& a) const {
    // Lambda^dag = loss^dag o encode^dag; the encode adjoint flips the
    // displacement sign and the Gaussian weights are symmetric.
    return loss_adjoint_apply(encode(a, true), eta_);
}

CMat LossyEncoding::adjoint_sigma_derivative(const CMat& a) const {
    // d/dsigma of encode^dag(A) = sum_k w_k i sqrt2 t_k U_k^dag [A, x] U_k,
    // then the loss adjoint on top.
    const int d = space_.dim;
    const Mat x = fock::position_real(space_);
    const CMat comm = a * x.cast<Complex>() - x.cast<Complex>() * a;
    const CMat rot = x_eigvecs_.transpose() * comm * x_eigvecs_;
    CMat acc = CMat::Zero(d, d);
    for (int k = 0; k < nodes_; ++k) {
        const double alpha = std::sqrt(2.0) * sigma_ * quad_nodes_(k);
        CVec ph(d);
        for (int i = 0; i < d; ++i) ph(i) = std::exp(-kI * alpha * x_eigvals_(i));
        acc += quad_weights_(k) * std::sqrt(2.0) * quad_nodes_(k) * kI *
               CMat(ph.asDiagonal() * rot * ph.asDiagonal().toDenseMatrix().adjoint());
    }
    return loss_adjoint_apply(x_eigvecs_ * acc * x_eigvecs_.transpose(), eta_);
}

} // namespace qnm::channels
