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

#include "qnm/fisher.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "qnm/quadrature.hpp"

namespace qnm::fisher {

namespace {

double pair_sum(const Vec& p, const CMat& drho_eig, double cutoff) {
    const int d = static_cast<int>(p.size());
    double total = 0.0;
    for (int j = 0; j < d; ++j) {
        for (int k = 0; k < d; ++k) {
            const double s = p(j) + p(k);
            if (s > cutoff) total += 2.0 * std::norm(drho_eig(j, k)) / s;
        }
    }
    return total;
}

void check_hermitian(const CMat& m, const char* what) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-8 * scale)
        throw std::invalid_argument(std::string(what) + ": matrix not Hermitian");
}

/// Applies exp(i alpha G) to matrix columns for the tridiagonal displacement
/// generators (x for axis P, -p for axis X, both sharing the x entry pattern
/// with an optional +-i sign). Small steps use a Taylor series split into
/// unit-norm segments; large steps fall back to the eigenbasis.
class DisplacementApplier {
  public:
    DisplacementApplier(const Mat& g_real, bool imaginary_entries)
        : g_(g_real), imag_(imaginary_entries),
          entry_norm_(2.0 * g_real.diagonal(1).cwiseAbs().maxCoeff()) {}

    [[nodiscard]] CMat apply(double alpha, const CMat& v) const {
        const double norm_bound = std::abs(alpha) * entry_norm_;
        if (norm_bound <= 8.0) return taylor(alpha, v, norm_bound);
        if (!es_) {
            CMat g = g_.cast<Complex>();
            if (imag_) {
                for (int r = 0; r + 1 < g.rows(); ++r) {
                    g(r, r + 1) *= kI;
                    g(r + 1, r) *= -kI;
                }
            }
            es_.emplace(g);
        }
        CVec ph(v.rows());
        for (int i = 0; i < v.rows(); ++i)
            ph(i) = std::exp(kI * alpha * es_->eigenvalues()(i));
        return es_->eigenvectors() * (ph.asDiagonal() * (es_->eigenvectors().adjoint() * v));
    }

  private:
    [[nodiscard]] CMat taylor(double alpha, const CMat& v, double norm_bound) const {
        const int d = static_cast<int>(v.rows());
        const int segments = std::max(1, static_cast<int>(std::ceil(norm_bound / 2.0)));
        const double step = alpha / segments;
        CMat result = v;
        for (int s = 0; s < segments; ++s) {
            CMat term = result;
            CMat acc = result;
            for (int n = 1; n <= 24; ++n) {
                CMat next(d, v.cols());
                for (int c = 0; c < v.cols(); ++c) {
                    for (int r = 0; r < d; ++r) {
                        Complex val(0, 0);
                        if (r + 1 < d) val += g_(r, r + 1) * term(r + 1, c);
                        if (r > 0) val += (imag_ ? -g_(r - 1, r) : g_(r - 1, r)) * term(r - 1, c);
                        next(r, c) = val;
                    }
                }
                if (imag_) next *= kI;
                term = (kI * step / static_cast<double>(n)) * next;
                acc += term;
                if (term.cwiseAbs().maxCoeff() < 1e-17) break;
            }
            result.swap(acc);
        }
        return result;
    }

    const Mat& g_;
    bool imag_;
    double entry_norm_;
    mutable std::optional<Eigen::SelfAdjointEigenSolver<CMat>> es_;
};

} // namespace

void Povm::validate() const {
    if (effects.empty()) throw std::invalid_argument("Povm: empty");
    const int d = static_cast<int>(effects.front().rows());
    CMat sum = CMat::Zero(d, d);
    for (const auto& e : effects) {
        check_hermitian(e, "Povm effect");
        Eigen::SelfAdjointEigenSolver<CMat> es(e, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-9)
            throw std::invalid_argument("Povm: effect not PSD");
        sum += e;
    }
    if ((sum - CMat::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-9)
        throw std::invalid_argument("Povm: effects do not sum to identity");
}

Povm number_povm(const fock::TruncatedSpace& space) {
    Povm p;
    for (int n = 0; n < space.dim; ++n) {
        CMat e = CMat::Zero(space.dim, space.dim);
        e(n, n) = 1.0;
        p.effects.push_back(std::move(e));
    }
    return p;
}

FisherResult qfi_spectral(const fock::DensityMatrix& rho, const CMat& drho, double eigen_cutoff) {
    check_hermitian(rho.matrix, "qfi_spectral rho");
    check_hermitian(drho, "qfi_spectral drho");
    if (std::abs(drho.trace()) > 1e-8 * std::max(1.0, drho.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("qfi_spectral: drho not traceless");
    Eigen::SelfAdjointEigenSolver<CMat> es(rho.matrix);
    const Vec p = es.eigenvalues();
    const CMat m = es.eigenvectors().adjoint() * drho * es.eigenvectors();
    FisherResult out;
    out.dim = rho.space.dim;
    out.eigen_cutoff = eigen_cutoff;
    out.leakage = rho.leakage();
    out.value = std::max(0.0, pair_sum(p, m, eigen_cutoff));
    out.value_cutoff_1e10 = pair_sum(p, m, 1e-10);
    out.value_cutoff_1e14 = pair_sum(p, m, 1e-14);
    out.flagged = out.leakage > 1e-4;
    return out;
}

CMat sld(const fock::DensityMatrix& rho, const CMat& drho, double eigen_cutoff) {
    check_hermitian(rho.matrix, "sld rho");
    check_hermitian(drho, "sld drho");
    Eigen::SelfAdjointEigenSolver<CMat> es(rho.matrix);
    const Vec p = es.eigenvalues();
    const CMat m = es.eigenvectors().adjoint() * drho * es.eigenvectors();
    const int d = static_cast<int>(p.size());
    CMat l_eig = CMat::Zero(d, d);
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
            const double s = p(j) + p(k);
            if (s > eigen_cutoff) l_eig(j, k) = 2.0 * m(j, k) / s;
        }
    return es.eigenvectors() * l_eig * es.eigenvectors().adjoint();
}

Mat qfim(const fock::DensityMatrix& rho, const std::vector<CMat>& drho_list, double eigen_cutoff) {
    const int np = static_cast<int>(drho_list.size());
    if (np == 0) throw std::invalid_argument("qfim: empty parameter list");
    std::vector<CMat> slds;
    slds.reserve(np);
    for (const auto& d : drho_list) slds.push_back(sld(rho, d, eigen_cutoff));
    Mat out(np, np);
    for (int i = 0; i < np; ++i)
        for (int j = i; j < np; ++j) {
            const Complex v =
                0.5 * (rho.matrix * (slds[i] * slds[j] + slds[j] * slds[i])).trace();
            out(i, j) = v.real();
            out(j, i) = v.real();
        }
    return out;
}

Mat weak_commutativity(const fock::DensityMatrix& rho, const std::vector<CMat>& sld_list) {
    const int np = static_cast<int>(sld_list.size());
    Mat out = Mat::Zero(np, np);
    for (int i = 0; i < np; ++i)
        for (int j = 0; j < np; ++j) {
            const Complex v = (rho.matrix * (sld_list[i] * sld_list[j] - sld_list[j] * sld_list[i])).trace();
            out(i, j) = std::abs(v);
        }
    return out;
}

double cfi_povm(const Povm& povm, const fock::DensityMatrix& rho, const CMat& drho) {
    double total = 0.0;
    for (const auto& e : povm.effects) {
        const double p = (e * rho.matrix).trace().real();
        const double dp = (e * drho).trace().real();
        if (p < 1e-14) {
            if (std::abs(dp) < 1e-14) continue;
            // a genuinely informative zero-probability outcome: clamp
            total += dp * dp / 1e-14;
            continue;
        }
        total += dp * dp / p;
    }
    return total;
}

Mat cfim_povm(const Povm& povm, const fock::DensityMatrix& rho,
              const std::vector<CMat>& drho_list) {
    const int np = static_cast<int>(drho_list.size());
    Mat out = Mat::Zero(np, np);
    for (const auto& e : povm.effects) {
        const double p = (e * rho.matrix).trace().real();
        if (p < 1e-14) continue;
        Vec dp(np);
        for (int i = 0; i < np; ++i) dp(i) = (e * drho_list[i]).trace().real();
        out += dp * dp.transpose() / p;
    }
    return out;
}

double cfi_homodyne(const fock::DensityMatrix& rho, const CMat& drho, double angle,
                    const HomodyneGrid& grid) {
    const int d = rho.space.dim;
    // Rotate so that the measured quadrature becomes x: x_theta on rho equals
    // x on exp(-i theta n) rho exp(i theta n).
    CMat r = rho.matrix, dr = drho;
    if (angle != 0.0) {
        CVec ph(d);
        for (int n = 0; n < d; ++n) ph(n) = std::exp(-kI * angle * static_cast<double>(n));
        r = ph.asDiagonal() * r * ph.asDiagonal().toDenseMatrix().adjoint();
        dr = ph.asDiagonal() * dr * ph.asDiagonal().toDenseMatrix().adjoint();
    }
    double x_lo = grid.x_min, x_hi = grid.x_max;
    if (!(x_hi > x_lo)) {
        // span >= 8 standard deviations around the mean
        const fock::Operators ops = fock::operators(rho.space);
        const double m1 = (ops.position * r).trace().real();
        const double m2 = (ops.position * ops.position * r).trace().real();
        const double sd = std::sqrt(std::max(1e-12, m2 - m1 * m1));
        x_lo = m1 - 8.0 * sd;
        x_hi = m1 + 8.0 * sd;
    }
    const int npts = std::max(grid.points, 400);
    Vec xs(npts);
    const double h = (x_hi - x_lo) / (npts - 1);
    for (int i = 0; i < npts; ++i) xs(i) = x_lo + h * i;
    const Mat psi = fock::position_wavefunctions(d, xs);
    // densities p(x) = sum_{mn} psi_m rho_mn psi_n (real part)
    double total = 0.0;
    const CMat rpsi = r * psi.cast<Complex>();
    const CMat drpsi = dr * psi.cast<Complex>();
    for (int i = 0; i < npts; ++i) {
        double p = 0.0, dp = 0.0;
        for (int n = 0; n < d; ++n) {
            p += (psi(n, i) * rpsi(n, i)).real();
            dp += (psi(n, i) * drpsi(n, i)).real();
        }
        if (p < 1e-15) continue;
        const double w = (i == 0 || i == npts - 1) ? 0.5 : 1.0;
        total += w * dp * dp / p;
    }
    return total * h;
}

FisherResult small_signal_qfi(const fock::DensityMatrix& rho_pre, const CMat& generator,
                              double rank_cutoff) {
    return small_signal_qfi_multi(rho_pre, {generator}, 1.0, rank_cutoff);
}

FisherResult small_signal_qfi_multi(const fock::DensityMatrix& rho_pre,
                                    const std::vector<CMat>& jump_ops, double total_time,
                                    double rank_cutoff) {
    check_hermitian(rho_pre.matrix, "small_signal_qfi rho");
    Eigen::SelfAdjointEigenSolver<CMat> es(rho_pre.matrix);
    const Vec p = es.eigenvalues();
    const int d = static_cast<int>(p.size());
    CMat null_proj = CMat::Zero(d, d);
    bool ill_separated = false;
    for (int i = 0; i < d; ++i) {
        if (p(i) < rank_cutoff)
            null_proj += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
        if (p(i) > rank_cutoff * 0.1 && p(i) < rank_cutoff * 10.0) ill_separated = true;
    }
    double total = 0.0;
    for (const auto& y : jump_ops) {
        const CMat yp = null_proj * y;
        total += (rho_pre.matrix * yp.adjoint() * yp).trace().real();
    }
    FisherResult out;
    out.value = std::max(0.0, 4.0 * total_time * total);
    out.dim = rho_pre.space.dim;
    out.eigen_cutoff = rank_cutoff;
    out.leakage = rho_pre.leakage();
    out.flagged = ill_separated || out.leakage > 1e-4;
    return out;
}

CMat drho_encoding(const CMat& rho_in, double sigma, channels::DisplacementAxis axis,
                   const fock::TruncatedSpace& space, int quad_nodes) {
    if (axis == channels::DisplacementAxis::Both) {
        // Product rule over the two independent axes.
        const channels::Channel cx =
            channels::random_displacement_channel(sigma, channels::DisplacementAxis::X, space, quad_nodes);
        const channels::Channel cp =
            channels::random_displacement_channel(sigma, channels::DisplacementAxis::P, space, quad_nodes);
        const CMat d_x = drho_encoding(rho_in, sigma, channels::DisplacementAxis::X, space, quad_nodes);
        const CMat d_p = drho_encoding(cx.apply(rho_in), sigma, channels::DisplacementAxis::P, space, quad_nodes);
        return cp.apply(d_x) + d_p;
    }
    const fock::Operators ops = fock::operators(space);
    const CMat gen = (axis == channels::DisplacementAxis::P) ? ops.position : CMat(-ops.momentum);
    Eigen::SelfAdjointEigenSolver<CMat> eg(gen);
    const GaussianQuadrature q(quad_nodes);
    CMat out = CMat::Zero(space.dim, space.dim);
    const CMat rot = eg.eigenvectors().adjoint() * rho_in * eg.eigenvectors();
    for (int k = 0; k < quad_nodes; ++k) {
        const double alpha = std::sqrt(2.0) * sigma * q.nodes(k);
        CVec ph(space.dim);
        for (int i = 0; i < space.dim; ++i) ph(i) = std::exp(kI * alpha * eg.eigenvalues()(i));
        const CMat a = eg.eigenvectors() * (ph.asDiagonal() * rot * ph.asDiagonal().toDenseMatrix().adjoint()) *
                       eg.eigenvectors().adjoint();
        // d/dsigma U_(sqrt2 sigma t) rho U^dag = i sqrt2 t [G, U rho U^dag]
        const CMat ga = gen * a;
        out += q.weights(k) * std::sqrt(2.0) * q.nodes(k) * (kI * (ga - ga.adjoint()));
    }
    return out;
}

CMat drho_central(const std::function<channels::Channel(double)>& family, const CMat& rho_in,
                  double sigma, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("drho_central: step must be > 0");
    auto diff = [&](double step) {
        const CMat hi = family(sigma + step).apply(rho_in);
        const CMat lo = family(sigma - step).apply(rho_in);
        return CMat(((hi - lo) / (2.0 * step)));
    };
    const CMat d1 = diff(h);
    const CMat d2 = diff(2.0 * h);
    if ((d1 - d2).cwiseAbs().maxCoeff() > 1e-5 * std::max(1.0, d1.cwiseAbs().maxCoeff()) + 1e-5)
        throw std::invalid_argument("drho_central: derivative unstable under step doubling");
    return d1;
}

EncodedState encode_lossy_pure(const fock::PureState& psi, double eta, double sigma,
                               channels::DisplacementAxis axis, int quad_nodes) {
    psi.validate();
    if (psi.num_modes != 1)
        throw std::invalid_argument("encode_lossy_pure: single-mode states only");
    const int d = psi.space.dim;
    const CMat v = channels::loss_kraus_columns(psi.amplitudes, eta);
    const Mat x = fock::position_real(psi.space);
    const GaussianQuadrature q(quad_nodes);
    EncodedState out{fock::DensityMatrix{psi.space, CMat::Zero(d, d)}, CMat::Zero(d, d), 0.0};

    if (axis == channels::DisplacementAxis::P) {
        const DisplacementApplier applier(x, false);
        for (int k = 0; k < quad_nodes; ++k) {
            const double alpha = std::sqrt(2.0) * sigma * q.nodes(k);
            const CMat w = applier.apply(alpha, v);
            const CMat a = w * w.adjoint();
            out.rho.matrix += q.weights(k) * a;
            const CMat ga = x.cast<Complex>() * a;
            out.drho += q.weights(k) * std::sqrt(2.0) * q.nodes(k) * (kI * (ga - ga.adjoint()));
        }
    } else if (axis == channels::DisplacementAxis::X) {
        throw std::invalid_argument("encode_lossy_pure: use axis P or Both");
    } else {
        // Isotropic 2D: first the x-axis channel on the low-rank columns,
        // then the p-axis channel densely, with the product-rule derivative.
        std::vector<CMat> wx(quad_nodes);
        const DisplacementApplier applier(x, true);
        for (int k = 0; k < quad_nodes; ++k) {
            const double beta = std::sqrt(2.0) * sigma * q.nodes(k);
            wx[k] = applier.apply(beta, v); // exp(-i beta p) columns
        }
        // rho_x = sum_k w_k Wx_k Wx_k^dag ; drho_x via generator -p
        CMat rho_x = CMat::Zero(d, d), drho_x = CMat::Zero(d, d);
        const fock::Operators ops = fock::operators(psi.space);
        const CMat gen_x = -ops.momentum;
        for (int k = 0; k < quad_nodes; ++k) {
            const CMat a = wx[k] * wx[k].adjoint();
            rho_x += q.weights(k) * a;
            const CMat ga = gen_x * a;
            drho_x += q.weights(k) * std::sqrt(2.0) * q.nodes(k) * (kI * (ga - ga.adjoint()));
        }
        // p-axis pass on the dense intermediates.
        const channels::Channel cp =
            channels::random_displacement_channel(sigma, channels::DisplacementAxis::P, psi.space, quad_nodes);
        out.rho.matrix = cp.apply(rho_x);
        out.drho = cp.apply(drho_x) + drho_encoding(rho_x, sigma, channels::DisplacementAxis::P,
                                                    psi.space, quad_nodes);
        out.leakage = 1.0 - out.rho.matrix.trace().real();
        return out;
    }
    out.leakage = 1.0 - out.rho.matrix.trace().real();
    return out;
}

Povm sld_eigenbasis_povm(const fock::DensityMatrix& rho, const CMat& drho, double eigen_cutoff) {
    const CMat l = sld(rho, drho, eigen_cutoff);
    Eigen::SelfAdjointEigenSolver<CMat> es(l);
    Povm out;
    for (int i = 0; i < l.rows(); ++i)
        out.effects.push_back(es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint());
    return out;
}

} // namespace qnm::fisher
