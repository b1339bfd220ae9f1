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

#include <cmath>
#include <random>

#include "doctest.h"
#include "qnm/bounds.hpp"
#include "qnm/channels.hpp"
#include "qnm/fisher.hpp"
#include "qnm/fock.hpp"
#include "qnm/gaussian.hpp"

using namespace qnm;
using namespace qnm::fisher;
using qnm::fock::TruncatedSpace;

namespace {

EncodedState encoded_vacuum(double sigma, int dim, double eta = 0.0) {
    const TruncatedSpace space(dim);
    return encode_lossy_pure(fock::fock_state(0, space), eta, sigma,
                             channels::DisplacementAxis::P);
}

} // namespace

TEST_CASE("pure-state QFI is 4 Var(H)") {
    const TruncatedSpace space(50);
    const fock::PureState psi = fock::smsv_state(1.0, space);
    const fock::Operators ops = fock::operators(space);
    // parameter encoded by exp(-i theta x): drho = -i[x, rho]
    const CMat rho = psi.amplitudes * psi.amplitudes.adjoint();
    const CMat drho = -kI * (ops.position * rho - rho * ops.position);
    const double qfi = qfi_spectral(fock::DensityMatrix{space, rho}, drho).value;
    const CVec xs = ops.position * psi.amplitudes;
    const double var = xs.squaredNorm() - std::norm((psi.amplitudes.adjoint() * xs)(0));
    CHECK(qfi == doctest::Approx(4.0 * var).epsilon(1e-8));
}

TEST_CASE("vacuum through the encoding matches the closed form") {
    const auto enc = encoded_vacuum(0.1, 60);
    const auto res = qfi_spectral(enc.rho, enc.drho);
    CHECK(res.value == doctest::Approx(2.0 / 1.01).epsilon(1e-8));
    CHECK(res.leakage < 1e-10);
    // cutoff sensitivity stays small on this clean case
    CHECK(std::abs(res.value_cutoff_1e10 - res.value_cutoff_1e14) < 1e-6);

    const auto zero = qfi_spectral(enc.rho, CMat::Zero(60, 60));
    CHECK(zero.value == doctest::Approx(0.0));
}

TEST_CASE("sld reconstructs drho") {
    const auto enc = encoded_vacuum(0.3, 50);
    const CMat l = sld(enc.rho, enc.drho);
    const CMat rec = 0.5 * (l * enc.rho.matrix + enc.rho.matrix * l);
    CHECK((rec - enc.drho).cwiseAbs().maxCoeff() < 1e-7);
    // qfi = tr(rho L^2)
    const double qfi = (enc.rho.matrix * l * l).trace().real();
    CHECK(qfi == doctest::Approx(qfi_spectral(enc.rho, enc.drho).value).epsilon(1e-7));
}

TEST_CASE("simultaneous mean and variance estimation") {
    const int dim = 60;
    const TruncatedSpace space(dim);
    const double sigma = 0.5;
    const fock::Operators ops = fock::operators(space);
    const auto enc = encoded_vacuum(sigma, dim);
    // d rho / d mu at mu = 0: displacement generator x: -i[x, rho]
    const CMat drho_mu = -kI * (ops.position * enc.rho.matrix - enc.rho.matrix * ops.position);

    const Mat f = qfim(enc.rho, {drho_mu, enc.drho});
    CHECK(f(0, 0) == doctest::Approx(2.0 / (1.0 + 2.0 * sigma * sigma)).epsilon(1e-6));
    CHECK(f(1, 1) == doctest::Approx(2.0 / (1.0 + sigma * sigma)).epsilon(1e-6));
    CHECK(std::abs(f(0, 1)) < 1e-8);

    const CMat l_mu = sld(enc.rho, drho_mu);
    const CMat l_s = sld(enc.rho, enc.drho);
    const Mat wc = weak_commutativity(enc.rho, {l_mu, l_s});
    CHECK(wc.maxCoeff() < 1e-8);

    // single parameter: qfim reduces to qfi_spectral
    const Mat f1 = qfim(enc.rho, {enc.drho});
    CHECK(f1(0, 0) == doctest::Approx(qfi_spectral(enc.rho, enc.drho).value).epsilon(1e-10));
}

TEST_CASE("number measurement saturates the vacuum QFI") {
    const int dim = 60;
    const auto enc = encoded_vacuum(0.5, dim);
    const Povm number = number_povm(TruncatedSpace(dim));
    number.validate();
    const double cfi = cfi_povm(number, enc.rho, enc.drho);
    CHECK(cfi == doctest::Approx(2.0 / 1.25).epsilon(1e-8));

    // trivial POVM carries no information
    Povm trivial;
    trivial.effects.push_back(CMat::Identity(dim, dim));
    CHECK(cfi_povm(trivial, enc.rho, enc.drho) == doctest::Approx(0.0));
}

TEST_CASE("homodyne CFI against the quadrature closed form") {
    const int dim = 60;
    for (double sigma : {1.0, 0.3}) {
        const auto enc = encoded_vacuum(sigma, dim);
        const double cfi = cfi_homodyne(enc.rho, enc.drho, kPi / 2.0);
        const double expected = bounds::cfi_quadrature_vacuum(sigma);
        CHECK(cfi == doctest::Approx(expected).epsilon(1e-6));
    }
    // Rayleigh curse scaling ~ 8 sigma^2 at sigma = 0.01
    const auto enc = encoded_vacuum(0.01, 40);
    CHECK(cfi_homodyne(enc.rho, enc.drho, kPi / 2.0) ==
          doctest::Approx(8e-4).epsilon(0.02));
    // x-quadrature carries nothing for the p-encoded signal
    CHECK(cfi_homodyne(enc.rho, enc.drho, 0.0) < 1e-10);
    // zero derivative: zero information
    CHECK(cfi_homodyne(enc.rho, CMat::Zero(40, 40), kPi / 2.0) == doctest::Approx(0.0));
}

TEST_CASE("homodyne grid refinement is converged") {
    const auto enc = encoded_vacuum(0.4, 50);
    HomodyneGrid coarse;
    coarse.points = 801;
    HomodyneGrid fine;
    fine.points = 1601;
    const double a = cfi_homodyne(enc.rho, enc.drho, kPi / 2.0, coarse);
    const double b = cfi_homodyne(enc.rho, enc.drho, kPi / 2.0, fine);
    CHECK(std::abs(a - b) < 1e-6);
}

TEST_CASE("small-signal QFI") {
    const int dim = 50;
    const TruncatedSpace space(dim);
    const fock::Operators ops = fock::operators(space);

    // pure state: 4 Var(H)
    const fock::PureState coh = fock::coherent_state(Complex(0.8, 0.1), space);
    const auto rho_pure = fock::to_density(coh);
    const auto res = small_signal_qfi(rho_pure, ops.position);
    const CVec xs = ops.position * coh.amplitudes;
    const double var = xs.squaredNorm() - std::norm((coh.amplitudes.adjoint() * xs)(0));
    CHECK(res.value == doctest::Approx(4.0 * var).epsilon(1e-8));

    // Fock |8> after loss: 2 (1-eta)^8 * 9
    const CMat lossy =
        channels::apply_loss(fock::to_density(fock::fock_state(8, space)).matrix, 0.1);
    const auto r8 = small_signal_qfi(fock::DensityMatrix{space, lossy}, ops.position);
    CHECK(r8.value == doctest::Approx(2.0 * std::pow(0.9, 8) * 9.0).epsilon(1e-8));
    CHECK(r8.value == doctest::Approx(7.748).epsilon(1e-3));

    // full-rank state: cursed
    CMat th = CMat::Zero(dim, dim);
    double z = 0.0;
    for (int n = 0; n < dim; ++n) z += std::exp(-0.5 * n);
    for (int n = 0; n < dim; ++n) th(n, n) = std::exp(-0.5 * n) / z;
    CHECK(small_signal_qfi(fock::DensityMatrix{space, th}, ops.position).value ==
          doctest::Approx(0.0));

    // 2D generators {x, p}: 4 (1-eta)^N (N+1)
    const auto r2d =
        small_signal_qfi_multi(fock::DensityMatrix{space, lossy}, {ops.position, ops.momentum});
    CHECK(r2d.value == doctest::Approx(4.0 * std::pow(0.9, 8) * 9.0).epsilon(1e-8));
}

TEST_CASE("derivative suppliers agree") {
    const int dim = 40;
    const TruncatedSpace space(dim);
    const auto rho_in = fock::to_density(fock::coherent_state(Complex(0.4, 0.2), space));
    const double sigma = 0.1;
    const CMat analytic = drho_encoding(rho_in.matrix, sigma, channels::DisplacementAxis::P, space);
    auto family = [&](double s) {
        return channels::random_displacement_channel(s, channels::DisplacementAxis::P, space, 41);
    };
    const CMat central = drho_central(family, rho_in.matrix, sigma, 1e-4);
    CHECK((analytic - central).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(std::abs(analytic.trace()) < 1e-9);

    // even in sigma: derivative vanishes at sigma = 0
    const CMat at0 = drho_encoding(rho_in.matrix, 0.0, channels::DisplacementAxis::P, space);
    CHECK(at0.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fast lossy-encode path matches the generic channel route") {
    const int dim = 45;
    const TruncatedSpace space(dim);
    const fock::PureState psi = fock::smsv_state(0.8, space);
    const double eta = 0.12, sigma = 0.2;
    const auto enc = encode_lossy_pure(psi, eta, sigma, channels::DisplacementAxis::P);
    const channels::LossyEncoding fam(eta, sigma, space, 41);
    const CMat rho_ref = fam.apply(psi.amplitudes * psi.amplitudes.adjoint());
    const CMat drho_ref = fam.derivative(psi.amplitudes * psi.amplitudes.adjoint());
    CHECK((enc.rho.matrix - rho_ref).cwiseAbs().maxCoeff() < 1e-11);
    CHECK((enc.drho - drho_ref).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("spectral QFI matches the Gaussian module on Gaussian states") {
    const int dim = 140;
    const TruncatedSpace space(dim);
    for (double n : {0.0, 0.6}) {
        for (double eta : {0.0, 0.1}) {
            const double sigma = 0.25;
            const fock::PureState psi =
                n == 0.0 ? fock::fock_state(0, space) : fock::smsv_state(n, space);
            const auto enc = encode_lossy_pure(psi, eta, sigma, channels::DisplacementAxis::P);
            const double fock_route = qfi_spectral(enc.rho, enc.drho).value;

            gaussian::GaussianState g =
                n == 0.0 ? gaussian::make_vacuum() : gaussian::make_smsv(n);
            if (eta > 0.0) g = gaussian::apply_gaussian_channel(g, gaussian::loss(eta));
            g = gaussian::apply_gaussian_channel(g, gaussian::encode_1d(sigma));
            Mat dcov = Mat::Zero(2, 2);
            dcov(1, 1) = 2.0 * sigma;
            const double gauss_route = gaussian::qfi_covariance(g.cov, dcov);
            CHECK(fock_route == doctest::Approx(gauss_route).epsilon(1e-3));
        }
    }
}

TEST_CASE("measurement hierarchy and convexity") {
    std::mt19937 rng(3);
    const int dim = 30;
    const TruncatedSpace space(dim);
    const Povm number = number_povm(space);
    for (int trial = 0; trial < 3; ++trial) {
        std::uniform_real_distribution<double> u(0.05, 0.6);
        const double sigma = u(rng);
        const double eta = 0.3 * u(rng);
        const fock::PureState psi = fock::coherent_state(Complex(u(rng), 0.0), space);
        const auto enc = encode_lossy_pure(psi, eta, sigma, channels::DisplacementAxis::P);
        const double qfi = qfi_spectral(enc.rho, enc.drho).value;
        CHECK(cfi_povm(number, enc.rho, enc.drho) <= qfi + 1e-6);
        CHECK(cfi_homodyne(enc.rho, enc.drho, kPi / 2.0) <= qfi + 1e-6);
    }

    // convexity of the QFI under mixing
    const auto e1 = encoded_vacuum(0.2, dim);
    const TruncatedSpace sp(dim);
    const auto psi2 = fock::fock_state(1, sp);
    const auto e2 = encode_lossy_pure(psi2, 0.0, 0.2, channels::DisplacementAxis::P);
    const fock::DensityMatrix mix{sp, 0.5 * (e1.rho.matrix + e2.rho.matrix)};
    const CMat dmix = 0.5 * (e1.drho + e2.drho);
    const double qmix = qfi_spectral(mix, dmix).value;
    const double bound = 0.5 * qfi_spectral(e1.rho, e1.drho).value +
                         0.5 * qfi_spectral(e2.rho, e2.drho).value;
    CHECK(qmix <= bound + 1e-6);
}

TEST_CASE("sigma versus variance chain rule") {
    const int dim = 50;
    for (double sigma : {0.1, 0.5, 1.0}) {
        const auto enc = encoded_vacuum(sigma, dim);
        const double qfi_sigma = qfi_spectral(enc.rho, enc.drho).value;
        // d rho / d(sigma^2) = d rho / d sigma / (2 sigma)
        const CMat drho_var = enc.drho / (2.0 * sigma);
        const double qfi_var = qfi_spectral(enc.rho, drho_var).value;
        CHECK(qfi_sigma == doctest::Approx(4.0 * sigma * sigma * qfi_var).epsilon(1e-8));
    }
}

TEST_CASE("sld eigenbasis POVM attains the QFI") {
    const auto enc = encoded_vacuum(0.35, 40);
    const Povm opt = sld_eigenbasis_povm(enc.rho, enc.drho);
    const double cfi = cfi_povm(opt, enc.rho, enc.drho);
    CHECK(cfi == doctest::Approx(qfi_spectral(enc.rho, enc.drho).value).epsilon(1e-6));
}

TEST_CASE("qubit phase diffusion QFI") {
    const TruncatedSpace qubit(2);
    for (double sigma : {0.1, 1.0, 2.0}) {
        const channels::Channel ch = channels::qubit_random_rotation(sigma);
        CVec up_x(2);
        up_x << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
        const CMat rho = ch.apply(CMat(up_x * up_x.adjoint()));
        const double h = 1e-6;
        const channels::Channel chp = channels::qubit_random_rotation(sigma + h);
        const channels::Channel chm = channels::qubit_random_rotation(sigma - h);
        const CMat drho = (chp.apply(CMat(up_x * up_x.adjoint())) -
                           chm.apply(CMat(up_x * up_x.adjoint()))) /
                          (2.0 * h);
        const double qfi = qfi_spectral(fock::DensityMatrix{qubit, rho}, drho).value;
        CHECK(qfi == doctest::Approx(bounds::ecqfi_qubit_rotation(sigma)).epsilon(1e-7));
    }
}

TEST_CASE("truncation convergence: doubling dim moves the QFI by < 0.1%") {
    struct Case {
        const char* name;
        int dim;
        std::function<fock::PureState(const TruncatedSpace&)> build;
    };
    const std::vector<Case> cases = {
        {"vacuum", 40, [](const TruncatedSpace& s) { return fock::fock_state(0, s); }},
        {"smsv", 120, [](const TruncatedSpace& s) { return fock::smsv_state(1.0, s); }},
        {"gkp", 300, [](const TruncatedSpace& s) { return fock::gkp_delta_state(0.2, s); }},
    };
    for (const auto& cs : cases) {
        const double a = [&] {
            const auto enc = encode_lossy_pure(cs.build(TruncatedSpace(cs.dim)), 0.1, 0.05,
                                               channels::DisplacementAxis::P);
            return qfi_spectral(enc.rho, enc.drho).value;
        }();
        const double b = [&] {
            const auto enc = encode_lossy_pure(cs.build(TruncatedSpace(2 * cs.dim)), 0.1, 0.05,
                                               channels::DisplacementAxis::P);
            return qfi_spectral(enc.rho, enc.drho).value;
        }();
        CHECK(std::abs(a - b) < 1e-3 * std::abs(b));
    }
}

TEST_CASE("number-POVM CFIM at mu = 0 is singular in the mu direction") {
    const int dim = 60;
    const TruncatedSpace space(dim);
    const double sigma = 0.4;
    const fock::Operators ops = fock::operators(space);
    const auto enc = encoded_vacuum(sigma, dim);
    const CMat drho_mu = -kI * (ops.position * enc.rho.matrix - enc.rho.matrix * ops.position);
    const Mat cf = cfim_povm(number_povm(space), enc.rho, {drho_mu, enc.drho});
    CHECK(cf(1, 1) == doctest::Approx(2.0 / (1.0 + sigma * sigma)).epsilon(1e-8));
    CHECK(std::abs(cf(0, 0)) < 1e-10);
    CHECK(std::abs(cf(0, 1)) < 1e-10);
}
