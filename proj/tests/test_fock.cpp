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

#include "doctest.h"
#include "qnm/bounds.hpp"
#include "qnm/fock.hpp"

using namespace qnm;
using namespace qnm::fock;

TEST_CASE("operator matrix elements") {
    const TruncatedSpace two(2);
    const Operators ops2 = operators(two);
    CHECK(ops2.annihilate(0, 1) == Complex(1.0, 0.0));
    CHECK(ops2.annihilate(1, 0) == Complex(0.0, 0.0));

    const TruncatedSpace space(40);
    const Operators ops = operators(space);
    // <0|x^2|0> = 1/2 exactly
    const CMat x2 = ops.position * ops.position;
    CHECK(x2(0, 0).real() == doctest::Approx(0.5).epsilon(1e-14));
    // [x, p] = i on the interior block
    const CMat comm = ops.position * ops.momentum - ops.momentum * ops.position;
    for (int n = 0; n < 36; ++n) {
        CHECK(std::abs(comm(n, n) - kI) < 1e-12);
        for (int k = 0; k < 36; ++k)
            if (k != n) CHECK(std::abs(comm(n, k)) < 1e-12);
    }
}

TEST_CASE("basic states") {
    const TruncatedSpace space(60);
    const PureState vac = fock_state(0, space);
    CHECK(vac.amplitudes(0) == Complex(1.0, 0.0));
    CHECK(mean_number(fock_state(8, space)) == doctest::Approx(8.0));

    const PureState coh = coherent_state(Complex(1.2, 0.3), space);
    coh.validate();
    CHECK(mean_number(coh) == doctest::Approx(std::norm(Complex(1.2, 0.3))).epsilon(1e-10));

    // density matrices from pure states are rank-1 projectors
    const DensityMatrix rho = to_density(coh);
    rho.validate();
    CHECK((rho.matrix * rho.matrix - rho.matrix).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("smsv variance matches xi_N") {
    const TruncatedSpace space(120);
    for (double n : {0.5, 1.0, 2.0}) {
        const PureState s = smsv_state(n, space);
        const Operators ops = operators(space);
        const CVec xs = ops.position * s.amplitudes;
        CHECK(xs.squaredNorm() == doctest::Approx(bounds::xi_n(n)).epsilon(1e-9));
        CHECK(mean_number(s) == doctest::Approx(n).epsilon(1e-9));
    }
}

TEST_CASE("displacement maps vacuum to the coherent state") {
    const TruncatedSpace space(50);
    const Complex alpha(0.9, -0.4);
    const CMat d = displacement(alpha, space);
    const CVec from_op = d.col(0);
    const PureState coh = coherent_state(alpha, space);
    const double fidelity = std::norm((coh.amplitudes.adjoint() * from_op)(0));
    CHECK(fidelity >= 1.0 - 1e-8);
    CHECK((d * d.adjoint() - CMat::Identity(50, 50)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("squeeze keeps the uncertainty product minimal") {
    const TruncatedSpace space(80);
    const double r = 0.6;
    const CMat u = squeeze(r, space);
    const Operators ops = operators(space);
    const CVec sq = u.col(0);
    const double var_x = (sq.adjoint() * ops.position * ops.position * sq)(0).real();
    const double var_p = (sq.adjoint() * ops.momentum * ops.momentum * sq)(0).real();
    CHECK(var_x * var_p == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(var_x == doctest::Approx(0.5 * std::exp(-2.0 * r)).epsilon(1e-8));
    CHECK_THROWS(squeeze(3.0, TruncatedSpace(20))); // leakage guard
}

TEST_CASE("gkp state") {
    const TruncatedSpace space(300);
    const PureState g = gkp_delta_state(0.2, space);
    g.validate();
    // <n> ~ Delta^{-2}/2 within 5%
    CHECK(mean_number(g) == doctest::Approx(12.5).epsilon(0.05));
    // coefficients all real
    double max_imag = 0.0;
    for (int i = 0; i < g.amplitudes.size(); ++i)
        max_imag = std::max(max_imag, std::abs(g.amplitudes(i).imag()));
    CHECK(max_imag < 1e-10);
    // Var(x) = Var(p) = Delta^{-2}/2 within 5%
    const Operators ops = operators(space);
    const double vx = (g.amplitudes.adjoint() * ops.position * ops.position * g.amplitudes)(0).real();
    const double vp = (g.amplitudes.adjoint() * ops.momentum * ops.momentum * g.amplitudes)(0).real();
    CHECK(vx == doctest::Approx(12.5).epsilon(0.05));
    CHECK(vp == doctest::Approx(12.5).epsilon(0.05));

    CHECK_THROWS(gkp_delta_state(0.05, TruncatedSpace(100))); // support exceeds cutoff
}

TEST_CASE("sparse lattice state") {
    const TruncatedSpace space(490);
    CVec coeffs = CVec::Ones(24);
    const PureState s = sparse_state(20, coeffs, space);
    s.validate();
    CHECK(std::abs(s.amplitudes(20).real() - 1.0 / std::sqrt(24.0)) < 1e-12);
    CHECK_THROWS(sparse_state(20, CVec::Ones(24), TruncatedSpace(460)));
    // one-peak degenerate case is a Fock state
    CVec one = CVec::Ones(1);
    const PureState f = sparse_state(20, one, space);
    CHECK(std::abs(f.amplitudes(0)) == doctest::Approx(1.0));
}

TEST_CASE("tmsv schmidt weights") {
    const TruncatedSpace space(40);
    const PureState t = tmsv_state(1.0, space);
    t.validate();
    CHECK(t.num_modes == 2);
    CHECK(mean_number(t) == doctest::Approx(1.0).epsilon(1e-8));
    const double th = std::tanh(std::asinh(1.0));
    CHECK(std::abs(t.amplitudes(41)) / std::abs(t.amplitudes(0)) == doctest::Approx(th));
}

TEST_CASE("json round trip") {
    const TruncatedSpace space(30);
    const PureState c = coherent_state(Complex(0.5, 0.5), space);
    const PureState back = state_from_json(state_to_json(c));
    CHECK((back.amplitudes - c.amplitudes).norm() < 1e-14);
}

TEST_CASE("make_state dispatch") {
    const TruncatedSpace space(80);
    CHECK(mean_number(make_state("fock", {{"n", 3.0}}, space)) == doctest::Approx(3.0));
    CHECK(mean_number(make_state("smsv", {{"N", 1.0}}, space)) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK_THROWS(make_state("unknown", {}, space));
    CHECK_THROWS(make_state("smsv", {}, space));
}
