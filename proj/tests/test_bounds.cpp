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

using namespace qnm::bounds;

TEST_CASE("xi_N values") {
    CHECK(xi_n(0.0) == doctest::Approx(0.5));
    CHECK(xi_n(1.0) == doctest::Approx(1.5 + std::sqrt(2.0)));
}

TEST_CASE("lossy ECQFI small-signal limit") {
    CHECK(ecqfi_lossy(0.0, 0.1) == doctest::Approx(20.0));
    CHECK(ecqfi_lossy(1e-3, 0.1) == doctest::Approx(2.0 / 0.100001));
}

TEST_CASE("Fock QFI and optimal N") {
    CHECK(qfi_fock(8, 0.1) == doctest::Approx(2.0 * std::pow(0.9, 8) * 9.0));
    CHECK(qfi_fock(8, 0.1) == doctest::Approx(7.748).epsilon(1e-3));
    const auto opt = optimal_fock_n(0.1);
    CHECK(opt.best == 8);
    REQUIRE(opt.argmax_set.size() == 2);
    CHECK(opt.argmax_set[1] == 9);

    // brute-force oracle at eta = 0.5: enumerate N <= 100
    double best_v = -1.0;
    int best_n = -1;
    for (int n = 0; n <= 100; ++n) {
        const double v = 2.0 * std::pow(0.5, n) * (n + 1);
        if (v > best_v + 1e-15) {
            best_v = v;
            best_n = n;
        }
    }
    const auto opt5 = optimal_fock_n(0.5);
    CHECK(opt5.best == best_n);
    CHECK(opt5.value == doctest::Approx(best_v));
    // N=1 and N=2 tie at eta=0.5: 2*(1/2)*2 = 2*(1/4)*3 = ... check set
    CHECK(qfi_fock(1, 0.5) == doctest::Approx(2.0));
    CHECK(qfi_fock(2, 0.5) == doctest::Approx(1.5));
}

TEST_CASE("eta to 1 pushes the optimal Fock state to vacuum") {
    CHECK(optimal_fock_n(0.995).best == 0);
}

TEST_CASE("qubit rotation bound") {
    CHECK(ecqfi_qubit_rotation(0.0) == doctest::Approx(1.0));
    const double s = 0.3;
    CHECK(ecqfi_qubit_rotation(s) == doctest::Approx(s * s / (std::exp(s * s) - 1.0)));
}

TEST_CASE("lossless ECQFI and the high-energy trend") {
    const OccupationN n(2.0);
    CHECK(ecqfi_lossless(0.0, n) == doctest::Approx(4.0 * xi_n(2.0)));
    // 4 xi_N -> 8N as N grows
    CHECK(ecqfi_lossless(0.0, OccupationN(1e8)) == doctest::Approx(8e8).epsilon(1e-4));
    CHECK_THROWS(ecqfi_lossless(0.0, OccupationN::infinite()));
    CHECK(ecqfi_lossless(0.1, OccupationN::infinite()) == doctest::Approx(2.0 / 0.01));
}

TEST_CASE("limit consistency: constrained bound approaches the lossy ECQFI") {
    const double sigma = 0.05, eta = 0.2;
    const double a = ub_lossy_constrained(sigma, eta, OccupationN(1e9));
    const double b = ecqfi_lossy(sigma, eta);
    CHECK(std::abs(a - b) / b < 1e-9);
    CHECK(ub_lossy_constrained(sigma, eta, OccupationN::infinite()) == doctest::Approx(b));
}

TEST_CASE("classical-noise vacuum formula reduces to the noiseless one") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int i = 0; i < 25; ++i) {
        const double s = u(rng);
        CHECK(qfi_vacuum_classical(s, 0.0, 0.0) == doctest::Approx(qfi_vacuum(s)).epsilon(1e-14));
    }
}

TEST_CASE("TMSV high-energy check at perfect storage") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0.01, 0.9);
    for (int i = 0; i < 25; ++i) {
        const double s = u(rng), eta = u(rng) * 0.9;
        CHECK(qfi_tmsv_1d_he(s, eta, 0.0) ==
              doctest::Approx(2.0 / (eta + s * s)).epsilon(1e-12));
    }
    CHECK(qfi_tmsv_perp(OccupationN(1.0)) == doctest::Approx(16.0 / 3.0));
}

TEST_CASE("ordering: SMSV high-energy QFI stays below the lossy ECQFI") {
    for (double sigma : {0.05, 0.1, 0.3}) {
        for (double eta : {0.01, 0.1, 0.5}) {
            CHECK(qfi_smsv_lossy_he(sigma, eta) <= ecqfi_lossy(sigma, eta) + 1e-12);
        }
    }
    // equality trend as eta/sigma^2 -> 0
    const double s = 0.3;
    CHECK(qfi_smsv_lossy_he(s, 1e-7) == doctest::Approx(ecqfi_lossy(s, 1e-7)).epsilon(1e-4));
}

TEST_CASE("catalog evaluates by name") {
    BoundSpec spec;
    spec.name = "ecqfi_lossy";
    spec.params = {{"sigma", 0.0}, {"eta", 0.1}};
    CHECK(eval_bound(spec) == doctest::Approx(20.0));
    CHECK(catalog().size() >= 18);
    BoundSpec bad;
    bad.name = "nope";
    CHECK_THROWS(eval_bound(bad));
}

TEST_CASE("variance form chain rule") {
    CHECK(variance_form(0.5, 2.0) == doctest::Approx(2.0));
    CHECK_THROWS(variance_form(0.0, 1.0));
}

TEST_CASE("domain checks") {
    CHECK_THROWS(qfi_fock(-1.0, 0.1));
    CHECK_THROWS(ecqfi_lossy(0.1, 1.0));
    CHECK_THROWS(qfi_tmsv_perp(OccupationN::infinite()));
    CHECK_THROWS(xi_n(-0.5));
}
