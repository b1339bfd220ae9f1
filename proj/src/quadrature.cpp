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

#include "qnm/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace qnm {

std::pair<Vec, Vec> gauss_hermite(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: n must be >= 1");
    Mat J = Mat::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = std::sqrt(k / 2.0);
        J(k - 1, k) = b;
        J(k, k - 1) = b;
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(J, Eigen::EigenvaluesOnly);
    Vec nodes = es.eigenvalues();
    // Weights from the Christoffel sum 1/sum_j p_j(x)^2 over the orthonormal
    // Hermite polynomials, with running rescaling: the eigenvector route
    // loses all relative accuracy for the exponentially small tail weights.
    Vec weights(n);
    for (int k = 0; k < n; ++k) {
        const double x = nodes(k);
        double pm1 = 0.0;
        double p0 = std::pow(kPi, -0.25);
        double ssum = p0 * p0;
        double log_scale = 0.0;
        for (int j = 1; j < n; ++j) {
            const double pj = x * std::sqrt(2.0 / j) * p0 - std::sqrt((j - 1.0) / j) * pm1;
            pm1 = p0;
            p0 = pj;
            ssum += pj * pj;
            if (std::abs(p0) > 1e120) {
                const double c = 1e-120;
                p0 *= c;
                pm1 *= c;
                ssum *= c * c;
                log_scale += std::log(1e120);
            }
        }
        const double log_w = -std::log(ssum) - 2.0 * log_scale;
        weights(k) = std::exp(log_w); // may underflow to zero in the far tail
    }
    return {nodes, weights};
}

GaussianQuadrature::GaussianQuadrature(int n) {
    auto [t, w] = gauss_hermite(n);
    nodes = std::move(t);
    weights = w / std::sqrt(kPi);
}

} // namespace qnm
