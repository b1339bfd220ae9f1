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

#include <utility>

#include "qnm/types.hpp"

namespace qnm {

/// Gauss–Hermite nodes and weights for the weight function exp(-t^2),
/// computed from the symmetric Jacobi matrix (Golub–Welsch).
/// sum_k w_k f(t_k) ~ int exp(-t^2) f(t) dt, exact for polynomials of
/// degree <= 2n-1.
std::pair<Vec, Vec> gauss_hermite(int n);

/// Probabilist-style sampling of a Gaussian integral:
/// int N(x; mu, s^2) f(x) dx ~ sum_k (w_k/sqrt(pi)) f(mu + sqrt(2) s t_k).
struct GaussianQuadrature {
    Vec nodes;   // t_k
    Vec weights; // w_k / sqrt(pi), sums to 1
    explicit GaussianQuadrature(int n);
};

} // namespace qnm
