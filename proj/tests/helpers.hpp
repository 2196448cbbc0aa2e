#pragma once

#include "toeplab/symbol.hpp"

#include <vector>

namespace testing_helpers {

// sum_k a_k * 2cos(k theta)
inline toeplab::Symbol cos_sum(std::vector<std::pair<int, double>> terms) {
    std::vector<std::pair<toeplab::MultiIndex, toeplab::cplx>> e;
    for (auto [k, a] : terms) {
        if (k == 0) {
            e.push_back({{0}, 2.0 * a});
            continue;
        }
        e.push_back({{k}, a});
        e.push_back({{-k}, a});
    }
    return toeplab::Symbol::from_coefficients(e, 1);
}

inline toeplab::Symbol two_cos() { return cos_sum({{1, 1.0}}); }

inline toeplab::Symbol laplacian(int d) {
    std::vector<std::pair<toeplab::MultiIndex, toeplab::cplx>> e;
    for (int j = 0; j < d; ++j)
        for (int s : {-1, 1}) {
            toeplab::MultiIndex a(d, 0);
            a[j] = s;
            e.push_back({a, 1.0});
        }
    return toeplab::Symbol::from_coefficients(e, d);
}

}  // namespace testing_helpers
