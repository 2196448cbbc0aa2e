#pragma once

#include "toeplab/operator.hpp"

namespace toeplab::detail {

Matrix toeplitz_raw(const Symbol& f, int N);
Matrix hankel_raw(const Symbol& f, int N);
Matrix laurent_raw(const Symbol& f, const Space& sp, Boundary b);
Matrix position_raw(const Space& sp, int axis);

}  // namespace toeplab::detail
