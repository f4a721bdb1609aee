#pragma once

#include <Eigen/Core>

namespace qvdp {

/// Classical fixed-step RK4 for dy/dt = f(t, y) with a matrix-valued state.
/// f is called as f(t, y, dydt) and must overwrite dydt.
template <typename Matrix>
class Rk4 {
 public:
  template <typename Rhs>
  void step(Rhs&& f, double t, Matrix& y, double h) {
    f(t, y, k1_);
    tmp_ = y + (0.5 * h) * k1_;
    f(t + 0.5 * h, tmp_, k2_);
    tmp_ = y + (0.5 * h) * k2_;
    f(t + 0.5 * h, tmp_, k3_);
    tmp_ = y + h * k3_;
    f(t + h, tmp_, k4_);
    y += (h / 6.0) * (k1_ + 2.0 * (k2_ + k3_) + k4_);
  }

 private:
  Matrix k1_, k2_, k3_, k4_, tmp_;
};

}  // namespace qvdp
