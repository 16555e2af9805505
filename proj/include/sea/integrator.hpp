#pragma once

#include <cmath>
#include <concepts>
#include <string>
#include <utility>

#include "sea/errors.hpp"

namespace sea {

namespace detail {

template <typename State>
bool all_finite(const State& s) {
  if constexpr (std::floating_point<State>) {
    return std::isfinite(s);
  } else {
    return s.allFinite();
  }
}

}  // namespace detail

// Classical fourth-order Runge-Kutta step. State needs vector-space operators
// (Eigen fixed vectors or a floating-point scalar); rhs is called as rhs(t, y).
template <typename State, typename Rhs>
State rk4_step(Rhs&& rhs, const State& y, double t, double h) {
  auto eval = [&](double ts, const State& ys) {
    State k = rhs(ts, ys);
    if (!detail::all_finite(k)) {
      throw NonFiniteDerivative("rk4 stage derivative is not finite at t=" + std::to_string(ts));
    }
    return k;
  };
  const State k1 = eval(t, y);
  const State k2 = eval(t + 0.5 * h, State(y + (0.5 * h) * k1));
  const State k3 = eval(t + 0.5 * h, State(y + (0.5 * h) * k2));
  const State k4 = eval(t + h, State(y + h * k3));
  return State(y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

}  // namespace sea
