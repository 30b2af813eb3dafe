#pragma once

// Finite-difference jets of "bundles": maps y -> list of vectors sharing one evaluation.

#include <vector>

#include "strobo/fields.hpp"

namespace strobo::detail {

template <class S>
struct BundleJet {
  std::vector<VecT<S>> v;
  std::vector<MatT<S>> d;
  std::vector<HessT<S>> h;
};

template <class S, class Fn>
std::vector<MatT<S>> bundle_jacobians(Fn&& f, const Vec& y, const FdScheme& s, const std::vector<VecT<S>>& at_y) {
  using Bundle = std::vector<VecT<S>>;
  Bundle zero(at_y.size());
  for (std::size_t j = 0; j < at_y.size(); ++j) zero[j] = VecT<S>::Zero(at_y[j].size());
  auto parts = fd::partials<Bundle>(f, y, s, zero, [](Bundle& acc, double w, const Bundle& x) {
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += w * x[j];
  });
  std::vector<MatT<S>> out(at_y.size());
  for (std::size_t j = 0; j < at_y.size(); ++j) {
    out[j].resize(at_y[j].size(), y.size());
    for (int i = 0; i < y.size(); ++i) out[j].col(i) = parts[i][j];
  }
  return out;
}

// derivatives: 0 values, 1 + Jacobians, 2 + second derivatives
template <class S, class Fn>
BundleJet<S> bundle_jet(Fn&& f, const Vec& y, int derivatives, const FdScheme& s) {
  BundleJet<S> J;
  J.v = f(y);
  if (derivatives >= 1) J.d = bundle_jacobians<S>(f, y, s, J.v);
  if (derivatives >= 2) {
    using MBundle = std::vector<MatT<S>>;
    MBundle zero(J.d.size());
    for (std::size_t j = 0; j < zero.size(); ++j) zero[j] = MatT<S>::Zero(J.d[j].rows(), J.d[j].cols());
    auto jac_at = [&](const Vec& p) { return bundle_jacobians<S>(f, p, s, J.v); };
    auto parts = fd::partials<MBundle>(jac_at, y, s, zero, [](MBundle& acc, double w, const MBundle& x) {
      for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += w * x[j];
    });
    J.h.assign(J.v.size(), HessT<S>(y.size()));
    for (std::size_t j = 0; j < J.v.size(); ++j)
      for (int l = 0; l < y.size(); ++l) J.h[j][l] = parts[l][j];
    // symmetrize in the two derivative slots
    const int n = static_cast<int>(y.size());
    for (auto& H : J.h)
      for (int l = 0; l < n; ++l)
        for (int c = l + 1; c < n; ++c) {
          VecT<S> m = 0.5 * (H[l].col(c) + H[c].col(l));
          H[l].col(c) = m;
          H[c].col(l) = m;
        }
  }
  return J;
}

}  // namespace strobo::detail
