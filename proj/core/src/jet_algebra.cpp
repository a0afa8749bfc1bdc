#include "pinn/jet_algebra.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace pinn {

namespace {

// Channel index of the multi-index formed by the positions of `e.idx`
// selected by `bits`.
int sub_channel(const JetLayout& layout, const JetChannel& e, unsigned bits) {
  int ix[3];
  int n = 0;
  for (int p = 0; p < e.order; ++p)
    if (bits & (1u << p)) ix[n++] = e.idx[p];
  switch (n) {
    case 0:
      return layout.value_channel();
    case 1:
      return layout.grad_channel(ix[0]);
    case 2:
      return layout.hess_channel(ix[0], ix[1]);
    default:
      return layout.third_channel(ix[0], ix[1], ix[2]);
  }
}

}  // namespace

TaylorVar TaylorVar::constant(const JetLayout* layout, double value) {
  TaylorVar v(layout);
  v.ch_[0] = value;
  return v;
}

TaylorVar TaylorVar::variable(const JetLayout* layout, double value, int direction) {
  TaylorVar v(layout);
  v.ch_[0] = value;
  if (layout->order() >= 1) v.ch_[layout->grad_channel(direction)] = 1.0;
  return v;
}

TaylorVar TaylorVar::operator-() const {
  TaylorVar r = *this;
  for (double& c : r.ch_) c = -c;
  return r;
}

TaylorVar& TaylorVar::operator+=(const TaylorVar& o) {
  for (std::size_t i = 0; i < ch_.size(); ++i) ch_[i] += o.ch_[i];
  return *this;
}

TaylorVar& TaylorVar::operator-=(const TaylorVar& o) {
  for (std::size_t i = 0; i < ch_.size(); ++i) ch_[i] -= o.ch_[i];
  return *this;
}

TaylorVar operator+(TaylorVar a, double s) {
  a.ch_[0] += s;
  return a;
}

TaylorVar operator*(TaylorVar a, double s) {
  for (double& c : a.ch_) c *= s;
  return a;
}

// Leibniz rule over derivative positions; with order <= 3 each channel is a
// sum of at most eight products.
TaylorVar operator*(const TaylorVar& a, const TaylorVar& b) {
  const JetLayout& layout = *a.layout_;
  TaylorVar w(a.layout_);
  const auto& entries = layout.entries();
  for (int c = 0; c < layout.channels(); ++c) {
    const JetChannel& e = entries[c];
    const unsigned nsub = 1u << e.order;
    double acc = 0.0;
    for (unsigned bits = 0; bits < nsub; ++bits)
      acc += a.ch_[sub_channel(layout, e, bits)] * b.ch_[sub_channel(layout, e, ~bits)];
    w.ch_[c] = acc;
  }
  return w;
}

TaylorVar compose_unary(const TaylorVar& u, double g0, double g1, double g2, double g3) {
  const JetLayout& layout = *u.layout_;
  TaylorVar w(u.layout_);
  const auto& entries = layout.entries();
  for (int c = 0; c < layout.channels(); ++c) {
    const JetChannel& e = entries[c];
    const double* ch = u.ch_.data();
    auto grad = [&](int p) { return ch[layout.grad_channel(e.idx[p])]; };
    auto hess = [&](int p, int q) { return ch[layout.hess_channel(e.idx[p], e.idx[q])]; };
    switch (e.order) {
      case 0:
        w.ch_[c] = g0;
        break;
      case 1:
        w.ch_[c] = g1 * ch[c];
        break;
      case 2:
        w.ch_[c] = g1 * ch[c] + g2 * grad(0) * grad(1);
        break;
      case 3:
        w.ch_[c] = g1 * ch[c] +
                   g2 * (hess(0, 1) * grad(2) + hess(0, 2) * grad(1) + hess(1, 2) * grad(0)) +
                   g3 * grad(0) * grad(1) * grad(2);
        break;
    }
  }
  return w;
}

TaylorVar operator/(const TaylorVar& a, const TaylorVar& b) {
  const double v = b.value();
  return a * compose_unary(b, 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v), -6.0 / (v * v * v * v));
}

TaylorVar sin(const TaylorVar& u) {
  const double s = std::sin(u.value()), c = std::cos(u.value());
  return compose_unary(u, s, c, -s, -c);
}

TaylorVar cos(const TaylorVar& u) {
  const double s = std::sin(u.value()), c = std::cos(u.value());
  return compose_unary(u, c, -s, -c, s);
}

TaylorVar exp(const TaylorVar& u) {
  const double e = std::exp(u.value());
  return compose_unary(u, e, e, e, e);
}

TaylorVar tanh(const TaylorVar& u) {
  const double t = std::tanh(u.value());
  const double f1 = 1.0 - t * t;
  return compose_unary(u, t, f1, -2.0 * t * f1, f1 * (6.0 * t * t - 2.0));
}

TaylorVar sqrt(const TaylorVar& u) {
  const double s = std::sqrt(u.value());
  return compose_unary(u, s, 0.5 / s, -0.25 / (s * s * s), 0.375 / (s * s * s * s * s));
}

const JetLayout* full_layout(int dim, int order) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, JetLayout> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find({dim, order});
  if (it == cache.end()) {
    JetLayout l;
    switch (order) {
      case 0:
        l = JetLayout::value_only(dim);
        break;
      case 1:
        l = JetLayout::first_order(dim);
        break;
      case 2:
        l = JetLayout::second_order(dim);
        break;
      case 3:
        l = JetLayout::third_order(dim);
        break;
      default:
        throw ConfigError("full_layout: order must be 0..3");
    }
    it = cache.emplace(std::make_pair(dim, order), std::move(l)).first;
  }
  return &it->second;
}

}  // namespace pinn
