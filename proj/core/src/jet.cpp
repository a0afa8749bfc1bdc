#include "pinn/jet.hpp"

#include <algorithm>
#include <set>

namespace pinn {

namespace {

JetChannel make_channel(std::vector<int> ix) {
  std::sort(ix.begin(), ix.end());
  JetChannel c;
  c.order = static_cast<int>(ix.size());
  for (std::size_t i = 0; i < ix.size(); ++i) c.idx[i] = ix[i];
  return c;
}

bool channel_less(const JetChannel& a, const JetChannel& b) {
  if (a.order != b.order) return a.order < b.order;
  return a.idx < b.idx;
}

}  // namespace

void JetLayout::index_channels() {
  std::sort(entries_.begin(), entries_.end(), channel_less);
  entries_.erase(std::unique(entries_.begin(), entries_.end()), entries_.end());

  order_ = 0;
  grad_idx_.assign(dim_, -1);
  hess_idx_.assign(static_cast<std::size_t>(dim_) * dim_, -1);
  third_idx_.assign(static_cast<std::size_t>(dim_) * dim_ * dim_, -1);
  for (int c = 0; c < channels(); ++c) {
    const JetChannel& e = entries_[c];
    order_ = std::max(order_, e.order);
    switch (e.order) {
      case 0:
        break;
      case 1:
        grad_idx_[e.idx[0]] = c;
        break;
      case 2:
        hess_idx_[e.idx[0] * dim_ + e.idx[1]] = c;
        hess_idx_[e.idx[1] * dim_ + e.idx[0]] = c;
        break;
      case 3: {
        std::array<int, 3> p{e.idx[0], e.idx[1], e.idx[2]};
        std::sort(p.begin(), p.end());
        do {
          third_idx_[(static_cast<std::size_t>(p[0]) * dim_ + p[1]) * dim_ + p[2]] = c;
        } while (std::next_permutation(p.begin(), p.end()));
        break;
      }
      default:
        throw ConfigError("JetLayout: order above 3 unsupported");
    }
  }
  if (entries_.empty() || entries_.front().order != 0)
    throw ConfigError("JetLayout: value channel missing");
  if (order_ >= 1)
    for (int i = 0; i < dim_; ++i)
      if (grad_idx_[i] < 0) throw ConfigError("JetLayout: all first-order channels required");
}

JetLayout JetLayout::value_only(int dim) {
  JetLayout l;
  l.dim_ = dim;
  l.entries_.push_back(make_channel({}));
  l.index_channels();
  return l;
}

JetLayout JetLayout::first_order(int dim) {
  JetLayout l;
  l.dim_ = dim;
  l.entries_.push_back(make_channel({}));
  for (int i = 0; i < dim; ++i) l.entries_.push_back(make_channel({i}));
  l.index_channels();
  return l;
}

JetLayout JetLayout::second_order(int dim) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) pairs.emplace_back(i, j);
  return second_order(dim, pairs);
}

JetLayout JetLayout::second_order(int dim, const std::vector<std::pair<int, int>>& pairs) {
  JetLayout l = first_order(dim);
  for (auto [i, j] : pairs) l.entries_.push_back(make_channel({i, j}));
  l.index_channels();
  return l;
}

JetLayout JetLayout::third_order(int dim) {
  JetLayout l = second_order(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j)
      for (int k = j; k < dim; ++k) l.entries_.push_back(make_channel({i, j, k}));
  l.index_channels();
  return l;
}

JetLayout JetLayout::gradient_closure() const {
  if (order_ > 2) throw ConfigError("JetLayout::gradient_closure: base order above 2");
  JetLayout l = *this;
  if (order_ == 0)
    for (int i = 0; i < dim_; ++i) l.entries_.push_back(make_channel({i}));
  for (const JetChannel& e : entries_) {
    for (int m = 0; m < dim_; ++m) {
      std::vector<int> ix(e.idx.begin(), e.idx.begin() + e.order);
      ix.push_back(m);
      l.entries_.push_back(make_channel(std::move(ix)));
    }
  }
  l.index_channels();
  return l;
}

int JetLayout::third_channel(int i, int j, int k) const {
  return third_idx_[(static_cast<std::size_t>(i) * dim_ + j) * dim_ + k];
}

int JetLayout::derivative_channel(int c, int m) const {
  const JetChannel& e = entries_[c];
  switch (e.order) {
    case 0:
      return grad_channel(m);
    case 1:
      return hess_channel(e.idx[0], m);
    case 2:
      return third_channel(e.idx[0], e.idx[1], m);
    default:
      return -1;
  }
}

double JetBatch::hess(int p, int o, int i, int j) const {
  const int c = layout_.hess_channel(i, j);
  if (c < 0) throw ConfigError("JetBatch: Hessian channel not present in layout");
  return channels(p, o)[c];
}

Jet2 JetBatch::to_jet2(int point, int output) const {
  const int d = layout_.dim();
  Jet2 jet;
  jet.value = value(point, output);
  jet.grad.resize(d);
  jet.hess.resize(static_cast<std::size_t>(d) * d);
  for (int i = 0; i < d; ++i) {
    jet.grad[i] = grad(point, output, i);
    for (int j = 0; j < d; ++j) jet.hess[static_cast<std::size_t>(i) * d + j] = hess(point, output, i, j);
  }
  return jet;
}

}  // namespace pinn
