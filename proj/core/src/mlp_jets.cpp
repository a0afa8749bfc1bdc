#include "src/mlp_jets.hpp"

namespace pinn::detail {

namespace {

using RowMajorMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using RowMajorMutMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using StridedCols = Eigen::Map<Eigen::MatrixXd, 0, Eigen::OuterStride<>>;
using ConstStridedCols = Eigen::Map<const Eigen::MatrixXd, 0, Eigen::OuterStride<>>;

// View of the value-channel columns (one per point) of a jet state matrix.
StridedCols value_columns(Eigen::MatrixXd& m, int channels) {
  return StridedCols(m.data(), m.rows(), m.cols() / channels,
                     Eigen::OuterStride<>(static_cast<Eigen::Index>(channels) * m.rows()));
}
ConstStridedCols value_columns(const Eigen::MatrixXd& m, int channels) {
  return ConstStridedCols(m.data(), m.rows(), m.cols() / channels,
                          Eigen::OuterStride<>(static_cast<Eigen::Index>(channels) * m.rows()));
}

}  // namespace

MlpJetEngine::MlpJetEngine(MLPConfig cfg, JetLayout layout)
    : cfg_(std::move(cfg)), layout_(std::move(layout)) {
  cfg_.validate();
  if (layout_.dim() != cfg_.input_dim) throw ConfigError("MlpJetEngine: layout dimension mismatch");

  widths_.push_back(cfg_.input_dim);
  for (int w : cfg_.hidden) widths_.push_back(w);
  widths_.push_back(cfg_.output_dim);
  int off = 0;
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    weight_off_.push_back(off);
    off += widths_[l] * widths_[l + 1];
    bias_off_.push_back(off);
    off += widths_[l + 1];
  }

  for (int c = 0; c < layout_.channels(); ++c) {
    const JetChannel& e = layout_.entries()[c];
    if (e.order == 2) {
      order2_.push_back({c, layout_.grad_channel(e.idx[0]), layout_.grad_channel(e.idx[1])});
    } else if (e.order == 3) {
      Order3Recipe r;
      r.ch = c;
      const int i = e.idx[0], j = e.idx[1], k = e.idx[2];
      r.pair_ch[0] = layout_.hess_channel(i, j);
      r.partner_ch[0] = layout_.grad_channel(k);
      r.pair_ch[1] = layout_.hess_channel(i, k);
      r.partner_ch[1] = layout_.grad_channel(j);
      r.pair_ch[2] = layout_.hess_channel(j, k);
      r.partner_ch[2] = layout_.grad_channel(i);
      r.gi = layout_.grad_channel(i);
      r.gj = layout_.grad_channel(j);
      r.gk = layout_.grad_channel(k);
      for (int s = 0; s < 3; ++s)
        if (r.pair_ch[s] < 0)
          throw ConfigError("MlpJetEngine: third-order layout misses a required Hessian pair");
      order3_.push_back(r);
    }
  }

  pre_.resize(cfg_.hidden.size());
  post_.resize(cfg_.hidden.size());
}

void MlpJetEngine::apply_tanh(const Eigen::MatrixXd& pre, Eigen::MatrixXd& post) const {
  const int K = layout_.channels();
  const Eigen::Index rows = pre.rows();
  post.resize(rows, pre.cols());

  // tanh of the value channels via the vectorized exp kernel; libm tanh is
  // scalar and would dominate the whole forward pass.
  const Eigen::OuterStride<> stride(static_cast<Eigen::Index>(K) * rows);
  ConstStridedCols values(pre.data(), rows, n_points_, stride);
  Eigen::ArrayXXd& t = scratch_t_;
  t = 1.0 - 2.0 / ((2.0 * values.array().max(-19.0).min(19.0)).exp() + 1.0);

  const int dim = layout_.dim();
  const bool need_f2 = !order2_.empty();
  const bool need_f3 = !order3_.empty();
  scratch_f1_.resize(rows, 1);
  scratch_f2_.resize(rows, 1);
  scratch_f3_.resize(rows, 1);
  double* f1 = scratch_f1_.data();
  double* f2 = scratch_f2_.data();
  double* f3 = scratch_f3_.data();
  for (int b = 0; b < n_points_; ++b) {
    const double* a = pre.data() + static_cast<std::size_t>(b) * K * rows;
    double* z = post.data() + static_cast<std::size_t>(b) * K * rows;
    const double* tb = t.data() + static_cast<std::size_t>(b) * rows;
    for (Eigen::Index n = 0; n < rows; ++n) {
      z[n] = tb[n];
      f1[n] = 1.0 - tb[n] * tb[n];
    }
    if (K == 1) continue;
    for (int i = 0; i < dim; ++i) {
      const std::size_t g = static_cast<std::size_t>(layout_.grad_channel(i)) * rows;
      for (Eigen::Index n = 0; n < rows; ++n) z[g + n] = f1[n] * a[g + n];
    }
    if (!need_f2) continue;
    for (Eigen::Index n = 0; n < rows; ++n) f2[n] = -2.0 * tb[n] * f1[n];
    for (const Order2Recipe& r : order2_) {
      const std::size_t c = static_cast<std::size_t>(r.ch) * rows;
      const std::size_t gi = static_cast<std::size_t>(r.gi) * rows;
      const std::size_t gj = static_cast<std::size_t>(r.gj) * rows;
      for (Eigen::Index n = 0; n < rows; ++n)
        z[c + n] = f1[n] * a[c + n] + f2[n] * a[gi + n] * a[gj + n];
    }
    if (!need_f3) continue;
    for (Eigen::Index n = 0; n < rows; ++n) f3[n] = f1[n] * (6.0 * tb[n] * tb[n] - 2.0);
    for (const Order3Recipe& r : order3_) {
      const std::size_t c = static_cast<std::size_t>(r.ch) * rows;
      const std::size_t p0 = static_cast<std::size_t>(r.pair_ch[0]) * rows;
      const std::size_t p1 = static_cast<std::size_t>(r.pair_ch[1]) * rows;
      const std::size_t p2 = static_cast<std::size_t>(r.pair_ch[2]) * rows;
      const std::size_t q0 = static_cast<std::size_t>(r.partner_ch[0]) * rows;
      const std::size_t q1 = static_cast<std::size_t>(r.partner_ch[1]) * rows;
      const std::size_t q2 = static_cast<std::size_t>(r.partner_ch[2]) * rows;
      const std::size_t gi = static_cast<std::size_t>(r.gi) * rows;
      const std::size_t gj = static_cast<std::size_t>(r.gj) * rows;
      const std::size_t gk = static_cast<std::size_t>(r.gk) * rows;
      for (Eigen::Index n = 0; n < rows; ++n)
        z[c + n] = f1[n] * a[c + n] +
                   f2[n] * (a[p0 + n] * a[q0 + n] + a[p1 + n] * a[q1 + n] + a[p2 + n] * a[q2 + n]) +
                   f3[n] * a[gi + n] * a[gj + n] * a[gk + n];
    }
  }
}

void MlpJetEngine::reverse_tanh(const Eigen::MatrixXd& pre, const Eigen::MatrixXd& post,
                                const Eigen::MatrixXd& post_adjoint,
                                Eigen::MatrixXd& pre_adjoint) const {
  if (!order3_.empty())
    throw ConfigError("MlpJetEngine: reverse propagation supports layouts up to order 2");
  const int K = layout_.channels();
  const Eigen::Index rows = pre.rows();
  pre_adjoint.resize(rows, pre.cols());

  const int dim = layout_.dim();
  scratch_f1_.resize(rows, 1);
  scratch_f2_.resize(rows, 1);
  scratch_f3_.resize(rows, 1);
  double* f1 = scratch_f1_.data();
  double* f2 = scratch_f2_.data();
  double* f3 = scratch_f3_.data();
  for (int b = 0; b < n_points_; ++b) {
    const std::size_t base = static_cast<std::size_t>(b) * K * rows;
    const double* a = pre.data() + base;
    const double* z = post.data() + base;
    const double* zb = post_adjoint.data() + base;
    double* ab = pre_adjoint.data() + base;
    for (Eigen::Index n = 0; n < rows; ++n) {
      const double t = z[n];
      f1[n] = 1.0 - t * t;
      f2[n] = -2.0 * t * f1[n];
      f3[n] = f1[n] * (6.0 * t * t - 2.0);
      ab[n] = zb[n] * f1[n];
    }
    if (K == 1) continue;
    for (int i = 0; i < dim; ++i) {
      const std::size_t g = static_cast<std::size_t>(layout_.grad_channel(i)) * rows;
      for (Eigen::Index n = 0; n < rows; ++n) {
        ab[n] += zb[g + n] * f2[n] * a[g + n];
        ab[g + n] = zb[g + n] * f1[n];
      }
    }
    for (const Order2Recipe& r : order2_) {
      const std::size_t c = static_cast<std::size_t>(r.ch) * rows;
      const std::size_t gi = static_cast<std::size_t>(r.gi) * rows;
      const std::size_t gj = static_cast<std::size_t>(r.gj) * rows;
      for (Eigen::Index n = 0; n < rows; ++n) {
        const double w = zb[c + n];
        ab[n] += w * (f2[n] * a[c + n] + f3[n] * a[gi + n] * a[gj + n]);
        ab[c + n] = w * f1[n];
        ab[gi + n] += w * f2[n] * a[gj + n];
        ab[gj + n] += w * f2[n] * a[gi + n];
      }
    }
  }
}

void MlpJetEngine::forward(const ParameterVector& theta, std::span<const Point> points) {
  if (static_cast<int>(theta.size()) != cfg_.param_count())
    throw ConfigError("MlpJetEngine: parameter vector length mismatch");
  n_points_ = static_cast<int>(points.size());
  const int K = layout_.channels();
  const Eigen::Index cols = static_cast<Eigen::Index>(n_points_) * K;

  input_.setZero(cfg_.input_dim, cols);
  for (int b = 0; b < n_points_; ++b) {
    const Point& p = points[b];
    if (static_cast<int>(p.size()) != cfg_.input_dim)
      throw ConfigError("MlpJetEngine: point dimension mismatch");
    const Eigen::Index base = static_cast<Eigen::Index>(b) * K;
    for (int i = 0; i < cfg_.input_dim; ++i) input_(i, base) = p[i];
    if (layout_.order() >= 1)
      for (int i = 0; i < cfg_.input_dim; ++i) input_(i, base + layout_.grad_channel(i)) = 1.0;
  }

  // Weights are copied into Eigen-allocated (hence consistently aligned)
  // matrices before any product: reductions over buffers with heap-dependent
  // alignment would otherwise change their summation split and break bitwise
  // reproducibility between runs of the same seed.
  const int n_layers = static_cast<int>(widths_.size()) - 1;
  w_cache_.resize(n_layers);
  bias_cache_.resize(n_layers);
  for (int l = 0; l < n_layers; ++l) {
    w_cache_[l] = RowMajorMap(theta.data() + weight_off_[l], widths_[l + 1], widths_[l]);
    bias_cache_[l] = Eigen::Map<const Eigen::VectorXd>(theta.data() + bias_off_[l], widths_[l + 1]);
  }

  const Eigen::MatrixXd* state = &input_;
  const int n_hidden = static_cast<int>(cfg_.hidden.size());
  for (int l = 0; l < n_hidden; ++l) {
    pre_[l].noalias() = w_cache_[l] * (*state);
    value_columns(pre_[l], K).colwise() += bias_cache_[l];
    apply_tanh(pre_[l], post_[l]);
    state = &post_[l];
  }
  out_.noalias() = w_cache_[n_hidden] * (*state);
  value_columns(out_, K).colwise() += bias_cache_[n_hidden];
}

void MlpJetEngine::extract(JetBatch& out) const {
  const int K = layout_.channels();
  out = JetBatch(layout_, n_points_, cfg_.output_dim);
  for (int b = 0; b < n_points_; ++b)
    for (int o = 0; o < cfg_.output_dim; ++o) {
      double* dst = out.channels(b, o);
      for (int c = 0; c < K; ++c) dst[c] = out_(o, static_cast<Eigen::Index>(b) * K + c);
    }
}

void MlpJetEngine::reverse(const ParameterVector& theta, const Eigen::MatrixXd& out_adjoint,
                           std::span<double> grad) {
  (void)theta;  // weights were cached by the preceding forward()
  const int K = layout_.channels();
  const int n_hidden = static_cast<int>(cfg_.hidden.size());
  Eigen::MatrixXd state_adjoint;  // adjoint of the post-activation state
  Eigen::MatrixXd pre_adjoint;

  // Products land in aligned temporaries; the unaligned gradient span only
  // ever sees elementwise adds, whose order does not depend on alignment.
  auto affine_reverse = [&](int l, const Eigen::MatrixXd& adj, const Eigen::MatrixXd& below) {
    wg_tmp_.resize(widths_[l + 1], widths_[l]);
    wg_tmp_.noalias() = adj * below.transpose();
    double* wg = grad.data() + weight_off_[l];
    for (int r = 0; r < widths_[l + 1]; ++r)
      for (int c = 0; c < widths_[l]; ++c) wg[static_cast<std::size_t>(r) * widths_[l] + c] += wg_tmp_(r, c);
    bg_tmp_.noalias() = value_columns(adj, K).rowwise().sum();
    double* bg = grad.data() + bias_off_[l];
    for (int r = 0; r < widths_[l + 1]; ++r) bg[r] += bg_tmp_[r];
  };

  const Eigen::MatrixXd& below_out = n_hidden > 0 ? post_[n_hidden - 1] : input_;
  affine_reverse(n_hidden, out_adjoint, below_out);
  if (n_hidden == 0) return;
  state_adjoint.noalias() = w_cache_[n_hidden].transpose() * out_adjoint;

  for (int l = n_hidden - 1; l >= 0; --l) {
    reverse_tanh(pre_[l], post_[l], state_adjoint, pre_adjoint);
    const Eigen::MatrixXd& below = l > 0 ? post_[l - 1] : input_;
    affine_reverse(l, pre_adjoint, below);
    if (l > 0) state_adjoint.noalias() = w_cache_[l].transpose() * pre_adjoint;
  }
}

}  // namespace pinn::detail
