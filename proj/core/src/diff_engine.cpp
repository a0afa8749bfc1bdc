#include "pinn/diff_engine.hpp"

#include <cmath>
#include <sstream>

#include "src/mlp_jets.hpp"

namespace pinn {

std::vector<Jet2> eval_jet2(const DifferentiableField& field, const Point& p,
                            const ParameterVector& theta) {
  JetBatch batch;
  const Point pts[1] = {p};
  field.eval_jets(JetLayout::second_order(field.input_dim()), std::span<const Point>(pts, 1),
                  theta, batch);
  std::vector<Jet2> out(field.output_dim());
  for (int o = 0; o < field.output_dim(); ++o) out[o] = batch.to_jet2(0, o);
  return out;
}

double ResidualSqTerm::value(int /*point_index*/, const Point& p, const JetLayout& layout,
                             const double* jets, std::span<const double> extras) const {
  ResidualArgs<double> args{std::span<const double>(p.data(), p.size()), jets, &layout, extras};
  double r[4];
  op_->eval(args, std::span<double>(r, op_->n_components));
  double sq = 0.0;
  for (int c = 0; c < op_->n_components; ++c) sq += r[c] * r[c];
  return sq;
}

void ResidualSqTerm::derivatives(int /*point_index*/, const Point& p, const JetLayout& layout,
                                 const double* jets, std::span<const double> extras,
                                 double* jet_adjoint, std::span<double> extras_adjoint) const {
  const int K = layout.channels();
  const int n_ch = op_->n_outputs * K;

  double r[4];
  {
    ResidualArgs<double> args{std::span<const double>(p.data(), p.size()), jets, &layout, extras};
    op_->eval(args, std::span<double>(r, op_->n_components));
  }

  std::vector<Dual> coords(p.begin(), p.end());
  std::vector<Dual> jets_dual(jets, jets + n_ch);
  std::vector<Dual> inv_dual(extras.begin(), extras.end());
  Dual rd[4];
  ResidualArgs<Dual> args{std::span<const Dual>(coords), jets_dual.data(), &layout,
                          std::span<const Dual>(inv_dual)};
  auto seeded_eval = [&](Dual& seed, double& out) {
    seed.d = 1.0;
    op_->eval_dual(args, std::span<Dual>(rd, op_->n_components));
    seed.d = 0.0;
    double acc = 0.0;
    for (int c = 0; c < op_->n_components; ++c) acc += 2.0 * r[c] * rd[c].d;
    out = acc;
  };
  for (int q = 0; q < n_ch; ++q) seeded_eval(jets_dual[q], jet_adjoint[q]);
  for (std::size_t e = 0; e < extras.size(); ++e) {
    double g = 0.0;
    seeded_eval(inv_dual[e], g);
    extras_adjoint[e] += g;
  }
}

double TargetMseTerm::value(int point_index, const Point& /*p*/, const JetLayout& layout,
                            const double* jets, std::span<const double> /*extras*/) const {
  const int K = layout.channels();
  double sq = 0.0;
  for (int o = 0; o < n_outputs_; ++o) {
    const double d = jets[o * K] - targets_[static_cast<std::size_t>(point_index) * n_outputs_ + o];
    sq += d * d;
  }
  return sq;
}

void TargetMseTerm::derivatives(int point_index, const Point& /*p*/, const JetLayout& layout,
                                const double* jets, std::span<const double> /*extras*/,
                                double* jet_adjoint, std::span<double> /*extras_adjoint*/) const {
  const int K = layout.channels();
  for (int o = 0; o < n_outputs_; ++o) {
    const double d = jets[o * K] - targets_[static_cast<std::size_t>(point_index) * n_outputs_ + o];
    jet_adjoint[o * K] = 2.0 * d;
  }
}

struct LossFunction::EngineCache {
  struct Entry {
    const DifferentiableField* field = nullptr;
    std::unique_ptr<detail::MlpJetEngine> engine;
    JetBatch jets;
  };
  std::vector<Entry> entries;
};

LossFunction::LossFunction() = default;
LossFunction::~LossFunction() = default;
LossFunction::LossFunction(LossFunction&&) noexcept = default;
LossFunction& LossFunction::operator=(LossFunction&&) noexcept = default;

double LossFunction::run(const ParameterVector& theta, std::span<double>* grad,
                         std::vector<double>* per_batch) const {
  if (!engines_) engines_ = std::make_unique<EngineCache>();
  engines_->entries.resize(batches.size());
  if (per_batch) per_batch->assign(batches.size(), 0.0);

  double total = 0.0;
  std::vector<double> jet_adjoint;
  std::vector<double> extras_adjoint;
  Eigen::MatrixXd out_adjoint;

  for (std::size_t bi = 0; bi < batches.size(); ++bi) {
    const LossBatch& batch = batches[bi];
    const int n = static_cast<int>(batch.points.size());
    if (n == 0 || batch.weight == 0.0) continue;

    auto& entry = engines_->entries[bi];
    const auto* mlp = dynamic_cast<const MLPField*>(batch.field);
    if (mlp != nullptr) {
      if (entry.field != batch.field || !(entry.engine->jet_layout() == batch.layout)) {
        entry.engine = std::make_unique<detail::MlpJetEngine>(mlp->config(), batch.layout);
        entry.field = batch.field;
      }
      entry.engine->forward(theta, batch.points);
      entry.engine->extract(entry.jets);
    } else {
      batch.field->eval_jets(batch.layout, batch.points, theta, entry.jets);
    }

    const int K = batch.layout.channels();
    const int n_out = batch.field->output_dim();
    std::span<const double> extras(theta.data() + theta.size() - batch.n_extras,
                                   static_cast<std::size_t>(batch.n_extras));

    double sum = 0.0;
    const double scale = batch.weight / n;
    if (grad != nullptr) {
      jet_adjoint.assign(static_cast<std::size_t>(n_out) * K, 0.0);
      extras_adjoint.assign(static_cast<std::size_t>(batch.n_extras), 0.0);
      out_adjoint.setZero(n_out, static_cast<Eigen::Index>(n) * K);
    }
    for (int i = 0; i < n; ++i) {
      const double* jets = entry.jets.channels(i, 0);
      sum += batch.term->value(i, batch.points[i], batch.layout, jets, extras);
      if (grad != nullptr) {
        std::fill(jet_adjoint.begin(), jet_adjoint.end(), 0.0);
        batch.term->derivatives(i, batch.points[i], batch.layout, jets, extras,
                                jet_adjoint.data(), extras_adjoint);
        for (int o = 0; o < n_out; ++o)
          for (int c = 0; c < K; ++c)
            out_adjoint(o, static_cast<Eigen::Index>(i) * K + c) = scale * jet_adjoint[o * K + c];
      }
    }
    if (grad != nullptr) {
      if (mlp != nullptr) entry.engine->reverse(theta, out_adjoint, *grad);
      for (int e = 0; e < batch.n_extras; ++e)
        (*grad)[theta.size() - batch.n_extras + e] += scale * extras_adjoint[e];
    }

    const double contribution = batch.weight * (sum / n);
    total += contribution;
    if (per_batch) (*per_batch)[bi] = contribution;
  }

  for (const ThetaTerm& t : theta_terms) {
    total += t.weight * t.value(theta);
    if (grad != nullptr) t.add_gradient(theta, t.weight, *grad);
  }

  if (!std::isfinite(total)) throw NumericError("non-finite loss value");
  return total;
}

double LossFunction::value(const ParameterVector& theta, std::vector<double>* per_batch) const {
  return run(theta, nullptr, per_batch);
}

double LossFunction::value_and_gradient(const ParameterVector& theta, std::span<double> grad,
                                        std::vector<double>* per_batch) const {
  if (grad.size() != theta.size())
    throw ConfigError("LossFunction: gradient span must match theta length");
  std::fill(grad.begin(), grad.end(), 0.0);
  return run(theta, &grad, per_batch);
}

std::vector<double> param_gradient(const LossFunction& loss, const ParameterVector& theta) {
  std::vector<double> grad(theta.size(), 0.0);
  loss.value_and_gradient(theta, grad);
  return grad;
}

struct ResidualValues::Impl {
  const ResidualOp& op;
  const DifferentiableField& field;
  JetLayout layout;
  std::unique_ptr<detail::MlpJetEngine> engine;
  JetBatch jets;
  std::vector<double> out;

  Impl(const ResidualOp& op_in, const DifferentiableField& field_in)
      : op(op_in),
        field(field_in),
        layout(JetLayout::second_order(field_in.input_dim(), op_in.hessian_pairs)) {
    if (const auto* mlp = dynamic_cast<const MLPField*>(&field))
      engine = std::make_unique<detail::MlpJetEngine>(mlp->config(), layout);
  }
};

ResidualValues::ResidualValues(const ResidualOp& op, const DifferentiableField& field)
    : impl_(std::make_unique<Impl>(op, field)) {}
ResidualValues::~ResidualValues() = default;
ResidualValues::ResidualValues(ResidualValues&&) noexcept = default;

int ResidualValues::n_components() const { return impl_->op.n_components; }

const std::vector<double>& ResidualValues::eval(std::span<const Point> points,
                                                const ParameterVector& theta,
                                                std::span<const double> inverse) {
  Impl& im = *impl_;
  if (im.engine) {
    im.engine->forward(theta, points);
    im.engine->extract(im.jets);
  } else {
    im.field.eval_jets(im.layout, points, theta, im.jets);
  }
  const int nc = im.op.n_components;
  im.out.resize(points.size() * static_cast<std::size_t>(nc));
  for (std::size_t i = 0; i < points.size(); ++i) {
    ResidualArgs<double> args{std::span<const double>(points[i].data(), points[i].size()),
                              im.jets.channels(static_cast<int>(i), 0), &im.layout, inverse};
    im.op.eval(args, std::span<double>(im.out.data() + i * nc, static_cast<std::size_t>(nc)));
  }
  return im.out;
}

struct SqResidualGradient::Impl {
  const ResidualOp& op;
  const DifferentiableField& field;
  JetLayout base;
  JetLayout extended;
  std::vector<int> src;
  std::vector<int> deriv;
  std::unique_ptr<detail::MlpJetEngine> engine;  // null for non-MLP fields
  JetBatch jets;
  std::vector<double> base_jets;
  std::vector<Dual> dual_jets;
  std::vector<Dual> coords;
  std::vector<std::vector<double>> grads;

  Impl(const ResidualOp& op_in, const DifferentiableField& field_in)
      : op(op_in),
        field(field_in),
        base(JetLayout::second_order(field_in.input_dim(), op_in.hessian_pairs)),
        extended(base.gradient_closure()) {
    const int d = field.input_dim();
    const int kb = base.channels();
    src.resize(kb);
    deriv.resize(static_cast<std::size_t>(kb) * d);
    for (int c = 0; c < kb; ++c) {
      const JetChannel& e = base.entries()[c];
      switch (e.order) {
        case 0: src[c] = extended.value_channel(); break;
        case 1: src[c] = extended.grad_channel(e.idx[0]); break;
        default: src[c] = extended.hess_channel(e.idx[0], e.idx[1]); break;
      }
      for (int m = 0; m < d; ++m)
        deriv[static_cast<std::size_t>(c) * d + m] = extended.derivative_channel(src[c], m);
    }
    if (const auto* mlp = dynamic_cast<const MLPField*>(&field))
      engine = std::make_unique<detail::MlpJetEngine>(mlp->config(), extended);
    base_jets.resize(static_cast<std::size_t>(field.output_dim()) * kb);
    dual_jets.resize(base_jets.size());
    coords.resize(d);
  }
};

SqResidualGradient::SqResidualGradient(const ResidualOp& op, const DifferentiableField& field)
    : impl_(std::make_unique<Impl>(op, field)) {}
SqResidualGradient::~SqResidualGradient() = default;
SqResidualGradient::SqResidualGradient(SqResidualGradient&&) noexcept = default;

const std::vector<std::vector<double>>& SqResidualGradient::eval(std::span<const Point> points,
                                                                 const ParameterVector& theta,
                                                                 std::span<const double> inverse) {
  Impl& im = *impl_;
  if (im.engine) {
    im.engine->forward(theta, points);
    im.engine->extract(im.jets);
  } else {
    im.field.eval_jets(im.extended, points, theta, im.jets);
  }

  const int d = im.field.input_dim();
  const int n_out = im.field.output_dim();
  const int kb = im.base.channels();
  const int ke = im.extended.channels();
  std::vector<Dual> inv_dual(inverse.begin(), inverse.end());
  double r[4];
  Dual rd[4];

  im.grads.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point& p = points[i];
    const double* ext = im.jets.channels(static_cast<int>(i), 0);
    for (int o = 0; o < n_out; ++o)
      for (int c = 0; c < kb; ++c)
        im.base_jets[static_cast<std::size_t>(o) * kb + c] = ext[o * ke + im.src[c]];

    ResidualArgs<double> args{std::span<const double>(p.data(), p.size()), im.base_jets.data(),
                              &im.base, inverse};
    im.op.eval(args, std::span<double>(r, im.op.n_components));

    std::vector<double>& g = im.grads[i];
    g.assign(d, 0.0);
    for (int m = 0; m < d; ++m) {
      for (int j = 0; j < d; ++j) im.coords[j] = Dual(p[j], j == m ? 1.0 : 0.0);
      for (int o = 0; o < n_out; ++o)
        for (int c = 0; c < kb; ++c) {
          const int dc = im.deriv[static_cast<std::size_t>(c) * d + m];
          im.dual_jets[static_cast<std::size_t>(o) * kb + c] =
              Dual(im.base_jets[static_cast<std::size_t>(o) * kb + c], ext[o * ke + dc]);
        }
      ResidualArgs<Dual> dual_args{std::span<const Dual>(im.coords), im.dual_jets.data(), &im.base,
                                   std::span<const Dual>(inv_dual)};
      im.op.eval_dual(dual_args, std::span<Dual>(rd, im.op.n_components));
      double acc = 0.0;
      for (int c = 0; c < im.op.n_components; ++c) acc += 2.0 * r[c] * rd[c].d;
      g[m] = acc;
    }
    for (double v : g)
      if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "point " << i << " (";
        for (std::size_t j = 0; j < p.size(); ++j) os << (j ? ", " : "") << p[j];
        os << ")";
        throw NumericError("non-finite residual input gradient", os.str());
      }
  }
  return im.grads;
}

std::vector<std::vector<double>> input_gradient_sq_residual_batch(
    const ResidualOp& op, const DifferentiableField& field, std::span<const Point> points,
    const ParameterVector& theta, std::span<const double> inverse) {
  SqResidualGradient evaluator(op, field);
  return evaluator.eval(points, theta, inverse);
}

std::vector<double> input_gradient_sq_residual(const ResidualOp& op,
                                               const DifferentiableField& field, const Point& p,
                                               const ParameterVector& theta,
                                               std::span<const double> inverse) {
  const Point pts[1] = {p};
  return input_gradient_sq_residual_batch(op, field, std::span<const Point>(pts, 1), theta,
                                          inverse)[0];
}

}  // namespace pinn
