#include "pinn/field.hpp"

namespace pinn {

void AnalyticField::eval_jets(const JetLayout& layout, std::span<const Point> points,
                              const ParameterVector& /*theta*/, JetBatch& out) const {
  if (layout.dim() != input_dim_) throw ConfigError("AnalyticField: layout dimension mismatch");
  out = JetBatch(layout, static_cast<int>(points.size()), output_dim_);

  // Evaluate on the full layout of the requested order, then project onto the
  // (possibly masked) requested channels.
  const JetLayout* full = full_layout(input_dim_, layout.order());
  std::vector<TaylorVar> coords(input_dim_);
  std::vector<TaylorVar> vals(output_dim_);
  for (std::size_t p = 0; p < points.size(); ++p) {
    const Point& pt = points[p];
    if (static_cast<int>(pt.size()) != input_dim_)
      throw ConfigError("AnalyticField: point dimension mismatch");
    for (int i = 0; i < input_dim_; ++i) coords[i] = TaylorVar::variable(full, pt[i], i);
    fn_(coords, vals);
    for (int o = 0; o < output_dim_; ++o) {
      double* dst = out.channels(static_cast<int>(p), o);
      const auto& entries = layout.entries();
      for (int c = 0; c < layout.channels(); ++c) {
        const JetChannel& e = entries[c];
        int src = -1;
        switch (e.order) {
          case 0: src = full->value_channel(); break;
          case 1: src = full->grad_channel(e.idx[0]); break;
          case 2: src = full->hess_channel(e.idx[0], e.idx[1]); break;
          case 3: src = full->third_channel(e.idx[0], e.idx[1], e.idx[2]); break;
        }
        dst[c] = vals[o].channels()[src];
      }
    }
  }
}

}  // namespace pinn
