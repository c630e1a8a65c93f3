#include "nonpure/residual.hpp"

#include <cmath>

namespace nonpure {

ResidualAccumulator::ResidualAccumulator(const BoxGrid* params, const BoxGrid* space)
    : params_(params), space_(space) {
  if (params_) weight_ *= params_->cell_volume();
  if (space_) weight_ *= space_->cell_volume();
}

void ResidualAccumulator::add(double r, std::size_t param_node, std::size_t space_node) {
  const double a = std::abs(r);
  // NaN compares false; keep it visible as the maximum.
  if (a > max_ || (std::isnan(a) && !std::isnan(max_)) || count_ == 0) {
    max_ = a;
    arg_param_ = param_node;
    arg_space_ = space_node;
  }
  sum_sq_ += a * a;
  ++count_;
}

ResidualReport ResidualAccumulator::finish() const {
  ResidualReport out;
  out.max_abs = max_;
  out.l2 = std::sqrt(sum_sq_ * weight_);
  out.samples = count_;
  if (params_) {
    out.du_used = params_->min_spacing();
    if (count_ > 0) {
      const Index idx = params_->unflat(arg_param_);
      out.location.param_index.assign(idx.begin(), idx.begin() + params_->dim());
    }
  }
  if (space_) {
    out.h_used = space_->min_spacing();
    if (count_ > 0) {
      const Index idx = space_->unflat(arg_space_);
      out.location.space_index.assign(idx.begin(), idx.begin() + space_->dim());
    }
  }
  return out;
}

}  // namespace nonpure
