#include "seq2rdf/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "seq2rdf/error.hpp"

namespace seq2rdf {
namespace {

double checked(double v) {
  if (!std::isfinite(v)) throw Error("grad_check_fd: loss is not finite");
  return v;
}

void record(GradCheckReport& report, const std::string& tensor, std::size_t index,
            double analytic, double numeric) {
  const double err = relative_error(analytic, numeric);
  ++report.coordinates;
  if (err > report.max_rel_error || report.coordinates == 1) {
    report.max_rel_error = std::max(report.max_rel_error, err);
    report.worst_tensor = tensor;
    report.worst_index = index;
    report.worst_analytic = analytic;
    report.worst_numeric = numeric;
  }
}

}  // namespace

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport grad_check_fd(const std::function<double(std::span<const double>)>& loss_fn,
                              std::span<const double> params, std::span<const double> analytic,
                              double eps) {
  if (!(eps > 0.0)) throw Error("grad_check_fd: eps must be positive");
  if (params.size() != analytic.size()) {
    throw Error("grad_check_fd: " + std::to_string(params.size()) + " params but " +
                std::to_string(analytic.size()) + " analytic gradients");
  }
  std::vector<double> point(params.begin(), params.end());
  GradCheckReport report;
  checked(loss_fn(point));
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double saved = point[i];
    point[i] = saved + eps;
    const double up = checked(loss_fn(point));
    point[i] = saved - eps;
    const double down = checked(loss_fn(point));
    point[i] = saved;
    record(report, "", i, analytic[i], (up - down) / (2.0 * eps));
  }
  return report;
}

GradCheckReport grad_check_fd(const std::function<double()>& loss_fn,
                              std::span<const NamedTensor> params,
                              std::span<const Tensor2* const> analytic, double eps) {
  if (!(eps > 0.0)) throw Error("grad_check_fd: eps must be positive");
  if (params.size() != analytic.size()) {
    throw Error("grad_check_fd: parameter and gradient sets differ in size");
  }
  GradCheckReport report;
  checked(loss_fn());
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor2& t = *params[k].tensor;
    if (!t.same_shape(*analytic[k])) {
      throw Error("grad_check_fd: gradient shape mismatch for " + params[k].name);
    }
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double saved = t.data()[i];
      t.data()[i] = saved + eps;
      const double up = checked(loss_fn());
      t.data()[i] = saved - eps;
      const double down = checked(loss_fn());
      t.data()[i] = saved;
      record(report, params[k].name, i, analytic[k]->data()[i], (up - down) / (2.0 * eps));
    }
  }
  return report;
}

}  // namespace seq2rdf
