#include "altgda/projection.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace altgda {

namespace {

double threshold(const double* v, Index d, double* scratch) {
  std::copy(v, v + d, scratch);
  std::sort(scratch, scratch + d, std::greater<double>());
  double cum = 0.0;
  double tau = scratch[0] - 1.0;
  for (Index j = 0; j < d; ++j) {
    cum += scratch[j];
    const double t = (cum - 1.0) / static_cast<double>(j + 1);
    if (scratch[j] - t > 0.0) tau = t;
  }
  return tau;
}

}  // namespace

double project_simplex_inplace(double* v, Index d, double* scratch) {
  const double tau = threshold(v, d, scratch);
  for (Index i = 0; i < d; ++i) v[i] = std::max(v[i] - tau, 0.0);
  return tau;
}

ProjectionResult project_simplex(VectorRef v) {
  if (v.size() < 1) throw Error(ErrorKind::kContract, "projection of an empty vector");
  if (!v.allFinite()) {
    throw Error(ErrorKind::kContract, "projection of a non-finite vector");
  }
  ProjectionResult r;
  r.point = v;
  Vector scratch(v.size());
  r.tau = project_simplex_inplace(r.point.data(), v.size(), scratch.data());
  for (Index i = 0; i < v.size(); ++i) {
    if (r.point[i] > 0.0) r.active_set.push_back(i);
  }
  return r;
}

Vector project_affine_hull(VectorRef v) {
  const double d = static_cast<double>(v.size());
  return v.array() - (v.sum() - 1.0) / d;
}

UpdateDecomposition decompose_update(const PayoffMatrix& a, double eta,
                                     VectorRef x_t, VectorRef y_t,
                                     VectorRef x_next, VectorRef y_next) {
  if (x_t.size() != a.cols() || x_next.size() != a.cols() ||
      y_t.size() != a.rows() || y_next.size() != a.rows()) {
    throw Error(ErrorKind::kContract, "decompose_update: dimension mismatch");
  }
  if (!(eta > 0.0)) {
    throw Error(ErrorKind::kContract, "decompose_update: eta must be > 0");
  }
  const auto& e = a.entries();
  UpdateDecomposition d;
  const Vector aty = e.transpose() * y_t;
  d.v = -aty.array() + aty.mean();
  ProjectionResult px = project_simplex(x_t + eta * d.v);
  const Vector ax = e * px.point;
  d.u = ax.array() - ax.mean();
  ProjectionResult py = project_simplex(y_t + eta * d.u);

  const double dx = (px.point - x_next).cwiseAbs().maxCoeff();
  const double dy = (py.point - y_next).cwiseAbs().maxCoeff();
  if (dx > 1e-9 || dy > 1e-9) {
    throw Error(ErrorKind::kNotAltGdaStep,
                "replayed step differs by " + format_double(std::max(dx, dy)));
  }
  d.gamma = (x_t + eta * d.v - px.point) / eta;
  d.lambda = (y_t + eta * d.u - py.point) / eta;
  d.gamma_bar = d.gamma.maxCoeff();
  d.lambda_bar = d.lambda.maxCoeff();
  d.tau_x = px.tau;
  d.tau_y = py.tau;
  d.active_x = std::move(px.active_set);
  d.active_y = std::move(py.active_set);
  d.x_next = std::move(px.point);
  d.y_next = std::move(py.point);
  return d;
}

UpdateDecomposition decompose_update(const PayoffMatrix& a, double eta,
                                     const MixedStrategy& x_t,
                                     const MixedStrategy& y_t,
                                     const MixedStrategy& x_next,
                                     const MixedStrategy& y_next) {
  return decompose_update(a, eta, x_t.probs(), y_t.probs(), x_next.probs(),
                          y_next.probs());
}

}  // namespace altgda
