#pragma once

#include <vector>

#include "altgda/game.hpp"

namespace altgda {

struct ProjectionResult {
  Vector point;
  double tau = 0.0;
  std::vector<Index> active_set;  // coordinates with point_i > 0
};

// Euclidean projection onto the probability simplex by sort-and-threshold.
// Coordinates with input_i - tau == 0 land on 0 and are not active.
ProjectionResult project_simplex(VectorRef v);

// Projection onto {z : sum z = 1}.
Vector project_affine_hull(VectorRef v);

// Allocation-free variant for hot loops: projects v in place and returns tau.
// `scratch` must hold at least `d` doubles.
double project_simplex_inplace(double* v, Index d, double* scratch);

struct UpdateDecomposition {
  Vector v;       // -A^T y^t centred
  Vector u;       // A x^{t+1} centred
  Vector gamma;   // (x^t + eta v - x^{t+1}) / eta
  Vector lambda;  // (y^t + eta u - y^{t+1}) / eta
  double gamma_bar = 0.0;
  double lambda_bar = 0.0;
  double tau_x = 0.0;
  double tau_y = 0.0;
  std::vector<Index> active_x;  // I^{t+1}
  std::vector<Index> active_y;  // J^{t+1}
  Vector x_next;  // replayed iterates
  Vector y_next;
};

// Decomposes one AltGDA step. The step is replayed internally and must match
// (x_next, y_next) within 1e-9, otherwise kNotAltGdaStep is thrown.
UpdateDecomposition decompose_update(const PayoffMatrix& a, double eta,
                                     VectorRef x_t, VectorRef y_t,
                                     VectorRef x_next, VectorRef y_next);
UpdateDecomposition decompose_update(const PayoffMatrix& a, double eta,
                                     const MixedStrategy& x_t,
                                     const MixedStrategy& y_t,
                                     const MixedStrategy& x_next,
                                     const MixedStrategy& y_next);

}  // namespace altgda
