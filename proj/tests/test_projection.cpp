#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "altgda/projection.hpp"
#include "oracles.hpp"

using namespace altgda;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Vector random_vector(std::mt19937_64& g, Index d, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  Vector v(d);
  for (Index i = 0; i < d; ++i) v[i] = n(g);
  return v;
}

}  // namespace

TEST_CASE("simplex projection reference points") {
  auto r = project_simplex(vec({1.0 / 3, 1.0 / 3, 1.0 / 3}));
  CHECK((r.point - vec({1.0 / 3, 1.0 / 3, 1.0 / 3})).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(std::abs(r.tau) <= 1e-15);
  CHECK(r.active_set.size() == 3);

  r = project_simplex(vec({2, 0, 0}));
  CHECK(r.point == vec({1, 0, 0}));
  CHECK(r.tau == 1.0);
  CHECK(r.active_set == std::vector<Index>{0});

  r = project_simplex(vec({0.5, 0.5, 0.8}));
  CHECK((r.point - vec({0.23333333333333334, 0.23333333333333334, 0.53333333333333333}))
            .cwiseAbs()
            .maxCoeff() <= 1e-15);
  CHECK(r.tau == doctest::Approx(0.26666666666666666).epsilon(1e-14));

  CHECK_THROWS_AS(project_simplex(Vector(0)), Error);
}

TEST_CASE("ties at the threshold are inactive") {
  // Input (1.5, 0.5): tau = 0.5 leaves coordinate 1 exactly at zero.
  auto r = project_simplex(vec({1.5, 0.5}));
  CHECK(r.point == vec({1, 0}));
  CHECK(r.active_set == std::vector<Index>{0});
}

TEST_CASE("affine hull projection") {
  CHECK((project_affine_hull(vec({1.3, 0, 0})) - vec({1.2, -0.1, -0.1})).cwiseAbs().maxCoeff() <=
        1e-15);
  CHECK(project_affine_hull(vec({0, 0})) == vec({0.5, 0.5}));
  const Vector p = vec({0.2, 0.3, 0.5});
  CHECK((project_affine_hull(p) - p).cwiseAbs().maxCoeff() <= 1e-16);
}

TEST_CASE("sort-threshold projection agrees with the active-set oracle") {
  std::mt19937_64 g(5);
  double worst = 0.0;
  for (int k = 0; k < 2000; ++k) {
    const Index d = 2 + k % 7;
    const Vector v = random_vector(g, d, 1.0 + k % 3);
    const Vector ours = project_simplex(v).point;
    worst = std::max(worst, (ours - oracle::project_simplex(v)).cwiseAbs().maxCoeff());
    CHECK(ours.minCoeff() >= 0.0);
    CHECK(std::abs(ours.sum() - 1.0) <= 1e-12);
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("projection through the affine hull and nonexpansiveness") {
  std::mt19937_64 g(17);
  for (int k = 0; k < 10000; ++k) {
    const Index d = 1 + k % 10;
    const Vector a = random_vector(g, d, 2.0);
    const Vector b = random_vector(g, d, 2.0);
    const Vector pa = project_simplex(a).point;
    CHECK((pa - project_simplex(project_affine_hull(a)).point).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((pa - project_simplex(b).point).norm() <= (a - b).norm() + 1e-12);
  }
}

TEST_CASE("decomposition of a hand-computed rock paper scissors step") {
  const PayoffMatrix rps = rock_paper_scissors();
  const double eta = 0.01;
  const Vector x0 = vec({1, 0, 0});
  const Vector y0 = vec({0, 1, 0});
  const Vector x1 = vec({0.99, 0, 0.01});
  const Vector y1 = vec({0, 1, 0});
  const auto d = decompose_update(rps, eta, x0, y0, x1, y1);
  CHECK((d.x_next - x1).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(d.y_next == y1);
  CHECK(d.gamma.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(std::abs(d.v.sum()) <= 1e-12);
  CHECK(std::abs(d.u.sum()) <= 1e-12);
  CHECK((d.lambda - vec({0.01, 0.98, -0.99})).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(d.lambda_bar == doctest::Approx(0.98).epsilon(1e-12));
  CHECK(d.active_y == std::vector<Index>{1});
  CHECK(std::abs(eta * d.lambda_bar - d.tau_y) <= 1e-12);
  // Reconstruction identities.
  CHECK((x0 + eta * d.v - eta * d.gamma - x1).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((y0 + eta * d.u - eta * d.lambda - y1).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("interior steps have zero nonsmooth parts") {
  const PayoffMatrix rps = rock_paper_scissors();
  const Vector x0 = vec({0.3, 0.3, 0.4});
  const Vector y0 = vec({0.35, 0.35, 0.3});
  const Vector x1 = project_simplex(x0 - 0.05 * rps.entries().transpose() * y0).point;
  const Vector y1 = project_simplex(y0 + 0.05 * rps.entries() * x1).point;
  const auto d = decompose_update(rps, 0.05, x0, y0, x1, y1);
  CHECK(d.gamma.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(d.lambda.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("decomposition rejects non-steps") {
  const PayoffMatrix rps = rock_paper_scissors();
  try {
    decompose_update(rps, 0.01, vec({1, 0, 0}), vec({0, 1, 0}), vec({1, 0, 0}),
                     vec({0, 1, 0}));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNotAltGdaStep);
  }
}

TEST_CASE("nonsmooth-term properties along random trajectories") {
  std::mt19937_64 g(3);
  for (int game = 0; game < 10; ++game) {
    GameSpec spec{2 + game % 4, 3 + game % 3, Distribution::kNormal,
                  static_cast<std::uint64_t>(game), std::nullopt};
    const PayoffMatrix a = generate_game(spec);
    const double eta = 0.3;
    Vector x = Vector::Constant(a.cols(), 1.0 / a.cols());
    Vector y = Vector::Constant(a.rows(), 1.0 / a.rows());
    for (int t = 0; t < 200; ++t) {
      const Vector xn = project_simplex(x - eta * a.entries().transpose() * y).point;
      const Vector yn = project_simplex(y + eta * a.entries() * xn).point;
      const auto d = decompose_update(a, eta, x, y, xn, yn);
      CHECK(std::abs(eta * d.gamma_bar - d.tau_x) <= 1e-10);
      CHECK(std::abs(eta * d.lambda_bar - d.tau_y) <= 1e-10);
      for (Index i : d.active_x) CHECK(std::abs(d.gamma[i] - d.gamma_bar) <= 1e-10);
      CHECK(d.gamma_bar >= -1e-10);
      CHECK(d.lambda_bar >= -1e-10);
      for (Index i = 0; i < a.cols(); ++i)
        if (d.gamma[i] <= 0) CHECK(std::abs(d.gamma[i]) <= std::abs(d.v[i]) + 1e-10);
      for (Index j = 0; j < a.rows(); ++j)
        if (d.lambda[j] <= 0) CHECK(std::abs(d.lambda[j]) <= std::abs(d.u[j]) + 1e-10);
      // <gamma, x^{t+1} - p> >= 0 at a vertex probe.
      const Index k = static_cast<Index>(g() % static_cast<std::uint64_t>(a.cols()));
      CHECK(d.gamma.dot(xn) - d.gamma[k] >= -1e-10);
      x = xn;
      y = yn;
    }
  }
}
