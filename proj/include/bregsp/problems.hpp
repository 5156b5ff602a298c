#pragma once

#include "bregsp/operators.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace bregsp {

enum class ProblemKind { bilinear, quadratic };

std::string to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& s);

// Matrix description of a quadratic saddle function
//   f(x, y) = 0.5 x'Px + x'Ay - 0.5 y'Qy + b'x + c'y.
// The bilinear kind has P = 0 and Q = 0 (stored as empty matrices).
struct Instance {
  ProblemKind kind = ProblemKind::bilinear;
  Eigen::Index m = 0;
  Eigen::Index n = 0;
  Matrix A;
  Matrix P;
  Matrix Q;
  Vector b;
  Vector c;
  std::optional<std::uint64_t> seed;
  std::optional<double> scale;
  // Saddle point fixed at generation time, if any.
  std::optional<SaddlePoint> planted;
};

// f(x, y) = x'Ay + b'x + c'y. Saddle from the least-norm solutions of
// A y = -b and A'x = -c; throws NoSaddlePoint if either system is inconsistent.
SaddleProblem make_bilinear(const Matrix& A, const Vector& b, const Vector& c);

// Requires P, Q symmetric PSD. Saddle from the KKT system
//   [P A; A' -Q] [x; y] = [-b; -c].
SaddleProblem make_quadratic(const Matrix& P, const Matrix& Q, const Matrix& A, const Vector& b,
                             const Vector& c);

// Deterministic random instance. Entries of A (and of the square roots M of
// P = M'M, Q = M'M) are uniform on [-scale, scale], drawn row-major in the
// order A, M_P, M_Q; then the planted saddle x0, y0 uniform on [-scale, scale].
// b and c are chosen so that (x0, y0) is a saddle point.
SaddleProblem random_instance(ProblemKind kind, Eigen::Index m, Eigen::Index n, std::uint64_t seed,
                              double scale = 1.0);

SaddleProblem to_problem(const Instance& instance);

// JSON form: {kind, m, n, A, P, Q, b, c, seed}; matrices row-major flat arrays.
nlohmann::json instance_to_json(const Instance& instance);
Instance instance_from_json(const nlohmann::json& j);

}  // namespace bregsp
