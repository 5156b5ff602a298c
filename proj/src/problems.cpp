#include "bregsp/problems.hpp"

#include "bregsp/detail/random.hpp"
#include "bregsp/errors.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

namespace bregsp {

namespace {

constexpr double kConsistencyTol = 1e-9;
constexpr double kPsdTol = 1e-10;

// Least-norm solution of M v = rhs, or nullopt when the system is inconsistent.
std::optional<Vector> least_norm_solve(const Matrix& M, const Vector& rhs) {
  if (M.rows() == M.cols()) {
    Eigen::FullPivLU<Matrix> rank_check(M);
    if (rank_check.isInvertible()) {
      Vector v = M.partialPivLu().solve(rhs);
      return v;
    }
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(M);
  Vector v = cod.solve(rhs);
  const double scale = std::max({1.0, rhs.norm(), M.norm() * v.norm()});
  if ((M * v - rhs).norm() > kConsistencyTol * scale) return std::nullopt;
  return v;
}

void require_psd(const Matrix& S, const char* name) {
  if (S.rows() != S.cols()) throw InvalidArgument(std::string(name) + " must be square");
  if (S.size() == 0) return;
  const double scale = std::max(1.0, S.lpNorm<Eigen::Infinity>());
  if ((S - S.transpose()).lpNorm<Eigen::Infinity>() > 1e-12 * scale) {
    throw InvalidArgument(std::string(name) + " must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kPsdTol) {
    throw InvalidArgument(std::string(name) + " must be positive semidefinite");
  }
}

struct QuadraticData {
  Matrix A, P, Q;
  Vector b, c;
  bool has_p = false;
  bool has_q = false;
};

SaddleProblem build(const std::shared_ptr<const QuadraticData>& d) {
  SaddleProblem p;
  p.m = d->A.rows();
  p.n = d->A.cols();
  p.f = [d](const Vector& x, const Vector& y) {
    double v = x.dot(d->A * y) + d->b.dot(x) + d->c.dot(y);
    if (d->has_p) v += 0.5 * x.dot(d->P * x);
    if (d->has_q) v -= 0.5 * y.dot(d->Q * y);
    return v;
  };
  p.grad_x = [d](const Vector& x, const Vector& y) -> Vector {
    Vector g = d->A * y + d->b;
    if (d->has_p) g += d->P * x;
    return g;
  };
  p.grad_y = [d](const Vector& x, const Vector& y) -> Vector {
    Vector g = d->A.transpose() * x + d->c;
    if (d->has_q) g -= d->Q * y;
    return g;
  };
  const double a_norm = spectral_norm(d->A);
  p.blocks.xy = a_norm;
  p.blocks.yx = a_norm;
  p.blocks.xx = d->has_p ? spectral_norm(d->P) : 0.0;
  p.blocks.yy = d->has_q ? spectral_norm(d->Q) : 0.0;
  return p;
}

void check_shapes(const Matrix& A, const Vector& b, const Vector& c) {
  if (A.rows() < 1 || A.cols() < 1) throw InvalidArgument("A must be at least 1x1");
  if (b.size() != A.rows()) throw InvalidArgument("b must have A.rows() entries");
  if (c.size() != A.cols()) throw InvalidArgument("c must have A.cols() entries");
}

std::vector<double> flatten(const Matrix& M) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(M.size()));
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) out.push_back(M(i, j));
  return out;
}

Matrix unflatten(const std::vector<double>& v, Eigen::Index rows, Eigen::Index cols,
                 const char* name) {
  if (static_cast<Eigen::Index>(v.size()) != rows * cols) {
    throw InvalidArgument(std::string(name) + " must have " + std::to_string(rows * cols) +
                          " entries");
  }
  Matrix M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = v[static_cast<std::size_t>(i * cols + j)];
  return M;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string to_string(ProblemKind kind) {
  return kind == ProblemKind::bilinear ? "bilinear" : "quadratic";
}

ProblemKind problem_kind_from_string(const std::string& s) {
  if (s == "bilinear") return ProblemKind::bilinear;
  if (s == "quadratic") return ProblemKind::quadratic;
  throw InvalidArgument("unknown problem kind '" + s + "'");
}

SaddleProblem make_bilinear(const Matrix& A, const Vector& b, const Vector& c) {
  check_shapes(A, b, c);
  auto data = std::make_shared<QuadraticData>();
  data->A = A;
  data->b = b;
  data->c = c;
  const auto y = least_norm_solve(A, -b);
  const auto x = least_norm_solve(A.transpose(), -c);
  if (!y) throw NoSaddlePoint("A y = -b has no solution");
  if (!x) throw NoSaddlePoint("A' x = -c has no solution");
  SaddleProblem p = build(data);
  p.saddle = SaddlePoint{*x, *y};
  auto inst = std::make_shared<Instance>();
  inst->kind = ProblemKind::bilinear;
  inst->m = A.rows();
  inst->n = A.cols();
  inst->A = A;
  inst->b = b;
  inst->c = c;
  p.source = inst;
  return p;
}

SaddleProblem make_quadratic(const Matrix& P, const Matrix& Q, const Matrix& A, const Vector& b,
                             const Vector& c) {
  check_shapes(A, b, c);
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  if (P.rows() != m || Q.rows() != n) throw InvalidArgument("P must be m x m and Q must be n x n");
  require_psd(P, "P");
  require_psd(Q, "Q");
  Matrix kkt(m + n, m + n);
  kkt << P, A, A.transpose(), -Q;
  Vector rhs(m + n);
  rhs << -b, -c;
  const auto z = least_norm_solve(kkt, rhs);
  if (!z) throw NoSaddlePoint("KKT system has no solution");
  auto data = std::make_shared<QuadraticData>();
  data->A = A;
  data->P = P;
  data->Q = Q;
  data->b = b;
  data->c = c;
  data->has_p = true;
  data->has_q = true;
  SaddleProblem p = build(data);
  p.saddle = SaddlePoint{z->head(m), z->tail(n)};
  auto inst = std::make_shared<Instance>();
  inst->kind = ProblemKind::quadratic;
  inst->m = m;
  inst->n = n;
  inst->A = A;
  inst->P = P;
  inst->Q = Q;
  inst->b = b;
  inst->c = c;
  p.source = inst;
  return p;
}

SaddleProblem random_instance(ProblemKind kind, Eigen::Index m, Eigen::Index n, std::uint64_t seed,
                              double scale) {
  if (m < 1 || n < 1) throw InvalidArgument("random_instance needs m, n >= 1");
  if (!(scale > 0.0)) throw InvalidArgument("random_instance needs scale > 0");
  detail::Rng rng(seed);
  Instance inst;
  inst.kind = kind;
  inst.m = m;
  inst.n = n;
  inst.seed = seed;
  inst.scale = scale;
  inst.A = rng.uniform_matrix(m, n, -scale, scale);
  if (kind == ProblemKind::quadratic) {
    const Matrix mp = rng.uniform_matrix(m, m, -scale, scale);
    const Matrix mq = rng.uniform_matrix(n, n, -scale, scale);
    inst.P = mp.transpose() * mp;
    inst.Q = mq.transpose() * mq;
    // exact symmetry regardless of summation order
    inst.P = (0.5 * (inst.P + inst.P.transpose())).eval();
    inst.Q = (0.5 * (inst.Q + inst.Q.transpose())).eval();
  }
  const Vector x0 = rng.uniform_vector(m, -scale, scale);
  const Vector y0 = rng.uniform_vector(n, -scale, scale);
  inst.b = -(inst.A * y0);
  inst.c = -(inst.A.transpose() * x0);
  if (kind == ProblemKind::quadratic) {
    inst.b -= inst.P * x0;
    inst.c += inst.Q * y0;
  }
  inst.planted = SaddlePoint{x0, y0};
  return to_problem(inst);
}

SaddleProblem to_problem(const Instance& instance) {
  auto data = std::make_shared<QuadraticData>();
  check_shapes(instance.A, instance.b, instance.c);
  data->A = instance.A;
  data->b = instance.b;
  data->c = instance.c;
  if (instance.kind == ProblemKind::quadratic) {
    require_psd(instance.P, "P");
    require_psd(instance.Q, "Q");
    data->P = instance.P;
    data->Q = instance.Q;
    data->has_p = true;
    data->has_q = true;
  }
  SaddleProblem p;
  if (instance.planted) {
    p = build(data);
    p.saddle = instance.planted;
    const Vector z = p.stacked_saddle();
    const double resid = saddle_operator(p)(z).norm();
    const double scale = std::max(1.0, lipschitz_from_blocks(p) * z.norm());
    if (!(resid <= 1e-10 * scale)) {
      throw NoSaddlePoint("stored saddle point does not zero the operator (residual " +
                          std::to_string(resid) + ")");
    }
  } else if (instance.kind == ProblemKind::bilinear) {
    p = make_bilinear(instance.A, instance.b, instance.c);
  } else {
    p = make_quadratic(instance.P, instance.Q, instance.A, instance.b, instance.c);
  }
  p.source = std::make_shared<Instance>(instance);
  return p;
}

nlohmann::json instance_to_json(const Instance& inst) {
  nlohmann::json j;
  j["kind"] = to_string(inst.kind);
  j["m"] = inst.m;
  j["n"] = inst.n;
  j["A"] = flatten(inst.A);
  if (inst.kind == ProblemKind::quadratic) {
    j["P"] = flatten(inst.P);
    j["Q"] = flatten(inst.Q);
  }
  j["b"] = to_std(inst.b);
  j["c"] = to_std(inst.c);
  if (inst.seed) j["seed"] = *inst.seed;
  if (inst.scale) j["scale"] = *inst.scale;
  if (inst.planted) {
    j["saddle_x"] = to_std(inst.planted->x);
    j["saddle_y"] = to_std(inst.planted->y);
  }
  return j;
}

Instance instance_from_json(const nlohmann::json& j) {
  const ProblemKind kind = problem_kind_from_string(j.at("kind").get<std::string>());
  const auto m = j.at("m").get<Eigen::Index>();
  const auto n = j.at("n").get<Eigen::Index>();
  if (m < 1 || n < 1) throw InvalidArgument("problem dimensions must be >= 1");
  if (!j.contains("A")) {
    // generated instance
    const auto seed = j.at("seed").get<std::uint64_t>();
    const double scale = j.value("scale", 1.0);
    return *random_instance(kind, m, n, seed, scale).source;
  }
  Instance inst;
  inst.kind = kind;
  inst.m = m;
  inst.n = n;
  inst.A = unflatten(j.at("A").get<std::vector<double>>(), m, n, "A");
  if (kind == ProblemKind::quadratic) {
    inst.P = unflatten(j.at("P").get<std::vector<double>>(), m, m, "P");
    inst.Q = unflatten(j.at("Q").get<std::vector<double>>(), n, n, "Q");
  }
  inst.b = j.contains("b") ? to_vector(j.at("b").get<std::vector<double>>()) : Vector::Zero(m);
  inst.c = j.contains("c") ? to_vector(j.at("c").get<std::vector<double>>()) : Vector::Zero(n);
  if (inst.b.size() != m || inst.c.size() != n) throw InvalidArgument("b or c has the wrong length");
  if (j.contains("seed")) inst.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("scale")) inst.scale = j.at("scale").get<double>();
  if (j.contains("saddle_x") && j.contains("saddle_y")) {
    SaddlePoint s{to_vector(j.at("saddle_x").get<std::vector<double>>()),
                  to_vector(j.at("saddle_y").get<std::vector<double>>())};
    if (s.x.size() != m || s.y.size() != n) throw InvalidArgument("saddle has the wrong length");
    inst.planted = s;
  }
  return inst;
}

}  // namespace bregsp
