#include "oracles.hpp"

#include <random>

namespace oracle {

Eigen::MatrixXd dense(const SparseMatrix& a) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(a.n_rows()),
                                            static_cast<Eigen::Index>(a.n_cols()));
  for (const auto& t : a.triples()) {
    m(static_cast<Eigen::Index>(t.row), static_cast<Eigen::Index>(t.col)) = t.value;
  }
  return m;
}

Eigen::VectorXd to_eigen(const Vector& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Vector from_eigen(const Eigen::VectorXd& v) { return Vector(v.data(), v.data() + v.size()); }

Eigen::VectorXd eigenvalues(const SparseMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

Vector solve_spd(const SparseMatrix& a, const Vector& b) {
  return from_eigen(dense(a).ldlt().solve(to_eigen(b)));
}

double quadratic_min(const SparseMatrix& a, const Vector& b) {
  const Eigen::VectorXd x = to_eigen(solve_spd(a, b));
  return -0.5 * to_eigen(b).dot(x);
}

std::vector<Eigen::VectorXd> naive_fw(const Eigen::MatrixXd& q, const Eigen::VectorXd& c, double R,
                                      std::size_t iters, sparseopt::FwSchedule schedule) {
  const Eigen::Index n = c.size();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::VectorXd> out{x};
  for (std::size_t k = 1; k <= iters; ++k) {
    const Eigen::VectorXd g = q * x - c;
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < n; ++i) {
      if (g(i) < g(best)) best = i;
    }
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
    if (g(best) < 0.0) y(best) = R;
    const double kd = static_cast<double>(k);
    const double gamma =
        schedule == sparseopt::FwSchedule::classic ? 2.0 / (kd + 1.0) : 2.0 / (kd + 2.0);
    x = (1.0 - gamma) * x + gamma * y;
    out.push_back(x);
  }
  return out;
}

SparseMatrix from_dense(const Eigen::MatrixXd& m, bool symmetric) {
  std::vector<sparseopt::Triple> t;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (m(i, j) != 0.0) {
        t.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), m(i, j)});
      }
    }
  }
  return SparseMatrix::build(std::move(t), static_cast<std::size_t>(m.rows()),
                             static_cast<std::size_t>(m.cols()), symmetric);
}

Eigen::MatrixXd random_spd(std::size_t n, double density, double shift, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(ni, ni);
  for (Eigen::Index i = 0; i < ni; ++i) {
    for (Eigen::Index j = 0; j < ni; ++j) {
      if (unif(rng) < density) b(i, j) = val(rng);
    }
  }
  Eigen::MatrixXd a = b.transpose() * b + shift * Eigen::MatrixXd::Identity(ni, ni);
  // Exact symmetry for the sparse builder.
  return 0.5 * (a + a.transpose());
}

}  // namespace oracle
