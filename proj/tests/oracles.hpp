#pragma once

// Reference computations the library is checked against. Each one takes a
// different numerical route than the code under test.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "doco/random.hpp"

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline double pnorm_sq(const Vec& v, const Mat& P) { return v.dot(P * v); }

/// argmin_{||z|| <= D} (z-y)'P(z-y) by Newton's method on the secular
/// equation 1/||z(lambda)|| - 1/D = 0, with z(lambda) from an LDLT solve.
inline Vec metric_projection(const Vec& y, const Mat& P, double D) {
  if (y.norm() <= D) return y;
  const Eigen::Index n = y.size();
  const Vec Py = P * y;
  double lam = 0.0;
  for (int it = 0; it < 200; ++it) {
    const Mat M = P + lam * Mat::Identity(n, n);
    Eigen::LDLT<Mat> ldlt(M);
    const Vec z = ldlt.solve(Py);
    const Vec dz = -ldlt.solve(z);  // dz/dlambda
    const double nz = z.norm();
    const double phi = 1.0 / nz - 1.0 / D;
    const double dphi = -z.dot(dz) / (nz * nz * nz);
    const double step = phi / dphi;
    lam = std::max(0.0, lam - step);
    if (std::abs(step) <= 1e-15 * (1.0 + lam)) break;
  }
  return (P + lam * Mat::Identity(n, n)).ldlt().solve(Py);
}

/// Best of `samples` uniform points in the ball for (z-y)'P(z-y).
inline double sampled_min_metric_distance(const Vec& y, const Mat& P, double D, int samples,
                                          std::uint64_t seed) {
  doco::Rng rng(seed);
  double best = INFINITY;
  for (int s = 0; s < samples; ++s) {
    const Vec z = rng.in_ball(y.size(), D);
    best = std::min(best, pnorm_sq(z - y, P));
  }
  return best;
}

/// Undiscounted online Newton step with an explicit dense inverse each round.
struct ReferenceOns {
  Mat A;
  Vec theta;
  double eta;
  double D;

  ReferenceOns(Vec theta1, double eps, double eta_, double D_)
      : A(eps * Mat::Identity(theta1.size(), theta1.size())), theta(std::move(theta1)), eta(eta_),
        D(D_) {}

  void step(const Vec& g) {
    A += g * g.transpose();
    const Mat Ainv = A.inverse();
    theta = metric_projection(theta - Ainv * g / eta, A, D);
  }
};

/// argmin_theta sum_{i<=t} gamma^{t-i} 1/2 ||y_i - A_i theta||^2 via the
/// normal equations assembled from scratch.
inline Vec batch_weighted_ls(const std::vector<Mat>& As, const std::vector<Vec>& ys, double gamma,
                             std::size_t t) {
  const Eigen::Index n = As.front().cols();
  Mat H = Mat::Zero(n, n);
  Vec b = Vec::Zero(n);
  for (std::size_t i = 0; i < t; ++i) {
    const double w = std::pow(gamma, static_cast<double>(t - 1 - i));
    H += w * As[i].transpose() * As[i];
    b += w * As[i].transpose() * ys[i];
  }
  return H.llt().solve(b);
}

/// argmin_{||x|| <= D} 1/2 ||y - A x||^2 by projected gradient descent.
inline Vec projected_gradient_ls(const Mat& A, const Vec& y, double D, int iters = 200000) {
  const Mat H = A.transpose() * A;
  const Vec b = A.transpose() * y;
  const double L = Eigen::SelfAdjointEigenSolver<Mat>(H).eigenvalues().maxCoeff();
  Vec x = Vec::Zero(A.cols());
  for (int i = 0; i < iters; ++i) {
    Vec nx = x - (H * x - b) / L;
    if (nx.norm() > D) nx *= D / nx.norm();
    if ((nx - x).norm() < 1e-15) {
      x = nx;
      break;
    }
    x = nx;
  }
  return x;
}

/// Random m x n matrix with singular values in [sqrt(ell), sqrt(u)], both ends attained.
inline Mat design(doco::Rng& rng, int m, int n, double ell, double u) {
  Mat g(m, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i) g(i, j) = rng.normal();
  Eigen::JacobiSVD<Mat> svd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vec s(n);
  for (int i = 0; i < n; ++i) s[i] = std::sqrt(rng.uniform(ell, u));
  s[0] = std::sqrt(ell);
  if (n > 1) s[n - 1] = std::sqrt(u);
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

inline Mat random_spd(doco::Rng& rng, int n, double lo = 0.1, double hi = 10.0) {
  Mat g(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) g(i, j) = rng.normal();
  const Mat Q = Eigen::HouseholderQR<Mat>(g).householderQ();
  Vec ev(n);
  for (int i = 0; i < n; ++i) ev[i] = std::exp(rng.uniform(std::log(lo), std::log(hi)));
  Mat P = Q * ev.asDiagonal() * Q.transpose();
  return 0.5 * (P + P.transpose());
}

}  // namespace oracle
