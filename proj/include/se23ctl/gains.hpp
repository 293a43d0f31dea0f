#pragma once

#include <string>

#include <Eigen/Dense>

#include "se23ctl/errors.hpp"
#include "se23ctl/so3.hpp"

namespace se23ctl {

struct Gains {
  Mat3 kp = Mat3::Identity();
  Mat3 kv = Mat3::Identity();
  Mat3 kr = Mat3::Identity();
};

inline double min_eigenvalue(const Mat3& k) {
  return Eigen::SelfAdjointEigenSolver<Mat3>(k, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

/// Throws InvalidArgument naming the first gain that is not symmetric
/// positive-definite (symmetry tolerance 1e-12).
inline void validate_gains(const Gains& g) {
  auto check = [](const Mat3& k, const char* name) {
    if (!k.allFinite()) throw InvalidArgument(std::string(name) + ": non-finite entry");
    if ((k - k.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw InvalidArgument(std::string(name) + ": not symmetric");
    }
    if (!(min_eigenvalue(k) > 0.0)) {
      throw InvalidArgument(std::string(name) + ": not positive definite");
    }
  };
  check(g.kp, "K_p");
  check(g.kv, "K_v");
  check(g.kr, "K_r");
}

}  // namespace se23ctl
