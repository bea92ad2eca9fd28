#pragma once

#include <Eigen/Core>

#include "slda/corpus.hpp"
#include "slda/glm.hpp"

namespace slda {

struct ModelParams {
  double alpha = 1.0;        // symmetric Dirichlet parameter per component
  Eigen::MatrixXd log_beta;  // K x V, each row a log-simplex
  GlmParams glm;
  ResponseFamily family;
  TransformSpec transform;   // response transform recorded at training

  Eigen::Index num_topics() const { return log_beta.rows(); }
  Eigen::Index vocab_size() const { return log_beta.cols(); }
  Eigen::MatrixXd beta() const { return log_beta.array().exp(); }
};

}  // namespace slda
