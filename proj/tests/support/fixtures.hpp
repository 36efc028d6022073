#pragma once

#include "anacp/anacp.hpp"

namespace anacp::fixture {

// Desk-scale settings shared by the acceptance suite and the slower property
// tests. Ridge strengths were chosen by validation accuracy on a split of the
// training data (see calibrate.cpp); the test split played no part.
inline constexpr Index kDeskRpDim = 1000;

// Default synthetic benchmark: d=64, C=20, 100/class, mean_scale=2, identity.
inline constexpr double kBenchLambdaCp = 1e5;
inline constexpr double kBenchLambdaCls = 1e3;

// Clustered benchmark: four groups of five classes.
inline SynthSpec clustered_spec() {
  SynthSpec spec;
  spec.num_clusters = 4;
  spec.cluster_spread = 0.35;
  spec.mean_scale = 8.0;
  return spec;
}
inline constexpr double kClusterLambdaCp = 1e6;
inline constexpr double kClusterLambdaCls = 1e2;

inline LearnerConfig desk_anacp(double lambda_cp, double lambda_cls) {
  LearnerConfig c;
  c.rp_dim = kDeskRpDim;
  c.lambda_cp = lambda_cp;
  c.lambda_cls = lambda_cls;
  return c;
}

}  // namespace anacp::fixture
