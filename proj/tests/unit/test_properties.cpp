// End-to-end properties on the desk-scale synthetic benchmark.
#include "fixtures.hpp"
#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace anacp;

TEST(Properties, ReachesJointLinearProbe) {
  const SynthData data = generate_synthetic(SynthSpec{});
  LearnerConfig probe;
  probe.method = Method::incremental_ridge;
  const double joint = run_stream(probe, make_task_stream(data.train, data.test, 1, 0)).a_last;
  const LearnerConfig c = fixture::desk_anacp(fixture::kBenchLambdaCp, fixture::kBenchLambdaCls);
  const double ours = run_stream(c, make_task_stream(data.train, data.test, 5, 0)).a_last;
  EXPECT_GE(ours, joint - 1.0) << "anacp " << ours << " vs joint ridge probe " << joint;
}

TEST(Properties, IdenticalRunsGiveIdenticalReports) {
  const SynthData data = generate_synthetic(SynthSpec{});
  LearnerConfig c = fixture::desk_anacp(fixture::kBenchLambdaCp, fixture::kBenchLambdaCls);
  c.rp_dim = 200;
  const TaskStream s = make_task_stream(data.train, data.test, 5, 3);
  RunReport a = run_stream(c, s);
  RunReport b = run_stream(c, s);
  a.task_seconds.clear();
  b.task_seconds.clear();
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}
