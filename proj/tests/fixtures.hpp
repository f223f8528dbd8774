#pragma once

#include "iclab/attention.hpp"

namespace iclab::test {

// Stored three-head, two-task parameters (d = 6, supports {1..4} and {3..6}).
// Features {1,2}, {3,4}, {5,6} share one omega value per head.
inline MultiTaskParams three_head_table() {
  const double s1c[3] = {-0.0316, 0.0779, -0.0837};
  const double sst[3] = {-0.0893, 0.0870, 0.0152};
  const double s2c[3] = {-0.0689, 0.0, 0.0927};
  MultiTaskParams p;
  p.omega.resize(3, 6);
  p.mu.resize(3, 2);
  for (int h = 0; h < 3; ++h) p.omega.row(h) << s1c[h], s1c[h], sst[h], sst[h], s2c[h], s2c[h];
  p.mu << -3.9911, -7.0742, 6.9204, 2.3371, -2.8739, 4.7399;
  return p;
}

inline TaskSpec two_overlapping_tasks() { return TaskSpec{2, {{1, 2, 3, 4}, {3, 4, 5, 6}}}; }

}  // namespace iclab::test
