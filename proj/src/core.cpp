#include "mvpose/core.hpp"

#include <set>

namespace mvpose {

void Skeleton::validate() const {
  const int j = joint_count();
  if (j < 2) throw std::invalid_argument("skeleton needs at least 2 joints");
  if (static_cast<int>(parent_index.size()) != j)
    throw std::invalid_argument("parent_index size does not match joint_names");
  if (root_index < 0 || root_index >= j)
    throw std::invalid_argument("root_index out of range");
  if (parent_index[root_index] != -1)
    throw std::invalid_argument("root joint must have parent -1");

  std::set<std::string> names(joint_names.begin(), joint_names.end());
  if (static_cast<int>(names.size()) != j)
    throw std::invalid_argument("joint names must be unique");

  // Every joint must reach the root without cycles.
  for (int i = 0; i < j; ++i) {
    int cur = i;
    int hops = 0;
    while (cur != root_index) {
      const int p = parent_index[cur];
      if (p < 0 || p >= j)
        throw std::invalid_argument("parent index out of range for joint " +
                                    joint_names[cur]);
      cur = p;
      if (++hops > j)
        throw std::invalid_argument("parent graph contains a cycle");
    }
  }
}

Skeleton Skeleton::h36m17() {
  Skeleton s;
  s.joint_names = {
      "pelvis",        "right_hip",   "right_knee",  "right_ankle",
      "left_hip",      "left_knee",   "left_ankle",  "spine",
      "thorax",        "neck",        "head",        "left_shoulder",
      "left_elbow",    "left_wrist",  "right_shoulder",
      "right_elbow",   "right_wrist"};
  s.parent_index = {-1, 0, 1, 2, 0, 4, 5, 0, 7, 8, 9, 8, 11, 12, 8, 14, 15};
  s.root_index = 0;
  s.validate();
  return s;
}

}  // namespace mvpose
