#include <doctest.h>

#include "mvpose/sample.hpp"

using namespace mvpose;

namespace {

MultiviewSample two_view_sample(int frames_a, int frames_b, int joints = 4) {
  MultiviewSample s;
  s.sequence_id = "seq";
  for (int v = 0; v < 2; ++v) {
    View view;
    view.view_id = "v" + std::to_string(v);
    view.camera.fx = view.camera.fy = 1000;
    view.camera.width = 1920;
    view.camera.height = 1080;
    view.pose2d.frame_rate_hz = 25;
    const int frames = v == 0 ? frames_a : frames_b;
    for (int f = 0; f < frames; ++f) view.pose2d.frames.push_back(Pose2D::zero(joints));
    s.views.push_back(std::move(view));
  }
  return s;
}

}  // namespace

TEST_CASE("h36m17 skeleton is a valid 17-joint tree") {
  const Skeleton s = Skeleton::h36m17();
  CHECK(s.joint_count() == 17);
  CHECK(s.root_index == 0);
  CHECK(s.joint_names[0] == "pelvis");
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("skeleton validation rejects malformed trees") {
  Skeleton s = Skeleton::h36m17();
  s.parent_index[3] = 3;  // self-parent cycle
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);

  Skeleton dup = Skeleton::h36m17();
  dup.joint_names[1] = dup.joint_names[2];
  CHECK_THROWS_AS(dup.validate(), std::invalid_argument);

  Skeleton tiny;
  tiny.joint_names = {"only"};
  tiny.parent_index = {-1};
  CHECK_THROWS_AS(tiny.validate(), std::invalid_argument);
}

TEST_CASE("view pairs: single pair for two views") {
  const auto sample = two_view_sample(3, 3);
  const auto pairs = enumerate_view_pairs(sample);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].first == "v0");
  CHECK(pairs[0].second == "v1");
}

TEST_CASE("view pairs: C(N,2) pairs in canonical order") {
  CHECK(view_index_pairs(4).size() == 6);
  // brute-force count for N=7
  int count = 0;
  for (int a = 0; a < 7; ++a)
    for (int b = a + 1; b < 7; ++b) ++count;
  CHECK(view_index_pairs(7).size() == static_cast<std::size_t>(count));
  CHECK(count == 21);

  const auto pairs = view_index_pairs(4);
  CHECK(pairs.front() == std::pair<int, int>{0, 1});
  CHECK(pairs.back() == std::pair<int, int>{2, 3});
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    CHECK(pairs[i].first < pairs[i].second);
    if (i > 0) CHECK(pairs[i - 1] < pairs[i]);  // lexicographic
  }
}

TEST_CASE("view pairs: length law and determinism") {
  for (int n = 2; n <= 10; ++n) {
    const auto a = view_index_pairs(n);
    const auto b = view_index_pairs(n);
    CHECK(a.size() == static_cast<std::size_t>(n) * (n - 1) / 2);
    CHECK(a == b);
  }
  MultiviewSample single = two_view_sample(3, 3);
  single.views.resize(1);
  CHECK_THROWS_AS(enumerate_view_pairs(single), std::invalid_argument);
}

TEST_CASE("validate_sample: well-formed sample passes") {
  CHECK(validate_sample(two_view_sample(10, 10)).empty());
}

TEST_CASE("validate_sample: frame count mismatch reported") {
  const auto violations = validate_sample(two_view_sample(10, 9));
  REQUIRE_FALSE(violations.empty());
  bool found = false;
  for (const auto& v : violations)
    if (v.find("frame count mismatch") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("validate_sample: NaN names view, frame and joint") {
  auto sample = two_view_sample(5, 5);
  sample.views[1].pose2d.frames[3].coords(2, 0) =
      std::numeric_limits<double>::quiet_NaN();
  const auto violations = validate_sample(sample);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].find("v1") != std::string::npos);
  CHECK(violations[0].find("frame 3") != std::string::npos);
  CHECK(violations[0].find("joint 2") != std::string::npos);
}

TEST_CASE("validate_sample: confidence range enforced") {
  auto sample = two_view_sample(2, 2);
  sample.views[0].pose2d.frames[0].confidence[1] = 1.5;
  CHECK_FALSE(validate_sample(sample).empty());
}
