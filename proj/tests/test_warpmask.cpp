#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "scenefill/io.hpp"
#include "scenefill/synth.hpp"
#include "scenefill/warpmask.hpp"

using namespace scenefill;
using namespace scenefill::warpmask;

namespace {

DepthMap constant_depth(int h, int w, float value) {
  return DepthMap{GridF::Constant(h, w, value)};
}

}  // namespace

TEST_CASE("removal_region basics") {
  DepthMap a = constant_depth(4, 4, 2.0f);
  DepthMap b = constant_depth(4, 4, 2.0f);
  CHECK(removal_region(a, b, 0.05).empty());

  b.values(1, 2) = 2.5f;
  const BinaryMask m = removal_region(a, b, 0.05);
  CHECK(m.count() == 1);
  CHECK(m.values(1, 2) == 1);

  // invalid in incomplete but valid in full counts as removed
  b.values(1, 2) = 2.0f;
  b.values(3, 3) = 0.0f;
  const BinaryMask m2 = removal_region(a, b, 10.0);
  CHECK(m2.count() == 1);
  CHECK(m2.values(3, 3) == 1);

  DepthMap wrong = constant_depth(3, 4, 2.0f);
  CHECK_THROWS_AS(removal_region(a, wrong, 0.05), DimensionError);
  CHECK_THROWS_AS(removal_region(a, b, 0.0), ConfigError);
}

TEST_CASE("removal_region matches the analytic object footprint on the ring scene") {
  const synth::SceneSpec scene = synth::default_ring_scene(4, 64);
  for (const auto& view : scene.views) {
    const DepthMap d_full = synth::render_depth(view, scene, true);
    const DepthMap d_bg = synth::render_depth(view, scene, false);
    const BinaryMask footprint = synth::object_mask(view, scene);
    const BinaryMask removal = removal_region(d_full, d_bg, default_eps_d(d_full));
    CHECK((removal.values == footprint.values).all());
  }
}

TEST_CASE("traverse_removal with identity transform reproduces the mask on valid pixels") {
  const CameraIntrinsics k(80, 80, 31.5, 31.5, 64, 64);
  std::mt19937_64 rng(23);
  BinaryMask r_i = BinaryMask::zeros(64, 64);
  for (long i = 0; i < r_i.values.size(); ++i) r_i.values.data()[i] = rng() % 2;
  DepthMap depth = constant_depth(64, 64, 3.0f);
  depth.values(5, 5) = 0.0f;  // one invalid pixel

  const TraverseResult res = traverse_removal(r_i, depth, Pose{}, k, k);
  for (int v = 0; v < 64; ++v)
    for (int u = 0; u < 64; ++u) {
      if (v == 5 && u == 5) {
        CHECK(res.votes.values(v, u) == 0.0f);
        CHECK(res.valid.values(v, u) == 0);
      } else {
        CHECK(res.votes.values(v, u) == float(r_i.values(v, u)));
        CHECK(res.valid.values(v, u) == 1);
      }
    }
}

TEST_CASE("cameras facing apart yield an all-zero vote grid") {
  const CameraIntrinsics k(80, 80, 31.5, 31.5, 64, 64);
  BinaryMask r_i = BinaryMask::zeros(64, 64);
  r_i.values.setConstant(1);
  DepthMap depth = constant_depth(64, 64, 3.0f);
  // 180-degree rotation about y: everything lands behind camera i
  Eigen::Matrix3d flip;
  flip << -1, 0, 0, 0, 1, 0, 0, 0, -1;
  const TraverseResult res = traverse_removal(r_i, depth, Pose(flip, Eigen::Vector3d::Zero()), k, k);
  CHECK((res.votes.values == 0.0f).all());
  CHECK(res.valid.values.cast<int>().sum() == 0);
}

TEST_CASE("traverse_removal agrees with the ray-correspondence oracle on two-view planar scenes") {
  // 20 random two-view configurations over a plane; the oracle maps each pixel
  // through the scene geometry instead of the depth grid.
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> radius(3.0, 5.0), height(1.5, 3.0);

  for (int config = 0; config < 20; ++config) {
    synth::SceneSpec scene;
    synth::Primitive ground;
    ground.kind = synth::Primitive::Kind::kGroundPlane;
    scene.primitives.push_back(ground);
    synth::Primitive box;
    box.kind = synth::Primitive::Kind::kBox;
    box.is_object = true;
    box.box_min = {-0.5, -0.5, 0.0};
    box.box_max = {0.5, 0.5, 1.0};
    scene.primitives.push_back(box);

    const CameraIntrinsics k(60, 60, 23.5, 23.5, 48, 48);
    const double a0 = angle(rng), a1 = angle(rng);
    scene.views.push_back({"n", k,
                           synth::look_at({radius(rng) * std::cos(a0), radius(rng) * std::sin(a0),
                                           height(rng)},
                                          {0, 0, 0})});
    scene.views.push_back({"i", k,
                           synth::look_at({radius(rng) * std::cos(a1), radius(rng) * std::sin(a1),
                                           height(rng)},
                                          {0, 0, 0})});

    const auto& vn = scene.views[0];
    const auto& vi = scene.views[1];
    const DepthMap d_n = synth::render_depth(vn, scene, false);  // planar scene, no object depth
    const BinaryMask r_i = synth::object_mask(vi, scene);

    const TraverseResult got =
        traverse_removal(r_i, d_n, relative_transform(vn.pose, vi.pose), k, k);

    int agree = 0, valid = 0;
    for (int v = 0; v < 48; ++v)
      for (int u = 0; u < 48; ++u) {
        if (d_n.values(v, u) <= 0.0f) continue;
        // oracle: scene-geometry correspondence, nearest-pixel gather
        const synth::Hit hit = synth::cast_pixel_ray(vn, scene, u, v, false);
        REQUIRE(hit.valid);
        const Eigen::Vector3d dir_cam((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
        const Eigen::Vector3d world =
            vn.pose.camera_center() + hit.depth * (vn.pose.rotation.transpose() * dir_cam);
        const Eigen::Vector3d in_i = vi.pose.apply(world);
        int oracle_vote = 0;
        bool oracle_valid = false;
        if (in_i.z() > 0) {
          const double ui = k.fx * in_i.x() / in_i.z() + k.cx;
          const double vi_pix = k.fy * in_i.y() / in_i.z() + k.cy;
          if (ui >= 0 && ui < 48 && vi_pix >= 0 && vi_pix < 48) {
            oracle_valid = true;
            const int uu = std::min(47, int(std::lround(ui)));
            const int vv = std::min(47, int(std::lround(vi_pix)));
            oracle_vote = r_i.values(vv, uu);
          }
        }
        if (!oracle_valid) continue;
        ++valid;
        if (int(got.votes.values(v, u) > 0.5f) == oracle_vote) ++agree;
      }
    REQUIRE(valid > 500);
    CHECK(double(agree) / double(valid) >= 0.99);
  }
}

TEST_CASE("aggregate_contour threshold semantics") {
  BinaryMask r_n = BinaryMask::zeros(4, 4);
  r_n.values(1, 1) = r_n.values(2, 2) = 1;

  // K=1, votes equal to r_n
  VoteGrid same{r_n.values.cast<float>().eval()};
  const BinaryMask c = aggregate_contour(std::vector<VoteGrid>{same}, r_n, 0.6);
  CHECK((c.values == r_n.values).all());

  // all-zero votes -> empty regardless of theta
  const BinaryMask none =
      aggregate_contour(std::vector<VoteGrid>{VoteGrid::zeros(4, 4)}, r_n, 0.1);
  CHECK(none.empty());

  // 3 of 5 views voting (mean 0.6) with theta 0.6 -> set (inclusive >=)
  std::vector<VoteGrid> five;
  for (int i = 0; i < 5; ++i) {
    VoteGrid g = VoteGrid::zeros(4, 4);
    if (i < 3) g.values(1, 1) = 1.0f;
    five.push_back(g);
  }
  const BinaryMask three_of_five = aggregate_contour(five, r_n, 0.6);
  CHECK(three_of_five.values(1, 1) == 1);
  CHECK(three_of_five.count() == 1);

  CHECK_THROWS_AS(aggregate_contour(std::vector<VoteGrid>{}, r_n, 0.6), DataError);
}

TEST_CASE("contour is always a subset of the removal region") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 50; ++trial) {
    BinaryMask r_n = BinaryMask::zeros(8, 8);
    VoteGrid votes = VoteGrid::zeros(8, 8);
    for (long i = 0; i < 64; ++i) {
      r_n.values.data()[i] = rng() % 2;
      votes.values.data()[i] = float(rng() % 101) / 100.0f;
    }
    const BinaryMask c = aggregate_contour(votes, r_n, 0.6);
    CHECK(((c.values == 1 && r_n.values == 0).cast<int>().sum()) == 0);
  }
}

TEST_CASE("bbox_prompt bounds, padding and clamping") {
  BinaryMask m = BinaryMask::zeros(12, 12);
  m.values(4, 3) = 1;  // (x=3, y=4)
  m.values(9, 5) = 1;  // (x=5, y=9)
  const BBox tight = bbox_prompt(m, 0);
  CHECK(tight.x_min == 3);
  CHECK(tight.y_min == 4);
  CHECK(tight.x_max == 5);
  CHECK(tight.y_max == 9);

  BinaryMask single = BinaryMask::zeros(10, 10);
  single.values(4, 3) = 1;
  const BBox padded = bbox_prompt(single, 2);
  CHECK(padded.x_min == 1);
  CHECK(padded.y_min == 2);
  CHECK(padded.x_max == 5);
  CHECK(padded.y_max == 6);

  BinaryMask corner = BinaryMask::zeros(10, 10);
  corner.values(0, 0) = 1;
  const BBox clamped = bbox_prompt(corner, 2);
  CHECK(clamped.x_min == 0);
  CHECK(clamped.y_min == 0);
  CHECK(clamped.x_max == 2);
  CHECK(clamped.y_max == 2);

  CHECK_THROWS_AS(bbox_prompt(BinaryMask::zeros(4, 4), 0), DataError);
}

TEST_CASE("bbox always contains every set pixel") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    BinaryMask m = BinaryMask::zeros(16, 16);
    for (int i = 0; i < 10; ++i) m.values(rng() % 16, rng() % 16) = 1;
    const BBox box = bbox_prompt(m, int(rng() % 3));
    for (int v = 0; v < 16; ++v)
      for (int u = 0; u < 16; ++u)
        if (m.values(v, u) == 1) CHECK(box.contains(u, v));
  }
}

TEST_CASE("refine_unseen_fallback keeps blobs, fills holes, stays inside the bbox") {
  BinaryMask r_n = BinaryMask::zeros(16, 16);
  for (int v = 4; v <= 9; ++v)
    for (int u = 4; u <= 9; ++u) r_n.values(v, u) = 1;
  const VoteGrid votes = VoteGrid::zeros(16, 16);
  const BBox box{3, 3, 10, 10};

  const BinaryMask kept = refine_unseen_fallback(votes, r_n, box, 0.6, 0);
  CHECK((kept.values == r_n.values).all());

  // a one-pixel hole closes at radius 1
  BinaryMask holed = r_n;
  holed.values(6, 6) = 0;
  const BinaryMask closed = refine_unseen_fallback(votes, holed, box, 0.6, 1);
  CHECK(closed.values(6, 6) == 1);

  // stray pixels outside the bbox never appear; result is one component
  BinaryMask with_noise = r_n;
  with_noise.values(14, 14) = 1;
  const BinaryMask refined = refine_unseen_fallback(votes, with_noise, box, 0.6, 0);
  CHECK(refined.values(14, 14) == 0);
  for (int v = 0; v < 16; ++v)
    for (int u = 0; u < 16; ++u)
      if (refined.values(v, u) == 1) CHECK(box.contains(u, v));
}

TEST_CASE("external mask ingestion validates dimensions") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "scenefill_warp_tests";
  fs::create_directories(dir);

  BinaryMask m = BinaryMask::zeros(8, 8);
  m.values(2, 2) = 1;
  io::mask_write_pgm(dir / "ok.pgm", m);
  const auto ok = ingest_external_mask(dir / "ok.pgm", 8, 8);
  CHECK((ok.mask.values == m.values).all());
  CHECK_FALSE(ok.binarized_intermediate);

  CHECK_THROWS_AS(ingest_external_mask(dir / "ok.pgm", 16, 16), DimensionError);

  GridU8 gray = GridU8::Constant(8, 8, 200);
  io::pgm_write(dir / "gray.pgm", gray);
  const auto soft = ingest_external_mask(dir / "gray.pgm", 8, 8);
  CHECK(soft.binarized_intermediate);
  CHECK(soft.mask.count() == 64);
}
