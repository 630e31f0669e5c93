#include <doctest.h>

#include <random>

#include "scenefill/camera.hpp"

using namespace scenefill;

namespace {

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Matrix3d m;
  for (int i = 0; i < 9; ++i) m.data()[i] = n(rng);
  Eigen::HouseholderQR<Eigen::Matrix3d> qr(m);
  Eigen::Matrix3d q = qr.householderQ();
  if (q.determinant() < 0) q.col(2) *= -1.0;
  return q;
}

}  // namespace

TEST_CASE("unproject_pixel principal point and focal arithmetic") {
  CameraIntrinsics k(100, 100, 50, 50, 101, 101);
  const Eigen::Vector3d on_axis = unproject_pixel<double>(50, 50, 3.0, k);
  CHECK(on_axis.x() == doctest::Approx(0.0));
  CHECK(on_axis.y() == doctest::Approx(0.0));
  CHECK(on_axis.z() == doctest::Approx(3.0));

  CameraIntrinsics k2(100, 100, 50, 50, 200, 200);
  const Eigen::Vector3d p = unproject_pixel<double>(150, 50, 2.0, k2);
  CHECK(p.x() == doctest::Approx(2.0));
  CHECK(p.y() == doctest::Approx(0.0));
  CHECK(p.z() == doctest::Approx(2.0));
}

TEST_CASE("unproject_pixel rejects bad inputs") {
  CameraIntrinsics k(100, 100, 50, 50, 101, 101);
  CHECK_THROWS_AS(unproject_pixel<double>(50, 50, 0.0, k), DataError);
  CHECK_THROWS_AS(unproject_pixel<double>(50, 50, -1.0, k), DataError);
  CHECK_THROWS_AS(unproject_pixel<double>(101, 50, 1.0, k), DataError);
  CHECK_THROWS_AS(unproject_pixel<double>(-1, 50, 1.0, k), DataError);
}

TEST_CASE("project_point axis, inverse example, behind-camera") {
  CameraIntrinsics k(100, 100, 50, 50, 200, 200);
  const auto axis = project_point<double>({0, 0, 5}, k);
  CHECK(axis.in_frustum);
  CHECK(axis.u == doctest::Approx(50.0));
  CHECK(axis.v == doctest::Approx(50.0));
  CHECK(axis.depth == doctest::Approx(5.0));

  const auto inv = project_point<double>({2, 0, 2}, k);
  CHECK(inv.in_frustum);
  CHECK(inv.u == doctest::Approx(150.0));
  CHECK(inv.v == doctest::Approx(50.0));

  CHECK_FALSE(project_point<double>({0, 0, -1}, k).in_frustum);
  CHECK_FALSE(project_point<double>({100, 0, 1}, k).in_frustum);
}

TEST_CASE("project after unproject is the identity on random in-bounds pixels") {
  CameraIntrinsics k(95.0, 110.0, 60.5, 70.25, 128, 160);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> du(0.0, 127.999), dv(0.0, 159.999), dz(0.05, 50.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double u = du(rng), v = dv(rng), z = dz(rng);
    const auto back = project_point<double>(unproject_pixel(u, v, z, k), k);
    REQUIRE(back.in_frustum);
    CHECK(std::abs(back.u - u) <= 1e-6);
    CHECK(std::abs(back.v - v) <= 1e-6);
    CHECK(std::abs(back.depth - z) <= 1e-6);
  }
}

TEST_CASE("relative_transform identity and translation cases") {
  std::mt19937_64 rng(11);
  const Pose p(random_rotation(rng), Eigen::Vector3d(0.3, -0.2, 1.5));
  const Pose rel = relative_transform(p, p);
  CHECK((rel.rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(rel.translation.cwiseAbs().maxCoeff() <= 1e-12);

  const Pose identity;
  const Pose shifted(Eigen::Matrix3d::Identity(), Eigen::Vector3d(1, 2, 3));
  const Pose rel2 = relative_transform(identity, shifted);
  CHECK((rel2.rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((rel2.translation - Eigen::Vector3d(1, 2, 3)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("relative_transform composes with its reverse to the identity") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Pose a(random_rotation(rng), Eigen::Vector3d(n(rng), n(rng), n(rng)));
    const Pose b(random_rotation(rng), Eigen::Vector3d(n(rng), n(rng), n(rng)));
    const Pose ab = relative_transform(a, b);
    const Pose ba = relative_transform(b, a);
    const Eigen::Matrix3d r = ba.rotation * ab.rotation;
    const Eigen::Vector3d t = ba.rotation * ab.translation + ba.translation;
    CHECK((r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(t.cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("pose construction validates orthonormality") {
  Eigen::Matrix3d bad = Eigen::Matrix3d::Identity();
  bad(0, 0) = 1.5;
  CHECK_THROWS_AS(Pose(bad, Eigen::Vector3d::Zero()), DataError);

  Eigen::Matrix3d mirrored = Eigen::Matrix3d::Identity();
  mirrored(2, 2) = -1.0;  // orthonormal but det -1
  CHECK_THROWS_AS(Pose(mirrored, Eigen::Vector3d::Zero()), DataError);
}

TEST_CASE("intrinsics invariants are enforced") {
  CHECK_THROWS_AS(CameraIntrinsics(0, 100, 10, 10, 64, 64), ConfigError);
  CHECK_THROWS_AS(CameraIntrinsics(100, 100, 64, 10, 64, 64), ConfigError);
  CHECK_THROWS_AS(CameraIntrinsics(100, 100, 10, 10, 0, 64), ConfigError);
  CHECK_NOTHROW(CameraIntrinsics(100, 100, 0, 0, 64, 64));
}
