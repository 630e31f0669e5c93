#include <doctest.h>

#include "scenefill/morphology.hpp"

using namespace scenefill;

TEST_CASE("closing fills a one-pixel hole") {
  BinaryMask m = BinaryMask::zeros(7, 7);
  for (int v = 1; v <= 5; ++v)
    for (int u = 1; u <= 5; ++u) m.values(v, u) = 1;
  m.values(3, 3) = 0;
  const BinaryMask closed = morphological_close(m, 1);
  CHECK(closed.values(3, 3) == 1);
  // nothing outside the blob appears
  for (int u = 0; u < 7; ++u) {
    CHECK(closed.values(0, u) == 0);
    CHECK(closed.values(6, u) == 0);
  }
}

TEST_CASE("closing with radius 0 is the identity") {
  BinaryMask m = BinaryMask::zeros(5, 5);
  m.values(2, 2) = 1;
  m.values(0, 4) = 1;
  CHECK((morphological_close(m, 0).values == m.values).all());
}

TEST_CASE("largest 4-connected component wins") {
  BinaryMask m = BinaryMask::zeros(6, 6);
  // 3-pixel component
  m.values(0, 0) = m.values(0, 1) = m.values(1, 0) = 1;
  // 5-pixel component, diagonal contact does not join
  for (int u = 2; u <= 4 ; ++u) m.values(3, u) = 1;
  m.values(4, 2) = m.values(4, 3) = 1;
  const BinaryMask kept = largest_component_4(m);
  CHECK(kept.count() == 5);
  CHECK(kept.values(3, 2) == 1);
  CHECK(kept.values(0, 0) == 0);
}

TEST_CASE("largest component of empty mask is empty") {
  CHECK(largest_component_4(BinaryMask::zeros(4, 4)).empty());
}

TEST_CASE("dilate then erode round-trips solid blobs away from borders") {
  BinaryMask m = BinaryMask::zeros(16, 16);
  for (int v = 5; v <= 10; ++v)
    for (int u = 5; u <= 10; ++u) m.values(v, u) = 1;
  CHECK((morphological_close(m, 2).values == m.values).all());
}
