#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "drive/conditioning.hpp"
#include "drive/error.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace drive;
using namespace drive::conditioning;
using drive::test::Rng;

namespace {

GrayImage as_image(const ConditionMap& m) {
  GrayImage g(m.width, m.height);
  g.data = m.data;
  return g;
}

std::uint8_t gray_of_pixel(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  Frame f = test::solid_frame(1, 1, r, g, b);
  return to_grayscale(f).pixels[0];
}

}  // namespace

TEST_CASE("grayscale examples") {
  CHECK(gray_of_pixel(255, 255, 255) == 255);
  CHECK(gray_of_pixel(255, 0, 0) == 76);
  CHECK(gray_of_pixel(0, 0, 0) == 0);
  CHECK(gray_of_pixel(0, 255, 0) == 150);  // 149.685
  CHECK(gray_of_pixel(0, 0, 255) == 29);   // 29.07
  // 114 * 125 = 14250: an exact .25 is rounded down, 114 * 25 = 2850 -> 2.85 up
  CHECK(gray_of_pixel(0, 0, 125) == 14);
  CHECK(gray_of_pixel(0, 0, 25) == 3);
}

TEST_CASE("grayscale matches the oracle on every RGB tie case sampled") {
  Rng rng(21);
  for (int i = 0; i < 20; ++i) {
    const Frame f = test::random_frame(rng, 64, 64);
    CHECK(to_gray_image(f) == test::oracle::grayscale(f));
  }
  CHECK_THROWS_AS(to_grayscale(Frame::blank(2, 2, PixelFormat::kGray8)), InvalidArgument);
}

TEST_CASE("gaussian kernel") {
  const auto k = gaussian_kernel(1.0);
  REQUIRE(k.size() == 7);
  double sum = 0;
  for (double v : k) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(k[0] == k[6]);
  CHECK(k[3] > k[2]);
  CHECK(gaussian_kernel(0.5).size() == 5);   // radius ceil(1.5) = 2
  CHECK(gaussian_kernel(1.01).size() == 9);  // radius ceil(3.03) = 4
  CHECK_THROWS_AS(gaussian_kernel(0.0), InvalidArgument);
}

TEST_CASE("gaussian blur") {
  SUBCASE("constant image is a fixed point") {
    GrayImage g(13, 7, 77);
    CHECK(gaussian_blur(g, 1.0) == g);
    CHECK(gaussian_blur(g, 2.5) == g);
  }
  SUBCASE("impulse") {
    GrayImage g(9, 9, 0);
    g.at(4, 4) = 255;
    const auto k = gaussian_kernel(1.0);
    const GrayImage out = gaussian_blur(g, 1.0);
    CHECK(out.at(4, 4) == saturate_round(255.0 * k[3] * k[3]));
    CHECK(out == test::oracle::blur(g, 1.0));
  }
  SUBCASE("separable blur equals direct 2-D convolution") {
    Rng rng(22);
    for (int i = 0; i < 25; ++i) {
      GrayImage g(static_cast<std::uint32_t>(rng.integer(1, 40)), static_cast<std::uint32_t>(rng.integer(1, 40)));
      for (auto& v : g.data) v = rng.byte();
      const double sigma = rng.real(0.4, 2.5);
      CHECK(gaussian_blur(g, sigma) == test::oracle::blur(g, sigma));
    }
  }
}

TEST_CASE("sobel gradients") {
  SUBCASE("uniform image has no gradient") {
    const Gradients g = sobel_gradients(GrayImage(8, 8, 200));
    CHECK(std::all_of(g.gx.data.begin(), g.gx.data.end(), [](auto v) { return v == 0; }));
    CHECK(std::all_of(g.gy.data.begin(), g.gy.data.end(), [](auto v) { return v == 0; }));
  }
  SUBCASE("hard vertical step peaks at 1020") {
    GrayImage img(8, 8, 0);
    for (std::uint32_t y = 0; y < 8; ++y)
      for (std::uint32_t x = 4; x < 8; ++x) img.at(x, y) = 255;
    const Gradients g = sobel_gradients(img);
    CHECK(g.gx.at(3, 2) == 1020);
    CHECK(g.gx.at(4, 2) == 1020);
    CHECK(g.gx.at(1, 2) == 0);
    CHECK(g.gy.at(3, 2) == 0);
    CHECK(g.magnitude.at(3, 2) == 1020.0f);
    CHECK(g.direction.at(3, 2) == 0);

    GrayImage inv = img;
    for (auto& v : inv.data) v = static_cast<std::uint8_t>(255 - v);
    CHECK(sobel_gradients(inv).gx.at(3, 2) == -1020);
  }
  SUBCASE("transpose swaps gx and gy") {
    Rng rng(23);
    for (int i = 0; i < 10; ++i) {
      GrayImage img(static_cast<std::uint32_t>(rng.integer(3, 30)), static_cast<std::uint32_t>(rng.integer(3, 30)));
      for (auto& v : img.data) v = rng.byte();
      GrayImage t(img.height, img.width);
      for (std::uint32_t y = 0; y < img.height; ++y)
        for (std::uint32_t x = 0; x < img.width; ++x) t.at(y, x) = img.at(x, y);
      const Gradients a = sobel_gradients(img);
      const Gradients b = sobel_gradients(t);
      bool same = true;
      for (std::uint32_t y = 0; y < img.height; ++y) {
        for (std::uint32_t x = 0; x < img.width; ++x) {
          same = same && b.gy.at(y, x) == a.gx.at(x, y) && b.gx.at(y, x) == a.gy.at(x, y);
        }
      }
      CHECK(same);
    }
  }
  SUBCASE("orientation bins") {
    GrayImage diag(9, 9, 0);
    for (std::uint32_t y = 0; y < 9; ++y)
      for (std::uint32_t x = 0; x < 9; ++x) diag.at(x, y) = x + y >= 9 ? 255 : 0;
    const Gradients g = sobel_gradients(diag);
    CHECK(g.direction.at(4, 4) == 45);
    GrayImage anti(9, 9, 0);
    for (std::uint32_t y = 0; y < 9; ++y)
      for (std::uint32_t x = 0; x < 9; ++x) anti.at(x, y) = x >= y ? 255 : 0;
    CHECK(sobel_gradients(anti).direction.at(4, 4) == 135);
    GrayImage horiz(9, 9, 0);
    for (std::uint32_t y = 5; y < 9; ++y)
      for (std::uint32_t x = 0; x < 9; ++x) horiz.at(x, y) = 255;
    CHECK(sobel_gradients(horiz).direction.at(4, 4) == 90);
  }
  CHECK_THROWS_AS(sobel_gradients(GrayImage(2, 5)), InvalidArgument);
}

TEST_CASE("canny basics") {
  SUBCASE("uniform image has no edges") {
    CHECK(canny(test::solid_frame(32, 32, 9, 99, 199), 50, 150).edge_count() == 0);
  }
  SUBCASE("vertical step gives one one-pixel-wide line next to the step") {
    const Frame f = test::vertical_step(64, 64, 32);
    const ConditionMap m = canny(f, 50, 150);
    CHECK(m.edge_count() == 64);
    for (std::uint32_t y = 0; y < 64; ++y) CHECK(m.at(31, y) == 255);
    CHECK(as_image(m) == test::oracle::canny(f, 50, 150, 1.0));
  }
  SUBCASE("thresholds above the maximum step response suppress everything") {
    CHECK(canny(test::vertical_step(64, 64, 32), 1021, 1030).edge_count() == 0);
  }
  SUBCASE("metadata and value set") {
    Rng rng(24);
    Frame f = test::random_blocks(rng, 50, 40, 12);
    f.id = 31;
    const ConditionMap m = canny(f, 40, 90, 1.4);
    CHECK(m.frame_id == 31);
    CHECK(m.width == 50);
    CHECK(m.height == 40);
    CHECK(m.params == CannyParams{40, 90, 1.4});
    CHECK(std::all_of(m.data.begin(), m.data.end(), [](std::uint8_t v) { return v == 0 || v == 255; }));
  }
  CHECK_THROWS_AS(canny(test::vertical_step(8, 8, 4), 100, 100), InvalidArgument);
  CHECK_THROWS_AS(canny(test::vertical_step(8, 8, 4), 100, 50), InvalidArgument);
}

TEST_CASE("canny equals the naive oracle pixel for pixel") {
  Rng rng(25);
  std::size_t total_edges = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const auto w = static_cast<std::uint32_t>(rng.integer(3, 128));
    const auto h = static_cast<std::uint32_t>(rng.integer(3, 128));
    const Frame f = rng.chance(0.5) ? test::random_blocks(rng, w, h, static_cast<int>(rng.integer(1, 30)))
                                    : test::random_frame(rng, w, h);
    const double low = static_cast<double>(rng.integer(1, 150));
    const double high = low + static_cast<double>(rng.integer(1, 250));
    const double sigma = rng.chance(0.5) ? 1.0 : rng.real(0.5, 2.0);
    INFO("trial " << trial << " " << w << "x" << h << " low=" << low << " high=" << high << " sigma=" << sigma);
    const ConditionMap m = canny(f, low, high, sigma);
    total_edges += m.edge_count();
    CHECK(as_image(m) == test::oracle::canny(f, low, high, sigma));
  }
  CHECK(total_edges > 5000);  // the comparison is not vacuous
}

TEST_CASE("edge count is non-increasing in the high threshold") {
  Rng rng(26);
  for (int trial = 0; trial < 15; ++trial) {
    const Frame f = test::random_blocks(rng, 64, 48, 20);
    const double low = static_cast<double>(rng.integer(10, 80));
    std::size_t prev = SIZE_MAX;
    for (double high = low + 1; high < 700; high += 37) {
      const std::size_t n = canny(f, low, high).edge_count();
      CHECK(n <= prev);
      prev = n;
    }
  }
}

TEST_CASE("mirroring the input mirrors the edge map") {
  Rng rng(27);
  for (int trial = 0; trial < 20; ++trial) {
    const Frame f = test::random_blocks(rng, static_cast<std::uint32_t>(rng.integer(3, 80)),
                                        static_cast<std::uint32_t>(rng.integer(3, 80)), 15);
    const ConditionMap a = canny(f, 50, 150);
    const ConditionMap b = canny(test::mirror_horizontal(f), 50, 150);
    bool mirrored = true;
    for (std::uint32_t y = 0; y < a.height; ++y)
      for (std::uint32_t x = 0; x < a.width; ++x) mirrored = mirrored && a.at(x, y) == b.at(a.width - 1 - x, y);
    CHECK(mirrored);
  }
}

TEST_CASE("spatially varying thresholds") {
  ThresholdField field;
  field.focus_x = 30;
  field.focus_y = 20;
  field.r_inner = 10;
  field.r_outer = 30;
  field.fine = {20, 60};
  field.coarse = {100, 300};

  SUBCASE("interpolation") {
    CHECK(field.at_distance(0) == Thresholds{20, 60});
    CHECK(field.at_distance(10) == Thresholds{20, 60});
    CHECK(field.at_distance(20) == Thresholds{60, 180});
    CHECK(field.at_distance(30) == Thresholds{100, 300});
    CHECK(field.at_distance(1e6) == Thresholds{100, 300});
    CHECK(field.at_pixel(33, 24).low == 20);  // distance 5
  }
  Rng rng(28);
  const Frame f = test::random_blocks(rng, 64, 48, 25);
  SUBCASE("degenerate field equals plain canny") {
    ThresholdField flat = field;
    flat.coarse = flat.fine;
    CHECK(canny_spatially_varying(f, flat).data == canny(f, 20, 60).data);
  }
  SUBCASE("focus far away with a huge inner radius equals canny at the fine pair") {
    ThresholdField far = field;
    far.focus_x = -1e5;
    far.focus_y = -1e5;
    far.r_inner = 1e7;
    far.r_outer = 2e7;
    CHECK(canny_spatially_varying(f, far).data == canny(f, 20, 60).data);
  }
  SUBCASE("focus raises edge density inside the focus window") {
    const Frame noisy = test::random_frame(rng, 64, 48);
    ThresholdField uniform_coarse = field;
    uniform_coarse.fine = uniform_coarse.coarse;
    const ConditionMap focused = canny_spatially_varying(noisy, field);
    const ConditionMap coarse = canny_spatially_varying(noisy, uniform_coarse);
    auto count_window = [](const ConditionMap& m) {
      std::size_t n = 0;
      for (std::uint32_t y = 12; y < 28; ++y)
        for (std::uint32_t x = 22; x < 38; ++x) n += m.at(x, y) == 255;
      return n;
    };
    CHECK(count_window(focused) > count_window(coarse));
  }
  SUBCASE("validation") {
    ThresholdField bad = field;
    bad.r_inner = bad.r_outer;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = field;
    bad.coarse = {5, 5};
    CHECK_THROWS_AS(canny_spatially_varying(f, bad), InvalidArgument);
  }
}

TEST_CASE("condition map wire form") {
  ConditionMap m;
  m.frame_id = 0x0102030405060708ull;
  m.width = 3;
  m.height = 1;
  m.data = {0, 255, 0};
  const auto payload = encode_condition_payload(m);
  const std::vector<std::uint8_t> expected{1, 2, 3, 4, 5, 6, 7, 8, 0, 3, 0, 1, 0, 255, 0};
  CHECK(payload == expected);
  const ConditionMap back = decode_condition(encode_condition(m));
  CHECK(back.frame_id == m.frame_id);
  CHECK(back.data == m.data);
  auto truncated = payload;
  truncated.pop_back();
  CHECK_THROWS_AS(decode_condition_payload(truncated), transport::ProtocolError);

  const Frame g = condition_to_frame(m, 5);
  CHECK(g.format == PixelFormat::kGray8);
  CHECK(g.pixels == m.data);
  CHECK(g.id == m.frame_id);
}
