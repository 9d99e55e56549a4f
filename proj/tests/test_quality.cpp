#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "fastusct/errors.hpp"
#include "fastusct/quality.hpp"
#include "fastusct/rng.hpp"

using namespace fastusct;

namespace {

ReconImage make_image(int n, float fill = 0.0f) {
  ReconRegion r;
  r.origin = {-8.0, -8.0};
  r.width = 16.0;
  r.height = 16.0;
  r.nx = n;
  r.ny = n;
  ReconImage img(r);
  for (float& v : img.intensity) v = fill;
  return img;
}

BModeImage flat_bmode(int n, float level) {
  BModeImage b(n, n);
  b.db_lo = -30.0;
  b.db_hi = 0.0;
  for (float& v : b.db) v = level;
  return b;
}

}  // namespace

TEST_CASE("log compression references the image maximum") {
  ReconImage img = make_image(4);
  img.at(0, 0) = 5.0f;                       // the max: 0 dB
  img.at(1, 0) = 0.5f;                       // max/10: -20 dB
  img.at(2, 0) = 5.0f / std::sqrt(10.0f);    // max/sqrt(10): -10 dB
  const DbGrid g = log_compress(img);
  CHECK(g.at(0, 0) == doctest::Approx(0.0).scale(1.0));
  CHECK(g.at(1, 0) == doctest::Approx(-20.0).epsilon(1e-5));
  CHECK(g.at(2, 0) == doctest::Approx(-10.0).epsilon(1e-5));
  CHECK(std::isinf(g.at(3, 0)));
  CHECK(g.at(3, 0) < 0.0);

  CHECK_THROWS_AS(log_compress(make_image(4)), DegenerateImageError);
}

TEST_CASE("dB clipping clamps and maps -inf to the floor") {
  DbGrid g;
  g.nx = 4;
  g.ny = 1;
  g.v = {-45.0, -15.0, 3.0, -std::numeric_limits<double>::infinity()};
  const DbGrid c = clip_db(g, -30.0, 0.0);
  CHECK(c.v[0] == -30.0);
  CHECK(c.v[1] == -15.0);
  CHECK(c.v[2] == 0.0);
  CHECK(c.v[3] == -30.0);
  CHECK_THROWS_AS(clip_db(g, 0.0, 0.0), ConfigError);
  CHECK_THROWS_AS(clip_db(g, 0.0, -30.0), ConfigError);
}

TEST_CASE("3x3 mean filter averages with edge replication") {
  DbGrid flat;
  flat.nx = 5;
  flat.ny = 5;
  flat.v.assign(25, -7.5);
  const DbGrid same = mean_filter_3x3(flat);
  for (double v : same.v) CHECK(v == -7.5);

  DbGrid spike;
  spike.nx = 5;
  spike.ny = 5;
  spike.v.assign(25, 0.0);
  spike.v[2 * 5 + 2] = 9.0;
  const DbGrid blur = mean_filter_3x3(spike);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x)
      CHECK(blur.at(x, y) ==
            (std::abs(x - 2) <= 1 && std::abs(y - 2) <= 1 ? 1.0 : 0.0));

  // Corner of a 3x3: the corner sample is replicated 4 times, its edge
  // neighbors twice each, the diagonal once.
  DbGrid corner;
  corner.nx = 3;
  corner.ny = 3;
  corner.v.assign(9, 0.0);
  corner.at(0, 0) = 9.0;
  const DbGrid c = mean_filter_3x3(corner);
  CHECK(c.at(0, 0) == 4.0);
  CHECK(c.at(1, 0) == 2.0);
  CHECK(c.at(0, 1) == 2.0);
  CHECK(c.at(1, 1) == 1.0);
  CHECK(c.at(2, 2) == 0.0);

  DbGrid tiny;
  tiny.nx = 2;
  tiny.ny = 2;
  tiny.v.assign(4, 0.0);
  CHECK_THROWS_AS(mean_filter_3x3(tiny), ShapeError);
}

TEST_CASE("postprocess_bmode equals its composition and tags provenance") {
  Rng rng(12);
  ReconImage img = make_image(16);
  for (float& v : img.intensity) v = static_cast<float>(rng.uniform() * 3.0);
  img.intensity[5] = 0.0f;  // exercise the -inf path through the clip

  const BModeImage direct = postprocess_bmode(img, -30.0, 0.0, "das_test");
  const BModeImage manual = to_bmode(
      mean_filter_3x3(clip_db(log_compress(img), -30.0, 0.0)), -30.0, 0.0,
      "das_test");
  CHECK(direct.db == manual.db);
  CHECK(direct.provenance == "das_test");
  CHECK(direct.db_lo == -30.0);
  CHECK(direct.db_hi == 0.0);
  for (float v : direct.db) {
    CHECK(v >= -30.0f);
    CHECK(v <= 0.0f);
  }
}

TEST_CASE("mssim is exactly 1 on identical images") {
  Rng rng(3);
  BModeImage a = flat_bmode(16, 0.0f);
  for (float& v : a.db) v = static_cast<float>(-30.0 * rng.uniform());
  CHECK(mssim(a, a, 7) == 1.0);
  CHECK(mssim(a, a, 3) == 1.0);
}

TEST_CASE("mssim matches the closed form for constant images") {
  const BModeImage a = flat_bmode(16, -15.0f);
  const BModeImage b = flat_bmode(16, -14.0f);
  // Zero variance: ssim = (2*mu_a*mu_b + c1) / (mu_a^2 + mu_b^2 + c1),
  // c1 = (0.01 * 30)^2 = 0.09.
  const double want = (2.0 * (-15.0) * (-14.0) + 0.09) /
                      ((-15.0) * (-15.0) + (-14.0) * (-14.0) + 0.09);
  CHECK(mssim(a, b, 7) == doctest::Approx(want).epsilon(1e-12));
  CHECK(mssim(a, b, 7) == doctest::Approx(mssim(b, a, 7)).epsilon(1e-12));
}

TEST_CASE("mssim drops when one image is shuffled") {
  Rng rng(8);
  BModeImage a = flat_bmode(16, 0.0f);
  for (float& v : a.db) v = static_cast<float>(-30.0 * rng.uniform());
  BModeImage b = a;
  for (std::size_t i = b.db.size(); i > 1; --i)
    std::swap(b.db[i - 1], b.db[rng.uniform_int(0, static_cast<int>(i) - 1)]);
  const double m = mssim(a, b, 7);
  CHECK(m < 0.9);
  CHECK(m >= -1.0);
  CHECK(m <= 1.0);
}

TEST_CASE("mssim validates window and shapes") {
  const BModeImage a = flat_bmode(16, -5.0f);
  const BModeImage b = flat_bmode(12, -5.0f);
  CHECK_THROWS_AS(mssim(a, b, 7), ShapeError);
  CHECK_THROWS_AS(mssim(a, a, 4), ConfigError);
  CHECK_THROWS_AS(mssim(a, a, 0), ConfigError);
  CHECK_THROWS_AS(mssim(a, a, 17), ShapeError);
  CHECK_NOTHROW(mssim(a, a, 1));
}

TEST_CASE("psnr closed form, identical sentinel, and validation") {
  const BModeImage a = flat_bmode(8, -20.0f);
  BModeImage b = a;
  for (float& v : b.db) v += 3.0f;
  const PsnrResult r = psnr(a, b);
  REQUIRE(!r.identical);
  CHECK(r.db == doctest::Approx(20.0).epsilon(1e-12));  // 20*log10(30/3)
  CHECK(psnr(b, a).db == doctest::Approx(r.db).epsilon(1e-12));

  const PsnrResult same = psnr(a, a);
  CHECK(same.identical);

  const BModeImage c = flat_bmode(9, -20.0f);
  CHECK_THROWS_AS(psnr(a, c), ShapeError);
}

TEST_CASE("rf_mse matches a direct evaluation and validates stacks") {
  Rng rng(9);
  RfFrame a(2, 16, 10.0), b(2, 16, 10.0);
  for (float& v : a.samples) v = static_cast<float>(rng.normal());
  for (float& v : b.samples) v = static_cast<float>(rng.normal());

  double want = 0.0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const double d = static_cast<double>(a.samples[i]) - b.samples[i];
    want += d * d;
  }
  want /= 2.0 * static_cast<double>(a.samples.size());  // two frames below
  CHECK(rf_mse({a, b}, {b, a}) > 0.0);
  CHECK(rf_mse({a, a}, {b, b}) == doctest::Approx(want * 2.0).epsilon(1e-12));
  CHECK(rf_mse({a}, {a}) == 0.0);

  CHECK_THROWS_AS(rf_mse({}, {}), ShapeError);
  CHECK_THROWS_AS(rf_mse({a, b}, {a}), ShapeError);
  const RfFrame c(2, 8, 10.0);
  CHECK_THROWS_AS(rf_mse({a}, {c}), ShapeError);
}
