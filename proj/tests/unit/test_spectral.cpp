#include <algorithm>
#include <cmath>
#include <sstream>

#include "camp/model.hpp"
#include "camp/spectral.hpp"
#include "doctest.h"

using camp::SpectralProfile;
using camp::TapTable;
using camp::Vector;

TEST_SUITE_BEGIN("spectral");

TEST_CASE("constant-ratio limiting moments: closed second moment") {
  // delta = 1, ratio e: mu_2 = [C/(1-r)]^2 (1-r^2)/(2C) with C = 2, r = e^-2.
  SpectralProfile p = camp::asymptotic_moments_geometric(1.0, std::exp(1.0), 4);
  REQUIRE(p.moments.size() >= 3);
  CHECK(p.moments[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(p.moments[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(p.moments[2] == doctest::Approx(1.31303528549933135).epsilon(1e-13));
}

TEST_CASE("constant-ratio limiting moments: unit trace at several shapes") {
  for (double delta : {0.3, 0.6, 0.9}) {
    for (double kappa : {2.0, 10.0, 100.0}) {
      SpectralProfile p = camp::asymptotic_moments_geometric(delta, kappa, 3);
      CHECK(p.moments[1] == doctest::Approx(1.0).epsilon(1e-13));
    }
  }
  CHECK_THROWS_AS(camp::asymptotic_moments_geometric(0.6, 1.0, 3),
                  std::invalid_argument);
  CHECK_THROWS_AS(camp::asymptotic_moments_geometric(0.6, 0.3, 3),
                  std::invalid_argument);
}

TEST_CASE("iid-limit moments: Catalan-weighted closed values") {
  // mu_2 = 1 + 1/delta, mu_3 = 1 + 3/delta + 1/delta^2.
  SpectralProfile half = camp::marchenko_pastur_moments(0.5, 4);
  CHECK(half.moments[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(half.moments[2] == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(half.moments[3] == doctest::Approx(11.0).epsilon(1e-13));
  SpectralProfile unit = camp::marchenko_pastur_moments(1.0, 3);
  CHECK(unit.moments[2] == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("iid-limit moments agree with a sampled ensemble") {
  camp::Rng rng(7);
  const int M = 256, N = 512;
  camp::SensingEnsemble e = camp::sample_iid_gaussian(M, N, rng);
  // tr((A^T A)^2) / N = squared Frobenius norm of the Gram matrix / N.
  const Vector& a = e.dense_matrix;
  std::vector<double> gram(static_cast<std::size_t>(M) * M, 0.0);
  // G2 = A A^T (M x M), tr((A^T A)^2) = ||A A^T||_F^2.
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      double acc = 0.0;
      for (int n = 0; n < N; ++n)
        acc += a[static_cast<std::size_t>(i) * N + n] *
               a[static_cast<std::size_t>(j) * N + n];
      gram[static_cast<std::size_t>(i) * M + j] = acc;
    }
  double frob_sq = 0.0;
  for (double v : gram) frob_sq += v * v;
  double mu2_sample = frob_sq / N;
  SpectralProfile p = camp::marchenko_pastur_moments(0.5, 2);
  CHECK(mu2_sample == doctest::Approx(p.moments[2]).epsilon(0.05));
}

TEST_CASE("empirical moments of an equal spectrum") {
  // M = 2, N = 4, all squared values N / M = 2: mu_k = delta^(1-k).
  Vector sigma(2, std::sqrt(2.0));
  SpectralProfile p = camp::empirical_moments(sigma, 4, 4);
  CHECK(p.moments[0] == doctest::Approx(1.0));
  CHECK(p.moments[1] == doctest::Approx(1.0));
  CHECK(p.moments[2] == doctest::Approx(2.0));
  CHECK(p.moments[3] == doctest::Approx(4.0));
}

TEST_CASE("empirical moments of a sampled ensemble have unit trace") {
  camp::Rng rng(13);
  const int M = 12, N = 64;
  Vector sigma = camp::geometric_singular_values(M, N, 8.0);
  SpectralProfile p = camp::empirical_moments(sigma, N, 6);
  CHECK(p.moments[1] == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("first tap equals the second-moment excess") {
  // g_0 = mu_2 - mu_1 for any spectrum; closed value at delta = 1, ratio e.
  SpectralProfile p = camp::asymptotic_moments_geometric(1.0, std::exp(1.0), 5);
  TapTable table = camp::tap_recursion(p, 3);
  REQUIRE(table.taps.size() >= 1);
  CHECK(table.taps[0] == doctest::Approx(0.31303528549933135).epsilon(1e-10));
  // Cross-check with the closed form: C/2 - 1 + C/(kappa^2 - 1), C = 2.
  Vector closed = camp::taps_geometric_closed_form(1.0, std::exp(1.0), 3);
  CHECK(closed[0] == doctest::Approx(table.taps[0]).epsilon(1e-10));
  CHECK(closed[0] ==
        doctest::Approx(2.0 / (std::exp(2.0) - 1.0)).epsilon(1e-12));
}

TEST_CASE("closed-form taps approach the equal-spectrum limit") {
  const double delta = 0.6;
  Vector near = camp::taps_geometric_closed_form(delta, 1.0 + 1e-6, 5);
  const double limit = (1.0 - delta) / delta;
  CHECK(near[0] == doctest::Approx(limit).epsilon(1e-4));
  Vector equal = camp::taps_equal_spectrum(delta, 5);
  for (double g : equal) CHECK(g == doctest::Approx(limit).epsilon(1e-15));
  CHECK_THROWS_AS(camp::taps_geometric_closed_form(delta, 1.0, 5),
                  std::invalid_argument);
}

TEST_CASE("iid-limit taps: first tap 1/delta, memory terms vanish") {
  SpectralProfile p = camp::marchenko_pastur_moments(0.5, 13);
  TapTable table = camp::tap_recursion(p, 11);
  REQUIRE(table.taps.size() == 12);
  CHECK(table.taps[0] == doctest::Approx(2.0).epsilon(1e-12));
  for (std::size_t t = 1; t < table.taps.size(); ++t)
    CHECK(std::fabs(table.taps[t]) <= 1e-9);
}

TEST_CASE("square orthogonal spectrum needs no correction at all") {
  // M = N: every gram eigenvalue is 1, mu_k = 1, so every tap vanishes.
  Vector sigma(8, 1.0);
  SpectralProfile p = camp::empirical_moments(sigma, 8, 8);
  TapTable table = camp::tap_recursion(p, 6);
  for (double g : table.taps) CHECK(std::fabs(g) <= 1e-12);
}

TEST_CASE("shadow row of the tap table vanishes identically") {
  SpectralProfile p = camp::asymptotic_moments_geometric(0.6, 10.0, 12);
  TapTable table = camp::tap_recursion(p, 10, 0);
  REQUIRE(table.k_lo == 0);
  for (int t = 0; t <= table.T; ++t) {
    if (table.g[t].empty()) continue;
    CHECK(std::fabs(table.at(t, 0)) <= 1e-8);
  }
}

TEST_CASE("tap table shape and accessor") {
  const int T = 6;
  SpectralProfile p = camp::asymptotic_moments_geometric(0.5, 3.0, T + 2);
  TapTable table = camp::tap_recursion(p, T);
  CHECK(table.T == T);
  CHECK(table.k_lo == 1);
  REQUIRE(table.g.size() == T + 1);
  for (int t = 0; t <= T; ++t) {
    // Row t spans k = 1 .. T + 1 - t.
    CHECK(static_cast<int>(table.g[t].size()) == T + 1 - t);
    if (!table.g[t].empty()) CHECK(table.at(t, 1) == table.g[t][0]);
  }
  CHECK_FALSE(table.overflowed);
}

TEST_CASE("tap recursion is deterministic") {
  SpectralProfile p = camp::asymptotic_moments_geometric(0.3, 100.0, 17);
  TapTable a = camp::tap_recursion(p, 15);
  TapTable b = camp::tap_recursion(p, 15);
  REQUIRE(a.taps.size() == b.taps.size());
  for (std::size_t i = 0; i < a.taps.size(); ++i) CHECK(a.taps[i] == b.taps[i]);
}

TEST_CASE("recursion tracks the closed form over a shape grid") {
  for (double delta : {0.3, 0.6, 0.9}) {
    for (double kappa : {2.0, 10.0, 100.0}) {
      SpectralProfile p = camp::asymptotic_moments_geometric(delta, kappa, 17);
      TapTable table = camp::tap_recursion(p, 15);
      Vector closed = camp::taps_geometric_closed_form(delta, kappa, 15);
      for (int t = 0; t <= 15; ++t) {
        double rel = std::fabs(table.taps[t] - closed[t]) /
                     std::max(std::fabs(closed[t]), 1e-30);
        CHECK(rel <= 1e-8);
      }
    }
  }
}

TEST_CASE("explicit moment lists drive the recursion") {
  SpectralProfile src = camp::asymptotic_moments_geometric(0.6, 5.0, 8);
  SpectralProfile p = camp::profile_from_moments(src.moments);
  TapTable from_list = camp::tap_recursion(p, 6);
  TapTable from_params = camp::tap_recursion(src, 6);
  // The list was rounded to double once, so agreement is tight but not exact.
  for (int t = 0; t <= 6; ++t)
    CHECK(from_list.taps[t] ==
          doctest::Approx(from_params.taps[t]).epsilon(1e-9));
  // Moments must reach k = T + 2.
  CHECK_THROWS_AS(camp::tap_recursion(p, 7), std::invalid_argument);
}

TEST_CASE("tap table serialization round-trips") {
  SpectralProfile p = camp::asymptotic_moments_geometric(0.6, 10.0, 7);
  TapTable table = camp::tap_recursion(p, 5);
  std::istringstream in(table.serialize());
  int t, k;
  double value;
  int rows = 0;
  while (in >> t >> k >> value) {
    CHECK(value == table.at(t, k));
    ++rows;
  }
  int expected = 0;
  for (const auto& row : table.g) expected += static_cast<int>(row.size());
  CHECK(rows == expected);
}

TEST_CASE("spectrum transform: closed forms and the moment series agree") {
  SpectralProfile geo = camp::asymptotic_moments_geometric(0.6, 4.0, 40);
  SpectralProfile list = camp::profile_from_moments(geo.moments);
  for (double z : {0.01, 0.05, 0.1}) {
    // Small z keeps the truncated alternating series accurate.
    CHECK(list.eta(z) == doctest::Approx(geo.eta(z)).epsilon(1e-8));
  }
  CHECK(geo.eta(0.0) == doctest::Approx(1.0));
}

TEST_CASE("iid-limit transform satisfies its self-consistency equation") {
  // eta = 1 / (1 + z R(-z eta)) with R(w) = delta / (delta - w).
  const double delta = 0.6;
  SpectralProfile p = camp::marchenko_pastur_moments(delta, 2);
  for (double z : {0.2, 0.7, 2.0}) {
    double eta = 1.0;
    for (int it = 0; it < 200; ++it) {
      double r = delta / (delta + z * eta);
      eta = 1.0 / (1.0 + z * r);
    }
    CHECK(p.eta(z) == doctest::Approx(eta).epsilon(1e-10));
  }
}

TEST_CASE("empirical transform sums over the actual spectrum") {
  Vector sigma = {2.0, 1.0};
  SpectralProfile p = camp::empirical_moments(sigma, 4, 3);
  // eta(z) = (1/4) [2 + 1/(1+4z) + 1/(1+z)].
  const double z = 0.5;
  double expect = (2.0 + 1.0 / (1.0 + 4.0 * z) + 1.0 / (1.0 + z)) / 4.0;
  CHECK(p.eta(z) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("generating-function residuals vanish for consistent taps") {
  Vector y_grid;
  for (int i = 1; i <= 10; ++i) y_grid.push_back(0.05 * i);

  SUBCASE("constant-ratio spectrum") {
    for (double kappa : {2.0, 10.0}) {
      Vector taps = camp::taps_geometric_closed_form(0.6, kappa, 200);
      SpectralProfile p = camp::asymptotic_moments_geometric(0.6, kappa, 3);
      auto rows = camp::verify_tap_generating_function(taps, p, y_grid);
      for (const auto& r : rows) {
        REQUIRE_FALSE(r.flagged);
        CHECK(r.residual <= 1e-8);
      }
    }
  }

  SUBCASE("iid-limit spectrum away from its pole") {
    SpectralProfile p = camp::marchenko_pastur_moments(0.6, 3);
    Vector taps(201, 0.0);
    taps[0] = 1.0 / 0.6;
    auto rows = camp::verify_tap_generating_function(taps, p, y_grid);
    for (const auto& r : rows) {
      REQUIRE_FALSE(r.flagged);
      CHECK(r.residual <= 1e-10);
    }
  }

  SUBCASE("equal spectrum with constant taps") {
    const double delta = 0.6;
    Vector taps = camp::taps_equal_spectrum(delta, 200);
    Vector sigma(6, std::sqrt(10.0 / 6.0));  // M = 6, N = 10
    SpectralProfile p = camp::empirical_moments(sigma, 10, 3);
    auto rows = camp::verify_tap_generating_function(taps, p, y_grid);
    for (const auto& r : rows) {
      REQUIRE_FALSE(r.flagged);
      CHECK(r.residual <= 1e-10);
    }
  }
}

TEST_CASE("generating-function pole is flagged, not judged") {
  // The iid-limit spectrum at delta = 0.5 has its pole exactly at y = 0.5.
  SpectralProfile p = camp::marchenko_pastur_moments(0.5, 3);
  Vector taps(201, 0.0);
  taps[0] = 2.0;
  auto rows = camp::verify_tap_generating_function(taps, p, {0.25, 0.5});
  REQUIRE(rows.size() == 2);
  CHECK_FALSE(rows[0].flagged);
  CHECK(rows[0].residual <= 1e-10);
  CHECK(rows[1].flagged);
}

TEST_CASE("generating function at y = 0 reduces to the zero-memory row") {
  Vector taps = camp::taps_geometric_closed_form(0.6, 5.0, 50);
  SpectralProfile p = camp::asymptotic_moments_geometric(0.6, 5.0, 3);
  auto rows = camp::verify_tap_generating_function(taps, p, {0.0});
  REQUIRE(rows.size() == 1);
  CHECK_FALSE(rows[0].flagged);
  CHECK(rows[0].residual <= 1e-12);
}

TEST_CASE("generating function closed form matches the truncated series") {
  // For the constant-ratio spectrum the tap series sums to
  //   C/((k^2-1)(1-y)) + 1/y + C/((1-y)(1-exp(C y))),  C = (2/delta) ln k.
  const double delta = 0.6;
  for (double kappa : {2.0, 10.0}) {
    const double C = 2.0 / delta * std::log(kappa);
    Vector taps = camp::taps_geometric_closed_form(delta, kappa, 200);
    for (double y : {0.1, 0.3, 0.5}) {
      double series = 0.0;
      double yp = 1.0;
      for (double g : taps) {
        series += g * yp;
        yp *= y;
      }
      double closed = C / ((kappa * kappa - 1.0) * (1.0 - y)) + 1.0 / y +
                      C / ((1.0 - y) * (1.0 - std::exp(C * y)));
      CHECK(series == doctest::Approx(closed).epsilon(1e-8));
    }
  }
}

TEST_CASE("quad-precision moments match their double projections") {
  SpectralProfile p = camp::asymptotic_moments_geometric(0.6, 10.0, 6);
  auto mq = p.moments_quad(6);
  REQUIRE(mq.size() == 7);
  for (int k = 0; k <= 6; ++k)
    CHECK(static_cast<double>(mq[k]) ==
          doctest::Approx(p.moments[k]).epsilon(1e-14));
  SpectralProfile mp = camp::marchenko_pastur_moments(0.5, 5);
  auto mpq = mp.moments_quad(5);
  for (int k = 0; k <= 5; ++k)
    CHECK(static_cast<double>(mpq[k]) ==
          doctest::Approx(mp.moments[k]).epsilon(1e-14));
}

TEST_SUITE_END();
