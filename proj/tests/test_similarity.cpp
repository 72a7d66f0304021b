#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <tuple>

#include <lidreg/error.hpp>
#include <lidreg/nelder_mead.hpp>
#include <lidreg/similarity.hpp>

using namespace lidreg;

namespace {

Raster noise(int rows, int cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  Raster r(rows, cols);
  for (auto& v : r.values()) v = u(rng);
  return r;
}

Raster levels(int rows, int cols, int n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> u(0, n - 1);
  Raster r(rows, cols);
  for (auto& v : r.values()) v = u(rng);
  return r;
}

int bin_of(double v, double lo, double hi, int bins) {
  if (hi <= lo) return 0;
  return std::min(bins - 1, static_cast<int>((v - lo) * (bins / (hi - lo))));
}

// Kullback-Leibler form: sum p(a,b) log2(p(a,b) / (p(a) p(b))).
double brute_mi(const Raster& a, const Raster& b, int bins) {
  const auto [alo, ahi] = std::minmax_element(a.values().begin(), a.values().end());
  const auto [blo, bhi] = std::minmax_element(b.values().begin(), b.values().end());
  std::vector<double> joint(bins * bins, 0.0), pa(bins, 0.0), pb(bins, 0.0);
  const double n = static_cast<double>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int x = bin_of(a[i], *alo, *ahi, bins), y = bin_of(b[i], *blo, *bhi, bins);
    joint[x * bins + y] += 1 / n;
    pa[x] += 1 / n;
    pb[y] += 1 / n;
  }
  double mi = 0;
  for (int x = 0; x < bins; ++x) {
    for (int y = 0; y < bins; ++y) {
      const double p = joint[x * bins + y];
      if (p > 0) mi += p * std::log2(p / (pa[x] * pb[y]));
    }
  }
  return mi;
}

double brute_ncmi(const Raster& a, const Raster& b, const Raster& c, int bins) {
  const auto range = [](const Raster& r) {
    const auto [lo, hi] = std::minmax_element(r.values().begin(), r.values().end());
    return std::pair{*lo, *hi};
  };
  const auto ra = range(a), rb = range(b), rc = range(c);
  std::map<std::tuple<int, int, int>, double> abc;
  std::map<std::pair<int, int>, double> ab;
  std::map<int, double> cc;
  const double n = static_cast<double>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int x = bin_of(a[i], ra.first, ra.second, bins), y = bin_of(b[i], rb.first, rb.second, bins),
              z = bin_of(c[i], rc.first, rc.second, bins);
    abc[{x, y, z}] += 1 / n;
    ab[{x, y}] += 1 / n;
    cc[z] += 1 / n;
  }
  const auto h = [](const auto& m) {
    double s = 0;
    for (const auto& [k, p] : m) s -= p * std::log2(p);
    return s;
  };
  return (h(ab) + h(cc)) / h(abc);
}

}  // namespace

TEST_SUITE("similarity") {
  TEST_CASE("joint_histogram examples") {
    const Raster c(5, 5, 2.0);
    const JointPdf p = joint_histogram(c, c, 8);
    int nonzero = 0;
    for (double v : p.p) nonzero += v > 0;
    CHECK(nonzero == 1);
    CHECK(p.p[0] == doctest::Approx(1.0));

    std::mt19937_64 rng(1);
    const Raster x = noise(100, 100, rng), y = noise(100, 100, rng);
    const JointPdf q = joint_histogram(x, y, 2);
    for (double v : q.p) CHECK(std::abs(v - 0.25) <= 0.02);

    Raster board(8, 8);
    for (int r = 0; r < 8; ++r) {
      for (int k = 0; k < 8; ++k) board(r, k) = (r + k) % 2;
    }
    const JointPdf d = joint_histogram(board, board, 2);
    CHECK(d.p[1] == 0.0);
    CHECK(d.p[2] == 0.0);
    CHECK(d.p[0] == doctest::Approx(0.5));

    CHECK_THROWS_AS(joint_histogram(Raster(3, 3), Raster(3, 4), 4), Error);
  }

  TEST_CASE("joint_histogram marginals") {
    std::mt19937_64 rng(2);
    const Raster a = noise(20, 20, rng), b = noise(20, 20, rng), c = noise(20, 20, rng);
    const JointPdf abc = joint_histogram(a, b, c, 6);
    const JointPdf ab = joint_histogram(a, b, 6);
    const JointPdf m = abc.marginal({0, 1});
    REQUIRE(m.p.size() == ab.p.size());
    for (std::size_t i = 0; i < m.p.size(); ++i) CHECK(m.p[i] == doctest::Approx(ab.p[i]).epsilon(1e-12));
  }

  TEST_CASE("entropy") {
    const std::vector<double> point{0, 1, 0};
    CHECK(entropy(point) == 0.0);
    const std::vector<double> uniform(4, 0.25);
    CHECK(entropy(uniform) == doctest::Approx(2.0));
    const std::vector<double> p{0.5, 0.25, 0.25};
    CHECK(entropy(p) == doctest::Approx(1.5));
    const std::vector<double> bad{0.5, 0.4};
    try {
      entropy(bad);
      FAIL("expected NotNormalized");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NotNormalized);
    }
  }

  TEST_CASE("mutual information examples") {
    Raster half(4, 8);
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 8; ++c) half(r, c) = c < 4;
    }
    HistogramSpec spec;
    CHECK(mutual_information(half, half, spec) == doctest::Approx(1.0).epsilon(1e-12));

    std::mt19937_64 rng(3);
    HistogramSpec two;
    two.bins = 2;
    CHECK(mutual_information(noise(100, 100, rng), noise(100, 100, rng), two) < 0.02);
  }

  TEST_CASE("mutual information equals the brute-force double sum") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 200; ++t) {
      const Raster a = levels(4, 4, 3 + t % 5, rng), b = levels(4, 4, 2 + t % 4, rng);
      for (int bins : {2, 4, 64}) {
        HistogramSpec spec;
        spec.bins = bins;
        CHECK(std::abs(mutual_information(a, b, spec) - brute_mi(a, b, bins)) < 1e-12);
      }
    }
  }

  TEST_CASE("mutual information properties") {
    std::mt19937_64 rng(5);
    HistogramSpec spec;
    for (int t = 0; t < 100; ++t) {
      const Raster a = noise(16, 16, rng), b = levels(16, 16, 7, rng);
      const double ab = mutual_information(a, b, spec), ba = mutual_information(b, a, spec);
      CHECK(std::abs(ab - ba) < 1e-12);
      CHECK(ab >= -1e-12);
      const double haa = entropy(joint_histogram(a, spec.bins).p);
      CHECK(std::abs(mutual_information(a, a, spec) - haa) < 1e-12);
    }
  }

  TEST_CASE("ncmi examples") {
    std::mt19937_64 rng(6);
    const Raster a = levels(32, 32, 5, rng);
    HistogramSpec spec;
    CHECK(ncmi(a, a, a, spec) == doctest::Approx(2.0).epsilon(1e-12));

    // C independent of (A, B) by construction: every (a, c) combination once.
    Raster x(16, 16), y(16, 16), z(16, 16);
    for (int r = 0; r < 16; ++r) {
      for (int c = 0; c < 16; ++c) {
        x(r, c) = r % 4;
        y(r, c) = r / 4;
        z(r, c) = c % 4;
      }
    }
    HistogramSpec four;
    four.ncmi_bins = 4;
    CHECK(ncmi(x, y, z, four) == doctest::Approx(1.0).epsilon(1e-12));

    try {
      ncmi(Raster(4, 4, 1.0), Raster(4, 4, 1.0), Raster(4, 4, 1.0), spec);
      FAIL("expected DegenerateEntropy");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::DegenerateEntropy);
    }
  }

  TEST_CASE("ncmi bounds and brute force") {
    std::mt19937_64 rng(7);
    HistogramSpec spec;
    for (int t = 0; t < 1000; ++t) {
      const int n = 6 + t % 10;
      const Raster a = noise(n, n, rng), b = levels(n, n, 1 + t % 6, rng), c = levels(n, n, 2 + t % 9, rng);
      const double v = ncmi(a, b, c, spec);
      CHECK(v >= 1.0 - 1e-12);
      CHECK(v <= 2.0 + 1e-12);
      if (t < 100) CHECK(std::abs(v - brute_ncmi(a, b, c, spec.ncmi_bins)) < 1e-12);
    }
  }

  TEST_CASE("nelder_mead") {
    const auto rosen = [](const std::vector<double>& x) {
      return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2);
    };
    NelderMeadConfig cfg;
    cfg.max_evaluations = 5000;
    cfg.tolerance = 1e-14;
    const auto r = nelder_mead(rosen, {-1.2, 1.0}, {0.5, 0.5}, cfg);
    CHECK(r.converged);
    CHECK(std::abs(r.x[0] - 1) < 1e-3);
    CHECK(std::abs(r.x[1] - 1) < 1e-3);
    CHECK(r.value <= r.initial_value);

    NelderMeadConfig tight;
    tight.max_evaluations = 30;
    const auto s = nelder_mead(rosen, {-1.2, 1.0}, {0.5, 0.5}, tight);
    CHECK(s.evaluations <= 30);
    CHECK(s.value <= s.initial_value);

    const auto quad = [](const std::vector<double>& x) {
      double s = 0;
      for (std::size_t i = 0; i < x.size(); ++i) s += (i + 1) * (x[i] - 0.5) * (x[i] - 0.5);
      return s;
    };
    const auto q = nelder_mead(quad, std::vector<double>(6, 0.0), std::vector<double>(6, 0.3), {});
    CHECK(q.value < q.initial_value);
    CHECK(q.evaluations <= 200);
  }
}
