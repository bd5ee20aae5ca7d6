#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "ptycho/fields.hpp"

using namespace ptycho;

namespace {

double rel_l2(const ComplexGrid& a, const ComplexGrid& b) {
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    num += std::norm(a.data[i] - b.data[i]);
    den += std::norm(b.data[i]);
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

}  // namespace

TEST_CASE("fft of a corner delta is flat in magnitude") {
  ComplexGrid g(2, 2);
  g.at(0, 0) = 1.0;
  const ComplexGrid f = fft2_unitary(g);
  for (const cdouble& z : f.data) CHECK(std::abs(z) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("fft of a constant concentrates at the center bin") {
  const int h = 4, w = 6;
  const double c = 2.5;
  ComplexGrid g(h, w);
  for (auto& z : g.data) z = c;
  const ComplexGrid f = fft2_unitary(g);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (y == h / 2 && x == w / 2) {
        CHECK(f.at(y, x).real() == doctest::Approx(c * std::sqrt(h * w)).epsilon(1e-12));
        CHECK(f.at(y, x).imag() == doctest::Approx(0.0).epsilon(1e-12));
      } else {
        CHECK(std::abs(f.at(y, x)) < 1e-12);
      }
    }
  }
}

TEST_CASE("Parseval holds over random grids of mixed sizes") {
  int trial = 0;
  for (int rep = 0; rep < 250; ++rep) {
    for (int n : {4, 8, 16, 32}) {
      const ComplexGrid g = oracle::random_grid(n, n, 100 + trial);
      const ComplexGrid f = fft2_unitary(g);
      const double pg = norm_sq(g);
      CHECK(std::abs(norm_sq(f) - pg) / pg <= 1e-12);
      ++trial;
    }
  }
}

TEST_CASE("inverse round trip reproduces the input") {
  const ComplexGrid g = oracle::random_grid(8, 8, 7);
  CHECK(rel_l2(ifft2_unitary(fft2_unitary(g)), g) <= 1e-12);
  CHECK(rel_l2(fft2_unitary(ifft2_unitary(g)), g) <= 1e-12);
}

TEST_CASE("inverse of a center-bin delta is a constant") {
  ComplexGrid g(4, 4);
  g.at(2, 2) = 2.0;
  const ComplexGrid out = ifft2_unitary(g);
  for (const cdouble& z : out.data) {
    CHECK(z.real() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(z.imag()) < 1e-12);
  }
}

TEST_CASE("forward and inverse transforms are mutually adjoint") {
  const ComplexGrid a = oracle::random_grid(8, 8, 21);
  const ComplexGrid b = oracle::random_grid(8, 8, 22);
  const cdouble lhs = inner(fft2_unitary(a), b);
  const cdouble rhs = inner(a, ifft2_unitary(b));
  CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
}

TEST_CASE("fft matches the quadratic-time reference") {
  const ComplexGrid g = oracle::random_grid(6, 5, 33);
  const ComplexGrid fast = fft2_unitary(g);
  const ComplexGrid slow = oracle::dft2_naive(g);
  CHECK(rel_l2(fast, slow) <= 1e-12);
  const ComplexGrid ifast = ifft2_unitary(g);
  const ComplexGrid islow = oracle::dft2_naive(g, true);
  CHECK(rel_l2(ifast, islow) <= 1e-12);
}

TEST_CASE("fft rejects non-finite input naming the first offending index") {
  ComplexGrid g(3, 3);
  g.at(1, 2) = cdouble(std::nan(""), 0.0);
  CHECK_THROWS_WITH_AS(fft2_unitary(g),
                       doctest::Contains("(row 1, col 2)"), std::invalid_argument);
}

TEST_CASE("extract_patch slices a ramp correctly") {
  ComplexGrid obj(4, 4);
  for (int i = 0; i < 16; ++i) obj.data[i] = static_cast<double>(i);
  const ComplexGrid p = extract_patch(obj, 1, 1, 2, 2);
  CHECK(p.at(0, 0).real() == 5.0);
  CHECK(p.at(0, 1).real() == 6.0);
  CHECK(p.at(1, 0).real() == 9.0);
  CHECK(p.at(1, 1).real() == 10.0);
}

TEST_CASE("extract_patch of the full frame is an identical copy") {
  const ComplexGrid obj = oracle::random_grid(5, 7, 44);
  const ComplexGrid p = extract_patch(obj, 0, 0, 5, 7);
  CHECK(rel_l2(p, obj) == 0.0);
}

TEST_CASE("extract_patch rejects out-of-bounds footprints") {
  const ComplexGrid obj = oracle::random_grid(4, 4, 45);
  CHECK_THROWS_AS((void)extract_patch(obj, 3, 3, 2, 2), std::invalid_argument);
  CHECK_THROWS_AS((void)extract_patch(obj, -1, 0, 2, 2), std::invalid_argument);
}

TEST_CASE("accumulate_patch sums overlapping contributions") {
  ComplexGrid obj(4, 4);
  ComplexGrid ones(2, 2);
  for (auto& z : ones.data) z = 1.0;
  accumulate_patch(obj, 0, 0, ones);
  accumulate_patch(obj, 1, 1, ones);
  CHECK(obj.at(1, 1).real() == 2.0);
  CHECK(obj.at(0, 0).real() == 1.0);
  CHECK(obj.at(2, 2).real() == 1.0);
  CHECK(obj.at(3, 3).real() == 0.0);
}

TEST_CASE("scatter then gather returns the patch") {
  ComplexGrid obj(6, 6);
  const ComplexGrid patch = oracle::random_grid(2, 3, 46);
  accumulate_patch(obj, 2, 1, patch);
  const ComplexGrid back = extract_patch(obj, 2, 1, 2, 3);
  CHECK(rel_l2(back, patch) == 0.0);
}

TEST_CASE("extract and accumulate are mutually adjoint") {
  const ComplexGrid x = oracle::random_grid(8, 8, 47);
  const ComplexGrid y = oracle::random_grid(3, 4, 48);
  const ComplexGrid ex = extract_patch(x, 2, 3, 3, 4);
  ComplexGrid scattered(8, 8);
  accumulate_patch(scattered, 2, 3, y);
  const cdouble lhs = inner(ex, y);
  const cdouble rhs = inner(x, scattered);
  CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
}

TEST_CASE("transforms are bitwise deterministic") {
  const ComplexGrid g = oracle::random_grid(16, 16, 49);
  const ComplexGrid a = fft2_unitary(g);
  const ComplexGrid b = fft2_unitary(g);
  for (size_t i = 0; i < a.data.size(); ++i) CHECK(a.data[i] == b.data[i]);
}

TEST_CASE("roll shifts circularly") {
  ComplexGrid g(3, 3);
  g.at(0, 0) = 1.0;
  const ComplexGrid r = roll(g, 1, 2);
  CHECK(r.at(1, 2).real() == 1.0);
  CHECK(norm_sq(r) == doctest::Approx(1.0));
  const ComplexGrid back = roll(r, -1, -2);
  CHECK(back.at(0, 0).real() == 1.0);
}

TEST_CASE("dataset validation flags mismatched counts and bad intensities") {
  DiffractionDataset data;
  data.patterns.emplace_back(2, 2);
  CHECK_THROWS_AS(data.validate(), std::invalid_argument);
  data.positions.offsets.push_back({0, 0});
  CHECK_NOTHROW(data.validate());
  data.patterns[0].at(0, 1) = -1.0;
  CHECK_THROWS_AS(data.validate(), std::invalid_argument);
}
