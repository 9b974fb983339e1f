#include <cmath>
#include <random>

#include "doctest.h"
#include "lfdepth/domain_transform.hpp"
#include "lfdepth/errors.hpp"
#include "lfdepth/parallel.hpp"
#include "lfdepth/reference.hpp"
#include "oracles.hpp"

using namespace lfdepth;

TEST_CASE("constant signal is a fixed point") {
  std::mt19937 gen(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> signal(30, 0.7), weights(30, 1.0), guide(90);
  for (double& g : guide) g = u(gen);
  const auto out = domain_transform_1d(signal, weights, guide, 3, 10.0, 0.1);
  for (double v : out) CHECK(v == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("impulse response equals the expanded recurrence") {
  std::vector<double> signal(9, 0.0), weights(9, 1.0), guide(9, 0.5);
  signal[4] = 1.0;
  const auto got = domain_transform_1d(signal, weights, guide, 1, 2.0, 1.0);
  const auto want = oracle::domain_transform_expansion(signal, weights, guide, 1, 2.0, 1.0);
  for (int i = 0; i < 9; ++i) CHECK(std::abs(got[i] - want[i]) < 1e-12);
}

TEST_CASE("tiny range sigma separates the two sides of a guide edge") {
  const int n = 20;
  std::vector<double> signal(n), weights(n, 1.0), guide(n);
  for (int i = 0; i < n; ++i) {
    signal[i] = std::sin(0.7 * i);
    guide[i] = i < 10 ? 0.0 : 1.0;
  }
  const auto joint = domain_transform_1d(signal, weights, guide, 1, 5.0, 1e-6);
  const std::vector<double> ls(signal.begin(), signal.begin() + 10), rs(signal.begin() + 10, signal.end());
  const std::vector<double> lw(10, 1.0), lg(10, 0.0), rg(10, 1.0);
  const auto left = domain_transform_1d(ls, lw, lg, 1, 5.0, 1e-6);
  const auto right = domain_transform_1d(rs, lw, rg, 1, 5.0, 1e-6);
  for (int i = 0; i < 10; ++i) {
    CHECK(std::abs(joint[i] - left[i]) < 1e-6);
    CHECK(std::abs(joint[10 + i] - right[i]) < 1e-6);
  }
}

TEST_CASE("filter is linear in the signal") {
  std::mt19937 gen(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 40;
  std::vector<double> s1(n), s2(n), mix(n), w(n), g(n);
  for (int i = 0; i < n; ++i) {
    s1[i] = u(gen);
    s2[i] = u(gen);
    mix[i] = 2.5 * s1[i] - 0.75 * s2[i];
    w[i] = u(gen);
    g[i] = u(gen);
  }
  const auto f1 = domain_transform_1d(s1, w, g, 1, 8.0, 0.2);
  const auto f2 = domain_transform_1d(s2, w, g, 1, 8.0, 0.2);
  const auto fm = domain_transform_1d(mix, w, g, 1, 8.0, 0.2);
  for (int i = 0; i < n; ++i) CHECK(std::abs(fm[i] - (2.5 * f1[i] - 0.75 * f2[i])) < 1e-9);
}

TEST_CASE("zero weights and bad widths are rejected") {
  std::vector<double> s(4, 1.0), w(4, 0.0), g(4, 0.0);
  CHECK_THROWS_AS(domain_transform_1d(s, w, g, 1, 1.0, 1.0), NoDataError);
  w[0] = 1.0;
  CHECK_THROWS_AS(domain_transform_1d(s, w, g, 1, 0.0, 1.0), SizeError);
  CHECK_THROWS_AS(domain_transform_1d(s, w, std::vector<double>(3), 1, 1.0, 1.0), SizeError);
  DtParams p;
  p.iterations = 0;
  CHECK_THROWS_AS(p.validate(), SizeError);
}

TEST_CASE("iteration widths add up to the requested variance") {
  for (int n : {1, 2, 3, 5}) {
    double var = 0.0;
    for (int i = 1; i <= n; ++i) var += std::pow(iteration_sigma(30.0, i, n), 2);
    CHECK(var == doctest::Approx(900.0));
  }
}

TEST_CASE("2d filtering stays within the convex hull of the weighted inputs") {
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Image guide = oracle::noise_image(31, 23, 4);
  Image num(31, 23, 1), den(31, 23, 1);
  for (std::size_t i = 0; i < num.pixel_count(); i += 7) {
    const double v = 1.0 + 2.0 * u(gen);
    num.data()[i] = v;
    den.data()[i] = 1.0;
  }
  dt_filter_2d(num, den, guide, 20.0, 0.1, 3);
  const Image out = normalize_planes(num, den, 2.0);
  for (double v : out.data()) {
    CHECK(v >= 1.0);
    CHECK(v <= 3.0);
  }
}

TEST_CASE("parallel 2d filter matches the serial reference bit for bit") {
  const Image guide = oracle::noise_image(70, 45, 5);
  Image num(70, 45, 1), den(70, 45, 1);
  std::mt19937 gen(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < num.pixel_count(); ++i) {
    den.data()[i] = u(gen) < 0.2 ? u(gen) : 0.0;
    num.data()[i] = den.data()[i] * u(gen);
  }
  Image rnum = num, rden = den;
  set_num_threads(4);
  dt_filter_2d(num, den, guide, 15.0, 0.08, 3);
  set_num_threads(0);
  reference::dt_filter_2d(rnum, rden, guide, 15.0, 0.08, 3);
  CHECK(num == rnum);
  CHECK(den == rden);
}
