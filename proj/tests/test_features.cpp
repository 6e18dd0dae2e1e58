// Tests for history-referencing design terms and the built-in model
// flexibilities.  Worked examples use a small hand-built history whose sums
// and averages are computed explicitly in the test.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <gnull/error.hpp>
#include <gnull/features.hpp>
#include <gnull/rng.hpp>

#include <cmath>
#include <string>
#include <vector>

using namespace gnull;
using namespace gnull::features;

namespace {

template <typename F>
errc code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error to be thrown");
  return errc::invalid_argument;
}

// History for K = 2 with prebaseline 9: l_t = (t + 10) / 10 for
// t = -9..2, a = (10, 20, 30) at times 0..2, u = 0.4.
HistoryView k2_history(const std::vector<double>& l,
                       const std::vector<double>& a) {
  HistoryView h;
  h.l = l;
  h.a = a;
  h.u = 0.4;
  h.prebaseline = 9;
  return h;
}

std::vector<double> ramp_l(int K) {
  std::vector<double> l;
  for (int t = -9; t <= K; ++t) l.push_back((t + 10) / 10.0);
  return l;
}

}  // namespace

TEST_CASE("level names round-trip") {
  for (Level lv : {Level::least, Level::moderate, Level::most,
                   Level::benchmark, Level::custom}) {
    auto back = level_from_name(level_name(lv));
    REQUIRE(back.has_value());
    CHECK(*back == lv);
  }
  CHECK_FALSE(level_from_name("medium").has_value());
  CHECK_FALSE(level_from_name("").has_value());
  CHECK(std::string(level_name(Level::least)) == "least");
  CHECK(std::string(level_name(Level::benchmark)) == "benchmark");
}

TEST_CASE("built-in term lists are exactly as specified") {
  auto least5 = builtin_spec(Level::least, 5);
  CHECK(least5.covariate_terms ==
        std::vector<Term>{Term::intercept(), Term::treatment_lag(1),
                          Term::covariate_cumavg(-9, -1)});
  CHECK(least5.outcome_terms ==
        std::vector<Term>{Term::intercept(), Term::treatment_lag(0),
                          Term::treatment_lag(1), Term::treatment_cumsum(0, -2),
                          Term::covariate_cumsum(-9, 0)});
  CHECK(least5.label == "least");
  CHECK_FALSE(least5.uses_u());

  // At K = 1 the running treatment sum has an empty range and is dropped.
  auto least1 = builtin_spec(Level::least, 1);
  CHECK(least1.outcome_terms ==
        std::vector<Term>{Term::intercept(), Term::treatment_lag(0),
                          Term::treatment_lag(1),
                          Term::covariate_cumsum(-9, 0)});

  auto mod5 = builtin_spec(Level::moderate, 5);
  CHECK(mod5.covariate_terms ==
        std::vector<Term>{Term::intercept(), Term::treatment_lag(1),
                          Term::covariate_lag(1), Term::covariate_lag(2),
                          Term::covariate_cumavg(-9, -3)});
  CHECK(mod5.outcome_terms ==
        std::vector<Term>{Term::intercept(), Term::treatment_lag(0),
                          Term::treatment_lag(1), Term::treatment_cumsum(0, -2),
                          Term::covariate_lag(0), Term::covariate_lag(1),
                          Term::covariate_lag(2),
                          Term::covariate_cumsum(-9, -3)});

  auto most5 = builtin_spec(Level::most, 5);
  std::vector<Term> most_cov{Term::intercept(), Term::treatment_lag(1)};
  for (int lag = 1; lag <= 10; ++lag) most_cov.push_back(Term::covariate_lag(lag));
  CHECK(most5.covariate_terms == most_cov);
  std::vector<Term> most_out{Term::intercept(), Term::treatment_lag(0),
                             Term::treatment_lag(1),
                             Term::treatment_cumsum(0, -2)};
  for (int lag = 0; lag <= 10; ++lag) most_out.push_back(Term::covariate_lag(lag));
  CHECK(most5.outcome_terms == most_out);

  auto bench5 = builtin_spec(Level::benchmark, 5);
  CHECK(bench5.covariate_terms ==
        std::vector<Term>{Term::intercept(), Term::treatment_lag(1),
                          Term::unmeasured_u(), Term::treatment_lag_times_u(1)});
  CHECK(bench5.outcome_terms ==
        std::vector<Term>{Term::intercept(), Term::unmeasured_u(),
                          Term::treatment_lag(0), Term::treatment_lag(1),
                          Term::treatment_cumsum(0, -2)});
  CHECK(bench5.uses_u());
}

TEST_CASE("builtin_spec rejects bad arguments") {
  CHECK(code_of([] { (void)builtin_spec(Level::least, 0); }) ==
        errc::invalid_argument);
  CHECK(code_of([] { (void)builtin_spec(Level::custom, 5); }) ==
        errc::invalid_argument);
}

TEST_CASE("covariate rows on a hand-built history") {
  auto l = ramp_l(2);  // l_t = (t+10)/10, t = -9..2
  std::vector<double> a{10.0, 20.0, 30.0};
  auto h = k2_history(l, a);

  // least at k = 2: (1, a_1, mean of l_{-9..1}).
  // Sum of 0.1..1.1 = 6.6 over 11 values -> 0.6.
  auto least = builtin_spec(Level::least, 2);
  auto row = covariate_row(h, 2, least);
  REQUIRE(row.size() == 3);
  CHECK(row[0] == 1.0);
  CHECK(row[1] == 20.0);
  CHECK(row[2] == doctest::Approx(0.6).epsilon(1e-14));

  // moderate at k = 2: (1, a_1, l_1, l_0, mean of l_{-9..-1}).
  // Sum of 0.1..0.9 = 4.5 over 9 values -> 0.5.
  auto mod = builtin_spec(Level::moderate, 2);
  auto mrow = covariate_row(h, 2, mod);
  REQUIRE(mrow.size() == 5);
  CHECK(mrow[0] == 1.0);
  CHECK(mrow[1] == 20.0);
  CHECK(mrow[2] == doctest::Approx(1.1).epsilon(1e-14));
  CHECK(mrow[3] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(mrow[4] == doctest::Approx(0.5).epsilon(1e-14));

  // benchmark at k = 1: (1, a_0, u, a_0 u).
  auto bench = builtin_spec(Level::benchmark, 2);
  auto brow = covariate_row(h, 1, bench);
  REQUIRE(brow.size() == 4);
  CHECK(brow[0] == 1.0);
  CHECK(brow[1] == 10.0);
  CHECK(brow[2] == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(brow[3] == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("outcome rows on a hand-built history") {
  auto l = ramp_l(2);
  std::vector<double> a{10.0, 20.0, 30.0};
  auto h = k2_history(l, a);

  // least at K = 2: (1, a_2, a_1, a_0, sum of l_{-9..2} = 7.8).
  auto least = builtin_spec(Level::least, 2);
  auto row = outcome_row(h, 2, least);
  REQUIRE(row.size() == 5);
  CHECK(row[0] == 1.0);
  CHECK(row[1] == 30.0);
  CHECK(row[2] == 20.0);
  CHECK(row[3] == doctest::Approx(10.0).epsilon(1e-14));  // cumsum 0..0
  CHECK(row[4] == doctest::Approx(7.8).epsilon(1e-12));

  // moderate at K = 2 appends (l_2, l_1, l_0, sum of l_{-9..-1} = 4.5).
  auto mod = builtin_spec(Level::moderate, 2);
  auto mrow = outcome_row(h, 2, mod);
  REQUIRE(mrow.size() == 8);
  CHECK(mrow[4] == doctest::Approx(1.2).epsilon(1e-14));
  CHECK(mrow[5] == doctest::Approx(1.1).epsilon(1e-14));
  CHECK(mrow[6] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(mrow[7] == doctest::Approx(4.5).epsilon(1e-12));
}

TEST_CASE("K = 1 rows reach exactly to the edge of the prebaseline window") {
  auto l = ramp_l(1);  // times -9..1
  std::vector<double> a{10.0, 20.0};
  auto h = k2_history(l, a);

  // most at k = 1: lags 1..10 walk back to l_{-9} = 0.1 exactly.
  auto most = builtin_spec(Level::most, 1);
  auto row = covariate_row(h, 1, most);
  REQUIRE(row.size() == 12);
  CHECK(row[0] == 1.0);
  CHECK(row[1] == 10.0);
  for (int j = 1; j <= 10; ++j) {
    CHECK(row[1 + j] == doctest::Approx((11 - j) / 10.0).epsilon(1e-14));
  }

  // least outcome at K = 1: no running treatment sum.
  auto least = builtin_spec(Level::least, 1);
  auto orow = outcome_row(h, 1, least);
  REQUIRE(orow.size() == 4);
  CHECK(orow[1] == 20.0);
  CHECK(orow[2] == 10.0);
  CHECK(orow[3] == doctest::Approx(6.6).epsilon(1e-12));

  // benchmark outcome at K = 1: (1, u, a_1, a_0).
  auto bench = builtin_spec(Level::benchmark, 1);
  auto brow = outcome_row(h, 1, bench);
  REQUIRE(brow.size() == 4);
  CHECK(brow[1] == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(brow[2] == 20.0);
  CHECK(brow[3] == 10.0);
}

TEST_CASE("an empty cumulative-sum range evaluates to zero") {
  auto l = ramp_l(1);
  std::vector<double> a{10.0, 20.0};
  auto h = k2_history(l, a);
  ModelSpec spec;
  spec.outcome_terms = {Term::treatment_cumsum(0, -2),
                        Term::covariate_cumsum(1, -5)};
  auto row = outcome_row(h, 1, spec);
  CHECK(row[0] == 0.0);
  CHECK(row[1] == 0.0);
}

TEST_CASE("rows for every flexibility and horizon are finite") {
  Rng rng(5150);
  for (int K : {1, 5, 10}) {
    std::vector<double> l, a;
    for (int t = -9; t <= K; ++t) l.push_back(rng.uniform01());
    for (int t = 0; t <= K; ++t) a.push_back(rng.uniform01() * 100.0);
    HistoryView h;
    h.l = l;
    h.a = a;
    h.u = rng.uniform01();
    for (Level lv : {Level::least, Level::moderate, Level::most,
                     Level::benchmark}) {
      auto spec = builtin_spec(lv, K);
      for (int k = 1; k <= K; ++k) {
        auto row = covariate_row(h, k, spec);
        REQUIRE(row.size() == spec.covariate_terms.size());
        for (double v : row) REQUIRE(std::isfinite(v));
      }
      auto orow = outcome_row(h, K, spec);
      REQUIRE(orow.size() == spec.outcome_terms.size());
      for (double v : orow) REQUIRE(std::isfinite(v));
    }
  }
}

TEST_CASE("running averages divide by the window width") {
  // Constant covariate: any running average equals the constant, so the
  // divisor must equal the number of summed terms.
  std::vector<double> l(9 + 6, 0.7);
  std::vector<double> a(6, 1.0);
  HistoryView h;
  h.l = l;
  h.a = a;
  h.prebaseline = 9;
  for (int k = 1; k <= 5; ++k) {
    ModelSpec least;
    least.covariate_terms = {Term::covariate_cumavg(-9, -1)};
    auto row = covariate_row(h, k, least);
    CHECK(row[0] == doctest::Approx(0.7).epsilon(1e-14));
    ModelSpec mod;
    mod.covariate_terms = {Term::covariate_cumavg(-9, -3)};
    if (k >= 1) {
      auto mrow = covariate_row(h, k, mod);
      CHECK(mrow[0] == doctest::Approx(0.7).epsilon(1e-14));
    }
  }
  // And with a ramp the sums differ: l_t = t at times -9.., window -9..-1
  // sums to -45 over 9 values at k = 0+... checked directly at k = 1:
  std::vector<double> ramp;
  for (int t = -9; t <= 6; ++t) ramp.push_back(static_cast<double>(t));
  h.l = ramp;
  ModelSpec avg;
  avg.covariate_terms = {Term::covariate_cumavg(-9, -1)};
  auto r1 = covariate_row(h, 1, avg);  // times -9..0: sum -45, count 10
  CHECK(r1[0] == doctest::Approx(-4.5).epsilon(1e-14));
  auto r3 = covariate_row(h, 3, avg);  // times -9..2: sum -42, count 12
  CHECK(r3[0] == doctest::Approx(-3.5).epsilon(1e-14));
}

TEST_CASE("terms outside the recorded history are errors") {
  auto l = ramp_l(1);
  std::vector<double> a{10.0, 20.0};
  auto h = k2_history(l, a);

  ModelSpec deep;
  deep.covariate_terms = {Term::covariate_lag(11)};
  CHECK(code_of([&] { (void)covariate_row(h, 1, deep); }) ==
        errc::missing_history);

  ModelSpec early;
  early.covariate_terms = {Term::treatment_lag(2)};
  CHECK(code_of([&] { (void)covariate_row(h, 1, early); }) ==
        errc::missing_history);

  ModelSpec wide;
  wide.outcome_terms = {Term::covariate_cumsum(-10, 0)};
  CHECK(code_of([&] { (void)outcome_row(h, 1, wide); }) ==
        errc::missing_history);

  ModelSpec future;
  future.covariate_terms = {Term::covariate_lag(0)};
  // The covariate model for l_k may only reference history through k-1.
  CHECK(code_of([&] { (void)covariate_row(h, 1, future); }) ==
        errc::missing_history);
}

TEST_CASE("terms that need u fail cleanly without it") {
  auto l = ramp_l(1);
  std::vector<double> a{10.0, 20.0};
  HistoryView h;
  h.l = l;
  h.a = a;
  h.u = std::nullopt;
  auto bench = builtin_spec(Level::benchmark, 1);
  CHECK(code_of([&] { (void)covariate_row(h, 1, bench); }) == errc::missing_u);
  CHECK(code_of([&] { (void)outcome_row(h, 1, bench); }) == errc::missing_u);
}

TEST_CASE("an empty running-average range is rejected") {
  auto l = ramp_l(1);
  std::vector<double> a{10.0, 20.0};
  auto h = k2_history(l, a);
  ModelSpec spec;
  spec.covariate_terms = {Term::covariate_cumavg(0, -2)};
  CHECK(code_of([&] { (void)covariate_row(h, 1, spec); }) ==
        errc::invalid_argument);
}

TEST_CASE("row times outside the model domain are rejected") {
  auto l = ramp_l(1);
  std::vector<double> a{10.0, 20.0};
  auto h = k2_history(l, a);
  auto least = builtin_spec(Level::least, 1);
  CHECK(code_of([&] { (void)covariate_row(h, 0, least); }) ==
        errc::invalid_argument);
  CHECK(code_of([&] { (void)outcome_row(h, -1, least); }) ==
        errc::invalid_argument);
}
