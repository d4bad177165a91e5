#include <doctest.h>

#include <cmath>
#include <numbers>

#include "drive/evaluation.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace drive;
using namespace drive::eval;
using drive::test::Rng;

namespace {

constexpr double kPi = std::numbers::pi;

// Start line across the +x axis of a circle centred on the origin, oriented so
// that counterclockwise travel crosses it forwards.
Segment circle_start_line(double r) { return {{r + 5, 0}, {r - 5, 0}}; }

sim::Trajectory circle_path(double r, double turns, int per_turn, double speed = 10.0, bool ccw = true) {
  sim::Trajectory t;
  const int n = static_cast<int>(turns * per_turn);
  for (int i = 0; i <= n; ++i) {
    const double a = 0.01 + 2 * kPi * i / per_turn;
    const double s = ccw ? a : -a;
    t.samples.push_back({static_cast<std::uint64_t>(i + 1) * sim::kTickNs, r * std::cos(s), r * std::sin(s), speed});
  }
  return t;
}

Polyline circle_line(double r, int n) {
  Polyline p;
  for (int i = 0; i <= n; ++i) p.push_back({r * std::cos(2 * kPi * i / n), r * std::sin(2 * kPi * i / n)});
  return p;
}

}  // namespace

TEST_CASE("lap splitting") {
  SUBCASE("two-lap circle") {
    const auto traj = circle_path(50, 2.5, 1000);
    const LapSet laps = split_laps(traj, circle_start_line(50));
    REQUIRE(laps.laps.size() == 2);
    CHECK(laps.warmup_excluded);
    const auto a = laps.laps[0].samples.size();
    const auto b = laps.laps[1].samples.size();
    CHECK(std::abs(static_cast<long>(a) - static_cast<long>(b)) <= 1);
    // consecutive laps share the crossing sample
    CHECK(laps.laps[0].samples.back() == laps.laps[1].samples.front());
    CHECK(&laps.scoring_lap() == &laps.laps[1]);
  }
  SUBCASE("path that never crosses") {
    const auto traj = circle_path(50, 0.5, 1000);
    CHECK_THROWS_AS(split_laps(traj, circle_start_line(50)), IncompleteSession);
    try {
      split_laps(traj, circle_start_line(50));
    } catch (const IncompleteSession& e) {
      CHECK(std::string(e.what()) == "incomplete session");
    }
  }
  SUBCASE("reverse-direction crossings do not count") {
    const auto traj = circle_path(50, 3.0, 1000, 10.0, false);
    CHECK(find_crossings(traj.positions(), circle_start_line(50)).empty());
    CHECK_THROWS_AS(split_laps(traj, circle_start_line(50)), IncompleteSession);
  }
  SUBCASE("crossings outside the start segment do not count") {
    const auto traj = circle_path(50, 2.5, 1000);
    CHECK(find_crossings(traj.positions(), circle_start_line(80)).empty());
  }
}

TEST_CASE("discrete Frechet distance") {
  CHECK(discrete_frechet({{0, 0}, {1, 0}}, {{0, 1}, {1, 1}}) == 1.0);
  CHECK(test::oracle::frechet_exhaustive({{0, 0}, {1, 0}}, {{0, 1}, {1, 1}}) == 1.0);
  CHECK(discrete_frechet({{0, 0}}, {{3, 4}}) == 5.0);
  CHECK_THROWS_AS(discrete_frechet({}, {{0, 0}}), InvalidArgument);

  Rng rng(61);
  for (int trial = 0; trial < 300; ++trial) {
    const Polyline p = test::random_polyline(rng, 1, 8, 0, 10);
    const Polyline q = test::random_polyline(rng, 1, 8, 0, 10);
    const double d = discrete_frechet(p, q);
    CHECK(d == test::oracle::frechet_exhaustive(p, q));
    CHECK(d == test::oracle::frechet_table(p, q));
    CHECK(d == discrete_frechet(q, p));
    CHECK(discrete_frechet(p, p) == 0.0);
    CHECK(d >= distance(p.front(), q.front()));
    CHECK(d >= distance(p.back(), q.back()));
  }
  for (int trial = 0; trial < 30; ++trial) {
    const Polyline p = test::random_polyline(rng, 50, 400, -100, 100);
    const Polyline q = test::random_polyline(rng, 50, 400, -100, 100);
    CHECK(discrete_frechet(p, q) == test::oracle::frechet_table(p, q));
  }
}

TEST_CASE("resampling") {
  const Polyline p{{0, 0}, {3, 0}, {3, 4}};
  const Polyline r = resample_uniform(p, 8);
  REQUIRE(r.size() == 8);
  CHECK(r.front() == p.front());
  CHECK(r.back() == p.back());
  for (std::size_t i = 1; i < r.size(); ++i) CHECK(polyline_length({r[i - 1], r[i]}) <= 1.0 + 1e-12);
  CHECK(r[3] == Vec2{3, 0});
  CHECK_THROWS_AS(resample_uniform({{1, 1}}, 5), InvalidArgument);
  CHECK_THROWS_AS(resample_uniform({{1, 1}, {1, 1}}, 5), InvalidArgument);
  CHECK_THROWS_AS(resample_uniform(p, 1), InvalidArgument);

  Rng rng(62);
  for (int trial = 0; trial < 100; ++trial) {
    const Polyline q = test::random_polyline(rng, 2, 30, -50, 50);
    const auto n = static_cast<std::size_t>(rng.integer(2, 300));
    const Polyline a = resample_uniform(q, n);
    const Polyline b = test::oracle::resample(q, n);
    REQUIRE(a.size() == b.size());
    double worst = 0;
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, distance(a[i], b[i]));
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("area between curves") {
  CHECK(area_between({{0, 0}, {2, 0}}, {{0, 1}, {2, 1}}) == 2.0);
  CHECK(std::abs(area_between({{0, 0}, {2, 0}}, {{0, 0}, {2, 2}}) - 2.0) <= 1e-6);
  const Polyline wiggle{{0, 0}, {1, 2}, {3, -1}, {4, 0}};
  CHECK(area_between(wiggle, wiggle) == 0.0);

  Rng rng(63);
  for (int trial = 0; trial < 100; ++trial) {
    const Polyline p = test::random_polyline(rng, 2, 12, -20, 20);
    const Polyline q = test::random_polyline(rng, 2, 12, -20, 20);
    const double a = area_between(p, q);
    CHECK(a >= 0.0);
    CHECK(a == doctest::Approx(area_between(q, p)).epsilon(1e-12));
    CHECK(a == doctest::Approx(test::oracle::area(p, q, 200)).epsilon(1e-10));

    const double s = rng.real(0.1, 10);
    Polyline ps = p, qs = q;
    for (auto& v : ps) v = v * s;
    for (auto& v : qs) v = v * s;
    CHECK(area_between(ps, qs) == doctest::Approx(a * s * s).epsilon(1e-9));

    const Vec2 shift{rng.real(-1e3, 1e3), rng.real(-1e3, 1e3)};
    for (auto& v : ps) v = v + shift;
    for (auto& v : qs) v = v + shift;
    CHECK(area_between(ps, qs) == doctest::Approx(a * s * s).epsilon(1e-7));
  }
}

TEST_CASE("area converges for smooth curves") {
  // Sine against its phase-shifted copy, and two concentric arcs.
  Polyline sine, cosine, inner, outer;
  for (int i = 0; i <= 500; ++i) {
    const double x = 4 * kPi * i / 500;
    sine.push_back({x, std::sin(x)});
    cosine.push_back({x, 0.5 * std::cos(x)});
    inner.push_back({10 * std::cos(kPi * i / 500), 10 * std::sin(kPi * i / 500)});
    outer.push_back({12 * std::cos(kPi * i / 500), 12 * std::sin(kPi * i / 500)});
  }
  for (const auto& [p, q] : {std::pair{sine, cosine}, std::pair{inner, outer}}) {
    const double a = area_between(p, q, 200);
    const double b = area_between(p, q, 400);
    CHECK(std::abs(b - a) / b < 0.005);
  }
  // Annulus half: pi (12^2 - 10^2) / 2
  CHECK(area_between(inner, outer, 400) == doctest::Approx(kPi * 44 / 2).epsilon(1e-3));
}

TEST_CASE("speed statistics") {
  LapSet laps;
  laps.laps.resize(2);
  for (int i = 0; i < 10; ++i) laps.laps[1].samples.push_back({0, 0, 0, 10.0});
  MeanStd m = speed_stats(laps);
  CHECK(m.mean == doctest::Approx(36.0));
  CHECK(m.std == 0.0);
  laps.laps[1].samples.clear();
  for (int i = 0; i < 10; ++i) laps.laps[1].samples.push_back({0, 0, 0, i % 2 ? 14.0 : 10.0});
  m = speed_stats(laps);
  CHECK(m.mean == doctest::Approx(43.2));
  CHECK(m.std == doctest::Approx(7.2));
  laps.laps.resize(1);
  CHECK_THROWS_AS(speed_stats(laps), IncompleteSession);
  CHECK_THROWS_AS(mean_std({}), InvalidArgument);
}

TEST_CASE("report aggregation") {
  const Polyline line = circle_line(50, 400);
  const Segment start = circle_start_line(50);
  std::vector<Session> sessions;
  sessions.push_back({"A", "01", circle_path(51, 2.3, 700, 10)});
  sessions.push_back({"B", "01", circle_path(51, 2.3, 700, 10)});

  SUBCASE("identical sessions give identical condition rows; one session means zero spread") {
    const EvalReport r = make_report(sessions, line, start);
    const auto& a = r.conditions.at("A");
    const auto& b = r.conditions.at("B");
    CHECK(a.frechet_m.mean == b.frechet_m.mean);
    CHECK(a.area_m2.mean == b.area_m2.mean);
    CHECK(a.speed_kmh.mean == b.speed_kmh.mean);
    CHECK(a.frechet_m.std == 0.0);
    CHECK(a.n_participants == 1);
    CHECK(a.frechet_m.mean == doctest::Approx(1.0).epsilon(0.05));
    CHECK(a.speed_kmh.mean == doctest::Approx(36.0));
  }
  SUBCASE("csv and table formats") {
    sessions.push_back({"A", "02", circle_path(53, 2.3, 700, 12)});
    const EvalReport r = make_report(sessions, line, start);
    const std::string csv = r.csv();
    CHECK(csv.rfind("condition,metric,mean,std\n", 0) == 0);
    CHECK(csv.find("\nA,frechet_m,") != std::string::npos);
    CHECK(csv.find("\nB,speed_kmh,36.000000,0.000000\n") != std::string::npos);
    CHECK(r.conditions.at("A").n_participants == 2);
    CHECK(r.conditions.at("A").frechet_m.std > 0.0);
    const std::string table = r.table();
    CHECK(table.find("km/h") != std::string::npos);
  }
  SUBCASE("incomplete session names itself") {
    sessions.push_back({"A", "07", circle_path(51, 0.4, 700, 10)});
    try {
      make_report(sessions, line, start);
      FAIL("expected failure");
    } catch (const IncompleteSession& e) {
      CHECK(std::string(e.what()).find("A_07") != std::string::npos);
    }
  }
}

TEST_CASE("session directory loading") {
  test::TempDir dir;
  sim::save_trajectory_csv(circle_path(51, 2.3, 300), dir / "B_02.csv");
  sim::save_trajectory_csv(circle_path(51, 2.3, 300), dir / "A_10.csv");
  sim::save_trajectory_csv(circle_path(51, 2.3, 300), dir / "A_01.csv");
  test::write_text(dir / "notes.txt", "ignored");
  const auto sessions = load_sessions(dir.path());
  REQUIRE(sessions.size() == 3);
  CHECK(sessions[0].condition == "A");
  CHECK(sessions[0].id == "01");
  CHECK(sessions[1].id == "10");
  CHECK(sessions[2].condition == "B");
  CHECK_THROWS_AS(load_sessions(dir / "missing"), IoError);
}

TEST_CASE("evaluation matches the brute-force recomputation from CSV text") {
  const Polyline line = circle_line(50, 360);
  const Segment start = circle_start_line(50);
  Rng rng(64);
  for (int trial = 0; trial < 5; ++trial) {
    sim::Trajectory t = circle_path(rng.real(47, 53), 2.4, static_cast<int>(rng.integer(300, 900)), rng.real(5, 13));
    for (auto& s : t.samples) s.speed += rng.real(-1, 1);
    const std::string text = sim::trajectory_csv(t);
    const Session s{"A", "x", sim::parse_trajectory_csv(text)};
    const SessionMetrics m = evaluate_session(s, line, start);
    const auto o = test::oracle::evaluate(test::oracle::parse_trajectory(text), line, start.a, start.b, 200);
    CHECK(m.frechet_m == o.frechet_m);
    CHECK(m.area_m2 == doctest::Approx(o.area_m2).epsilon(1e-12));
    CHECK(m.speed_mean_kmh == doctest::Approx(o.speed_mean_kmh).epsilon(1e-12));
    CHECK(m.speed_std_kmh == doctest::Approx(o.speed_std_kmh).epsilon(1e-9));
  }
}
