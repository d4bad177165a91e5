#include "drive/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace drive::eval {

const sim::Trajectory& LapSet::scoring_lap() const {
  if (laps.size() < 2) throw IncompleteSession("incomplete session");
  return laps[1];
}

std::vector<std::size_t> find_crossings(const Polyline& path, const Segment& line) {
  std::vector<std::size_t> out;
  const Vec2 d = line.b - line.a;
  const double len2 = dot(d, d);
  if (len2 == 0.0) throw InvalidArgument("start line is degenerate");
  // Points ahead of the line (in travel direction) have negative side values.
  auto side = [&](Vec2 p) { return cross(d, p - line.a); };
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const double s0 = side(path[i]);
    const double s1 = side(path[i + 1]);
    if (!(s0 > 0.0 && s1 <= 0.0)) continue;
    const double t = s0 / (s0 - s1);
    const Vec2 hit = path[i] + (path[i + 1] - path[i]) * t;
    const double u = dot(hit - line.a, d) / len2;
    if (u >= 0.0 && u <= 1.0) out.push_back(i + 1);
  }
  return out;
}

LapSet split_laps(const sim::Trajectory& traj, const Segment& start_line) {
  const auto crossings = find_crossings(traj.positions(), start_line);
  if (crossings.size() < 2) throw IncompleteSession("incomplete session");
  LapSet set;
  std::size_t begin = 0;
  for (const std::size_t c : crossings) {
    sim::Trajectory lap;
    lap.samples.assign(traj.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                       traj.samples.begin() + static_cast<std::ptrdiff_t>(c) + 1);
    set.laps.push_back(std::move(lap));
    begin = c;
  }
  return set;
}

double discrete_frechet(const Polyline& p_in, const Polyline& q_in) {
  if (p_in.empty() || q_in.empty()) throw InvalidArgument("discrete_frechet: empty polyline");
  // The recurrence is symmetric, so keep the row over the shorter curve.
  const bool swap = q_in.size() > p_in.size();
  const Polyline& p = swap ? q_in : p_in;
  const Polyline& q = swap ? p_in : q_in;
  const std::size_t m = q.size();
  std::vector<double> row(m);
  row[0] = distance(p[0], q[0]);
  for (std::size_t j = 1; j < m; ++j) row[j] = std::max(row[j - 1], distance(p[0], q[j]));
  for (std::size_t i = 1; i < p.size(); ++i) {
    double diag = row[0];
    row[0] = std::max(row[0], distance(p[i], q[0]));
    for (std::size_t j = 1; j < m; ++j) {
      const double up = row[j];
      row[j] = std::max(distance(p[i], q[j]), std::min({up, row[j - 1], diag}));
      diag = up;
    }
  }
  return row[m - 1];
}

Polyline resample_uniform(const Polyline& p, std::size_t n) {
  if (p.size() < 2) throw InvalidArgument("resample: need at least 2 points");
  if (n < 2) throw InvalidArgument("resample: need at least 2 output points");
  std::vector<double> cum(p.size(), 0.0);
  for (std::size_t i = 1; i < p.size(); ++i) cum[i] = cum[i - 1] + distance(p[i - 1], p[i]);
  const double total = cum.back();
  if (!(total > 0.0) || !std::isfinite(total)) throw InvalidArgument("resample: degenerate curve");

  Polyline out;
  out.reserve(n);
  std::size_t seg = 1;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == n - 1) {
      out.push_back(p.back());
      break;
    }
    const double s = total * double(k) / double(n - 1);
    while (seg + 1 < p.size() && cum[seg] < s) ++seg;
    const double len = cum[seg] - cum[seg - 1];
    const double t = len > 0.0 ? (s - cum[seg - 1]) / len : 0.0;
    out.push_back(p[seg - 1] + (p[seg] - p[seg - 1]) * t);
  }
  return out;
}

namespace {

// Neumaier compensated sum.
class Summer {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace

double area_between(const Polyline& p, const Polyline& q, std::size_t n) {
  const Polyline a = resample_uniform(p, n);
  const Polyline b = resample_uniform(q, n);
  Summer total;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    // Quad (a_i, a_i+1, b_i+1, b_i): half the cross product of its diagonals.
    const Vec2 d1 = b[i + 1] - a[i];
    const Vec2 d2 = b[i] - a[i + 1];
    total.add(0.5 * std::abs(cross(d1, d2)));
  }
  return total.value();
}

MeanStd mean_std(const std::vector<double>& values) {
  if (values.empty()) throw InvalidArgument("mean_std: no values");
  Summer s;
  for (const double v : values) s.add(v);
  const double mean = s.value() / double(values.size());
  Summer var;
  for (const double v : values) var.add((v - mean) * (v - mean));
  return {mean, std::sqrt(var.value() / double(values.size()))};
}

MeanStd speed_stats(const LapSet& laps) {
  const sim::Trajectory& lap = laps.scoring_lap();
  if (lap.samples.empty()) throw InvalidArgument("speed_stats: empty lap");
  std::vector<double> kmh;
  kmh.reserve(lap.samples.size());
  for (const auto& s : lap.samples) kmh.push_back(s.speed * 3.6);
  return mean_std(kmh);
}

SessionMetrics evaluate_session(const Session& session, const Polyline& racing_line,
                                const Segment& start_line, std::size_t area_samples) {
  try {
    const LapSet laps = split_laps(session.trajectory, start_line);
    const Polyline lap = laps.scoring_lap().positions();
    SessionMetrics m;
    m.condition = session.condition;
    m.session_id = session.id;
    m.frechet_m = discrete_frechet(lap, racing_line);
    m.area_m2 = area_between(lap, racing_line, area_samples);
    const MeanStd v = speed_stats(laps);
    m.speed_mean_kmh = v.mean;
    m.speed_std_kmh = v.std;
    return m;
  } catch (const IncompleteSession& e) {
    throw IncompleteSession("session " + session.condition + "_" + session.id + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument("session " + session.condition + "_" + session.id + ": " + e.what());
  }
}

EvalReport make_report(const std::vector<Session>& sessions, const Polyline& racing_line,
                       const Segment& start_line, std::size_t area_samples) {
  if (sessions.empty()) throw InvalidArgument("make_report: no sessions");
  EvalReport report;
  std::map<std::string, std::vector<const SessionMetrics*>> by_condition;
  report.sessions.reserve(sessions.size());
  for (const Session& s : sessions) {
    report.sessions.push_back(evaluate_session(s, racing_line, start_line, area_samples));
  }
  for (const SessionMetrics& m : report.sessions) by_condition[m.condition].push_back(&m);
  for (const auto& [cond, list] : by_condition) {
    std::vector<double> f, a, v;
    for (const SessionMetrics* m : list) {
      f.push_back(m->frechet_m);
      a.push_back(m->area_m2);
      v.push_back(m->speed_mean_kmh);
    }
    ConditionSummary c;
    c.n_participants = list.size();
    c.frechet_m = mean_std(f);
    c.area_m2 = mean_std(a);
    c.speed_kmh = mean_std(v);
    report.conditions.emplace(cond, c);
  }
  return report;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string EvalReport::csv() const {
  std::string out = "condition,metric,mean,std\n";
  for (const auto& [cond, c] : conditions) {
    const std::pair<const char*, const MeanStd*> rows[] = {
        {"frechet_m", &c.frechet_m}, {"area_m2", &c.area_m2}, {"speed_kmh", &c.speed_kmh}};
    for (const auto& [name, ms] : rows) {
      out += cond + "," + name + "," + fixed(ms->mean, 6) + "," + fixed(ms->std, 6) + "\n";
    }
  }
  return out;
}

std::string EvalReport::table() const {
  struct Row {
    std::string cond, n, metric, value;
  };
  std::vector<Row> rows{{"condition", "n", "metric", "value"}};
  for (const auto& [cond, c] : conditions) {
    const std::string n = std::to_string(c.n_participants);
    rows.push_back({cond, n, "frechet",
                    "mean=" + fixed(c.frechet_m.mean, 2) + " m, std=" + fixed(c.frechet_m.std, 2)});
    rows.push_back({cond, n, "area",
                    "mean=" + fixed(c.area_m2.mean, 1) + " m^2, std=" + fixed(c.area_m2.std, 1)});
    rows.push_back({cond, n, "speed",
                    "mean=" + fixed(c.speed_kmh.mean, 2) + " km/h, std=" + fixed(c.speed_kmh.std, 2)});
  }
  std::size_t w0 = 0, w1 = 0, w2 = 0;
  for (const Row& r : rows) {
    w0 = std::max(w0, r.cond.size());
    w1 = std::max(w1, r.n.size());
    w2 = std::max(w2, r.metric.size());
  }
  std::ostringstream out;
  for (const Row& r : rows) {
    out << r.cond << std::string(w0 - r.cond.size() + 2, ' ') << r.n
        << std::string(w1 - r.n.size() + 2, ' ') << r.metric
        << std::string(w2 - r.metric.size() + 2, ' ') << r.value << "\n";
  }
  return out.str();
}

std::vector<Session> load_sessions(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Session> out;
  for (const fs::path& f : files) {
    const std::string stem = f.stem().string();
    const auto us = stem.find('_');
    if (us == std::string::npos || us == 0 || us + 1 == stem.size()) {
      throw ParseError("session file name must be <condition>_<id>.csv: " + f.filename().string(), 0);
    }
    out.push_back({stem.substr(0, us), stem.substr(us + 1), sim::load_trajectory_csv(f)});
  }
  if (out.empty()) throw IoError("no session CSVs in " + dir.string());
  return out;
}

}  // namespace drive::eval
