#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "drive/error.hpp"
#include "drive/geometry.hpp"
#include "drive/simworld.hpp"

namespace drive::eval {

// Raised when a trajectory has no complete scoring lap.
class IncompleteSession : public Error {
 public:
  using Error::Error;
};

/// Laps cut from a trajectory at directed start-line crossings. Lap k runs
/// from the first sample past crossing k-1 (the first sample of the session
/// for k = 0) to the first sample past crossing k; consecutive laps share that
/// boundary sample. Samples after the final crossing are not part of any lap.
struct LapSet {
  std::vector<sim::Trajectory> laps;
  bool warmup_excluded = true;  // laps[0] is the warmup lap

  const sim::Trajectory& scoring_lap() const;
};

// Indices i+1 of samples where the path goes from strictly behind the line to
// on-or-ahead of it while passing between the line's endpoints.
std::vector<std::size_t> find_crossings(const Polyline& path, const Segment& start_line);

// Throws IncompleteSession("incomplete session") on fewer than 2 crossings.
LapSet split_laps(const sim::Trajectory& traj, const Segment& start_line);

/// Discrete Frechet distance via the coupling-table recurrence, keeping one
/// row of min(|P|,|Q|) entries.
double discrete_frechet(const Polyline& p, const Polyline& q);

// n points uniformly spaced by arc length, endpoints included.
Polyline resample_uniform(const Polyline& p, std::size_t n);

/// Sum of |area| of the quadrilaterals (P_i, P_i+1, Q_i+1, Q_i) after
/// resampling both curves to n points.
double area_between(const Polyline& p, const Polyline& q, std::size_t n = 200);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};

MeanStd mean_std(const std::vector<double>& values);

// Speed over the scoring lap, in km/h.
MeanStd speed_stats(const LapSet& laps);

struct SessionMetrics {
  std::string condition;
  std::string session_id;
  double frechet_m = 0.0;
  double area_m2 = 0.0;
  double speed_mean_kmh = 0.0;
  double speed_std_kmh = 0.0;
};

struct ConditionSummary {
  std::size_t n_participants = 0;
  MeanStd frechet_m;
  MeanStd area_m2;
  MeanStd speed_kmh;  // mean/std across participants of the per-lap mean speed
};

struct EvalReport {
  std::vector<SessionMetrics> sessions;
  std::map<std::string, ConditionSummary> conditions;

  // `condition,metric,mean,std`, six decimals.
  std::string csv() const;
  // Aligned human-readable table.
  std::string table() const;
};

struct Session {
  std::string condition;
  std::string id;
  sim::Trajectory trajectory;
};

SessionMetrics evaluate_session(const Session& session, const Polyline& racing_line,
                                const Segment& start_line, std::size_t area_samples = 200);

EvalReport make_report(const std::vector<Session>& sessions, const Polyline& racing_line,
                       const Segment& start_line, std::size_t area_samples = 200);

// Loads every `<condition>_<id>.csv` in `dir`, sorted by file name.
std::vector<Session> load_sessions(const std::filesystem::path& dir);

}  // namespace drive::eval
