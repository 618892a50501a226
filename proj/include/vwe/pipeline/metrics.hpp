#pragma once

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <vector>

#include "vwe/core/transform.hpp"

namespace vwe {

// Time-interpolated view of a pose sample list (linear positions, slerp
// rotations). Queries must stay inside the sampled range.
class TrajectorySamples {
 public:
  explicit TrajectorySamples(std::vector<PoseSample> samples)
      : samples_(std::move(samples)) {
    if (samples_.size() < 2)
      throw DomainError("trajectory: need at least two samples");
    for (std::size_t i = 1; i < samples_.size(); ++i)
      if (samples_[i].t < samples_[i - 1].t)
        throw DataError("trajectory: samples out of order");
  }

  double t_begin() const { return samples_.front().t; }
  double t_end() const { return samples_.back().t; }
  const std::vector<PoseSample>& samples() const { return samples_; }

  RigidTransform at(double t) const {
    if (t < t_begin() - 1e-9 || t > t_end() + 1e-9)
      throw DomainError("trajectory: query outside sampled range");
    t = std::min(std::max(t, t_begin()), t_end());
    auto it = std::lower_bound(
        samples_.begin(), samples_.end(), t,
        [](const PoseSample& s, double v) { return s.t < v; });
    if (it == samples_.begin()) return it->pose;
    if (it == samples_.end()) return samples_.back().pose;
    const PoseSample& b = *it;
    const PoseSample& a = *(it - 1);
    const double span = b.t - a.t;
    if (span <= 0.0) return b.pose;
    const double u = (t - a.t) / span;
    RigidTransform out;
    out.translation =
        (1.0 - u) * a.pose.translation + u * b.pose.translation;
    Eigen::Quaterniond qa(a.pose.rotation);
    Eigen::Quaterniond qb(b.pose.rotation);
    out.rotation = qa.slerp(u, qb).toRotationMatrix();
    return out;
  }

 private:
  std::vector<PoseSample> samples_;
};

struct RpeMetrics {
  double rmse_rot_degps = 0.0;
  double median_rot_degps = 0.0;
  double rmse_trans_degps = 0.0;
  double median_trans_degps = 0.0;
  std::size_t rot_terms = 0;
  std::size_t trans_terms = 0;
};

struct RpePair {
  double t = 0.0;
  double rot_degps = 0.0;
  double trans_degps = -1.0;  // < 0: excluded (near-zero true translation)
};

namespace detail {

inline double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

}  // namespace detail

// Relative pose error over fixed-length intervals, errors-per-time in deg/s.
// Rotation: angle of the discrepancy between the estimated and true relative
// rotations. Translation: angle between the relative translation directions
// (scale-free); intervals whose true displacement is under 1 mm are excluded
// from the direction metric.
inline std::vector<RpePair> rpe_pairs(const TrajectorySamples& estimate,
                                      const TrajectorySamples& truth,
                                      double interval) {
  if (!(interval > 0.0)) throw DomainError("rpe: interval must be positive");
  const double lo = std::max(estimate.t_begin(), truth.t_begin());
  const double hi = std::min(estimate.t_end(), truth.t_end());
  if (!(hi - lo >= interval))
    throw DomainError("rpe: trajectories do not overlap over one interval");
  std::vector<RpePair> out;
  for (const PoseSample& s : estimate.samples()) {
    const double t0 = s.t;
    const double t1 = t0 + interval;
    if (t0 < lo - 1e-12 || t1 > hi + 1e-12) continue;
    const RigidTransform e_rel =
        compose(inverse(estimate.at(t0)), estimate.at(t1));
    const RigidTransform g_rel = compose(inverse(truth.at(t0)), truth.at(t1));
    RpePair pair;
    pair.t = t0;
    const double rot_err =
        rotation_angle(e_rel.rotation * g_rel.rotation.transpose());
    pair.rot_degps = rot_err / interval * 180.0 / M_PI;
    if (g_rel.translation.norm() >= 1e-3) {
      const Eigen::Vector3d ge = g_rel.translation.normalized();
      const Eigen::Vector3d ee_raw = e_rel.translation;
      if (ee_raw.norm() >= 1e-12) {
        double c = ge.dot(ee_raw.normalized());
        c = std::min(1.0, std::max(-1.0, c));
        pair.trans_degps = std::acos(c) / interval * 180.0 / M_PI;
      } else {
        pair.trans_degps = 90.0 / interval;  // no direction at all
      }
    }
    out.push_back(pair);
  }
  if (out.empty()) throw DomainError("rpe: no complete interval in overlap");
  return out;
}

inline RpeMetrics evaluate_rpe(const TrajectorySamples& estimate,
                               const TrajectorySamples& truth,
                               double interval) {
  const std::vector<RpePair> pairs = rpe_pairs(estimate, truth, interval);
  RpeMetrics m;
  std::vector<double> rot;
  std::vector<double> trans;
  for (const RpePair& p : pairs) {
    rot.push_back(p.rot_degps);
    if (p.trans_degps >= 0.0) trans.push_back(p.trans_degps);
  }
  double sq = 0.0;
  for (double r : rot) sq += r * r;
  m.rmse_rot_degps = rot.empty() ? 0.0 : std::sqrt(sq / rot.size());
  m.median_rot_degps = detail::median_of(rot);
  sq = 0.0;
  for (double r : trans) sq += r * r;
  m.rmse_trans_degps = trans.empty() ? 0.0 : std::sqrt(sq / trans.size());
  m.median_trans_degps = detail::median_of(trans);
  m.rot_terms = rot.size();
  m.trans_terms = trans.size();
  return m;
}

// Position RMSE of a trajectory against interpolated truth, for the
// improvement checks around back-end refinement.
inline double position_rmse(const std::vector<PoseSample>& estimate,
                            const TrajectorySamples& truth) {
  double sq = 0.0;
  std::size_t count = 0;
  for (const PoseSample& s : estimate) {
    if (s.t < truth.t_begin() || s.t > truth.t_end()) continue;
    sq += (s.pose.translation - truth.at(s.t).translation).squaredNorm();
    ++count;
  }
  if (count == 0) throw DomainError("position_rmse: no overlapping samples");
  return std::sqrt(sq / count);
}

}  // namespace vwe
