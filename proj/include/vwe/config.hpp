#pragma once

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "vwe/core/io.hpp"
#include "vwe/pipeline/backend.hpp"
#include "vwe/pipeline/frontend.hpp"

namespace vwe {

// Flat `key value` configuration with CLI overrides layered on top. The
// resolved dump is canonical (sorted keys), so its hash identifies a run.
class FlatConfig {
 public:
  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }

  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (detail::is_blank_or_comment(line)) continue;
      auto toks = detail::split_ws(line);
      if (toks.size() != 2)
        throw DataError(path + ":" + std::to_string(line_no) +
                        ": expected `key value`");
      values_[toks[0]] = toks[1];
    }
  }

  // Override in `key=value` form.
  void apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
      throw DataError("override must look like key=value: " + assignment);
    values_[assignment.substr(0, eq)] = assignment.substr(eq + 1);
  }

  double number(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return detail::parse_double(it->second, "config key " + key);
  }

  int integer(const std::string& key, int fallback) const {
    return static_cast<int>(number(key, fallback));
  }

  std::string dump() const {
    std::ostringstream out;
    for (const auto& [k, v] : values_) out << k << ' ' << v << '\n';
    return out.str();
  }

  std::uint64_t hash() const { return fnv1a64(dump()); }

 private:
  std::map<std::string, std::string> values_;
};

// Materialized module configs with every default pinned; reading them back
// into the FlatConfig makes --dump-config show the fully resolved run.
struct RunConfig {
  FrontEndConfig frontend;
  BackendConfig backend;
  GridSpec map_grid{64, 48, 32, 0.5, 10.0};
  double map_kernel_factor = 1.0;
  double map_kernel_truncation = 3.0;
  double map_k_sigma = 3.0;
  double rpe_interval = 1.0;
  std::uint64_t seed = 7;
  int threads = 0;  // 0 = hardware default

  static RunConfig from(const FlatConfig& c) {
    RunConfig r;
    r.frontend.window_span = c.number("frontend.window_span", 0.1);
    r.frontend.v = c.number("frontend.v", 0.5);
    r.frontend.min_events =
        static_cast<std::size_t>(c.number("frontend.min_events", 500));
    r.frontend.omega_lo = c.number("frontend.omega_lo", -1.0);
    r.frontend.omega_hi = c.number("frontend.omega_hi", 1.0);
    r.frontend.lateral_scale = c.number("frontend.lateral_scale", 1.0);
    r.frontend.depth_planes = c.integer("frontend.depth_planes", 8);
    r.frontend.z_min = c.number("frontend.z_min", 0.8);
    r.frontend.z_max = c.number("frontend.z_max", 8.0);
    r.frontend.kernel_factor = c.number("frontend.kernel_factor", 0.5);
    r.frontend.kernel_truncation = c.number("frontend.kernel_truncation", 3.0);
    r.frontend.max_events_per_eval = static_cast<std::size_t>(
        c.number("frontend.max_events_per_eval", 6000));
    r.frontend.solver.grid_samples = c.integer("frontend.grid_samples", 21);
    r.frontend.solver.step_tol = c.number("frontend.step_tol", 1e-5);
    r.frontend.solver.max_iterations =
        c.integer("frontend.max_iterations", 100);

    r.backend.degree = c.integer("backend.degree", 3);
    r.backend.num_ctrl = c.integer("backend.num_ctrl", 0);
    r.backend.ctrl_per_second = c.number("backend.ctrl_per_second", 2.0);
    r.backend.volumes.tau1 = c.number("backend.tau1", 0.2);
    r.backend.volumes.tau2 = c.number("backend.tau2", 0.4);
    r.backend.volumes.volumes = c.integer("backend.volumes", 0);
    r.backend.depth_planes = c.integer("backend.depth_planes", 12);
    r.backend.z_min = c.number("backend.z_min", 0.7);
    r.backend.z_max = c.number("backend.z_max", 8.0);
    r.backend.kernel_truncation = c.number("backend.kernel_truncation", 3.0);
    r.backend.min_events =
        static_cast<std::size_t>(c.number("backend.min_events", 500));
    r.backend.max_events_per_eval = static_cast<std::size_t>(
        c.number("backend.max_events_per_eval", 2000));
    r.backend.solver.rel_gain_tol = c.number("backend.rel_gain_tol", 1e-6);
    for (std::size_t s = 0; s < r.backend.stages.size(); ++s) {
      const std::string prefix = "backend.stage" + std::to_string(s) + ".";
      BackendStage& st = r.backend.stages[s];
      st.lateral_scale = c.number(prefix + "scale", st.lateral_scale);
      st.kernel_factor = c.number(prefix + "factor", st.kernel_factor);
      st.iterations = c.integer(prefix + "iterations", st.iterations);
      st.tau1 = c.number(prefix + "tau1", st.tau1);
      st.tau2 = c.number(prefix + "tau2", st.tau2);
      st.max_events = static_cast<std::size_t>(
          c.number(prefix + "max_events", static_cast<double>(st.max_events)));
    }

    r.map_grid.nx = c.integer("map.grid.nx", 64);
    r.map_grid.ny = c.integer("map.grid.ny", 48);
    r.map_grid.nz = c.integer("map.grid.nz", 32);
    r.map_grid.z_min = c.number("map.grid.z_min", 0.5);
    r.map_grid.z_max = c.number("map.grid.z_max", 10.0);
    r.map_kernel_factor = c.number("map.kernel_factor", 1.0);
    r.map_kernel_truncation = c.number("map.kernel_truncation", 3.0);
    r.map_k_sigma = c.number("map.k_sigma", 3.0);
    r.rpe_interval = c.number("evaluate.interval", 1.0);
    r.seed = static_cast<std::uint64_t>(c.number("seed", 7));
    r.threads = c.integer("threads", 0);
    return r;
  }

  void write_back(FlatConfig& c) const {
    auto put = [&c](const std::string& k, double v) {
      c.set(k, format_double(v));
    };
    put("frontend.window_span", frontend.window_span);
    put("frontend.v", frontend.v);
    put("frontend.min_events", static_cast<double>(frontend.min_events));
    put("frontend.omega_lo", frontend.omega_lo);
    put("frontend.omega_hi", frontend.omega_hi);
    put("frontend.lateral_scale", frontend.lateral_scale);
    put("frontend.depth_planes", frontend.depth_planes);
    put("frontend.z_min", frontend.z_min);
    put("frontend.z_max", frontend.z_max);
    put("frontend.kernel_factor", frontend.kernel_factor);
    put("frontend.kernel_truncation", frontend.kernel_truncation);
    put("frontend.max_events_per_eval",
        static_cast<double>(frontend.max_events_per_eval));
    put("frontend.grid_samples", frontend.solver.grid_samples);
    put("frontend.step_tol", frontend.solver.step_tol);
    put("frontend.max_iterations", frontend.solver.max_iterations);
    put("backend.degree", backend.degree);
    put("backend.num_ctrl", backend.num_ctrl);
    put("backend.ctrl_per_second", backend.ctrl_per_second);
    put("backend.tau1", backend.volumes.tau1);
    put("backend.tau2", backend.volumes.tau2);
    put("backend.volumes", backend.volumes.volumes);
    put("backend.depth_planes", backend.depth_planes);
    put("backend.z_min", backend.z_min);
    put("backend.z_max", backend.z_max);
    put("backend.kernel_truncation", backend.kernel_truncation);
    put("backend.min_events", static_cast<double>(backend.min_events));
    put("backend.max_events_per_eval",
        static_cast<double>(backend.max_events_per_eval));
    put("backend.rel_gain_tol", backend.solver.rel_gain_tol);
    for (std::size_t s = 0; s < backend.stages.size(); ++s) {
      const std::string prefix = "backend.stage" + std::to_string(s) + ".";
      c.set(prefix + "scale", format_double(backend.stages[s].lateral_scale));
      c.set(prefix + "factor",
            format_double(backend.stages[s].kernel_factor));
      c.set(prefix + "iterations",
            format_double(backend.stages[s].iterations));
      c.set(prefix + "tau1", format_double(backend.stages[s].tau1));
      c.set(prefix + "tau2", format_double(backend.stages[s].tau2));
      c.set(prefix + "max_events",
            format_double(static_cast<double>(backend.stages[s].max_events)));
    }
    put("map.grid.nx", map_grid.nx);
    put("map.grid.ny", map_grid.ny);
    put("map.grid.nz", map_grid.nz);
    put("map.grid.z_min", map_grid.z_min);
    put("map.grid.z_max", map_grid.z_max);
    put("map.kernel_factor", map_kernel_factor);
    put("map.kernel_truncation", map_kernel_truncation);
    put("map.k_sigma", map_k_sigma);
    put("evaluate.interval", rpe_interval);
    put("seed", static_cast<double>(seed));
    put("threads", threads);
  }
};

}  // namespace vwe
