#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "hetmtt/catalog.hpp"
#include "hetmtt/config.hpp"
#include "hetmtt/errors.hpp"
#include "hetmtt/metrics.hpp"
#include "hetmtt/simulation.hpp"

namespace hetmtt {

/// One point of a sweep: a name and overrides applied on top of the base config.
struct BatchCell {
  std::string name;
  std::vector<std::string> overrides;
};

struct BatchSpec {
  nlohmann::json base;  // full config document
  std::vector<BatchCell> cells;
  std::vector<std::uint64_t> seeds;
  std::string out_dir;
  unsigned jobs = 0;  // 0: hardware concurrency
};

/// Cartesian product of override axes, first axis varying slowest.
/// Each axis is (dotted path, list of JSON-text values).
inline std::vector<BatchCell> grid_cells(const std::vector<std::pair<std::string, std::vector<std::string>>>& axes) {
  std::vector<BatchCell> cells{BatchCell{}};
  for (const auto& [path, values] : axes) {
    if (values.empty()) throw ConfigError("batch: axis '" + path + "' has no values");
    std::vector<BatchCell> next;
    for (const BatchCell& c : cells) {
      for (const std::string& v : values) {
        BatchCell d = c;
        d.name += (d.name.empty() ? "" : ",") + path + "=" + v;
        d.overrides.push_back(path + "=" + v);
        next.push_back(std::move(d));
      }
    }
    cells = std::move(next);
  }
  return cells;
}

/// {"base": path | object, "grid": {"planner.method": ["V", "CC"], ...},
///  "cells": [{"name": ..., "set": {"path": value}}], "seeds": [..] | count, "jobs": n}
inline BatchSpec batch_from_json(const nlohmann::json& j, const std::filesystem::path& relative_to = {}) {
  BatchSpec b;
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      static const std::vector<std::string> known = {"base", "grid", "cells", "seeds", "jobs", "out_dir"};
      if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
        throw ConfigError("batch: unknown key '" + it.key() + "'");
      }
    }
    const auto& base = j.at("base");
    if (base.is_string()) {
      std::filesystem::path p = base.get<std::string>();
      if (p.is_relative() && !relative_to.empty()) p = relative_to / p;
      b.base = load_json_file(p.string());
    } else {
      b.base = base;
    }
    if (j.contains("grid")) {
      std::vector<std::pair<std::string, std::vector<std::string>>> axes;
      for (auto it = j["grid"].begin(); it != j["grid"].end(); ++it) {
        std::vector<std::string> values;
        for (const auto& v : it.value()) values.push_back(v.is_string() ? v.get<std::string>() : v.dump());
        axes.emplace_back(it.key(), std::move(values));
      }
      b.cells = grid_cells(axes);
    }
    if (j.contains("cells")) {
      for (const auto& c : j["cells"]) {
        BatchCell cell;
        cell.name = c.at("name").get<std::string>();
        if (c.contains("set")) {
          for (auto it = c["set"].begin(); it != c["set"].end(); ++it) {
            cell.overrides.push_back(it.key() + "=" + (it.value().is_string() ? it.value().get<std::string>()
                                                                              : it.value().dump()));
          }
        }
        b.cells.push_back(std::move(cell));
      }
    }
    if (b.cells.empty()) b.cells.push_back({"base", {}});
    const auto& seeds = j.at("seeds");
    if (seeds.is_number_unsigned() || seeds.is_number_integer()) {
      const auto n = seeds.get<std::uint64_t>();
      for (std::uint64_t s = 1; s <= n; ++s) b.seeds.push_back(s);
    } else {
      b.seeds = seeds.get<std::vector<std::uint64_t>>();
    }
    b.jobs = j.value("jobs", 0u);
    b.out_dir = j.value("out_dir", std::string{});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("batch: ") + e.what());
  }
  if (b.seeds.empty()) throw ConfigError("batch: no seeds");
  return b;
}

/// Fully resolved config for one run of the batch.
inline ScenarioConfig resolve(const BatchSpec& b, const BatchCell& cell, std::uint64_t seed) {
  nlohmann::json doc = b.base;
  for (const auto& o : cell.overrides) apply_override(doc, o);
  doc["seed"] = seed;
  ScenarioConfig c = config_from_json(doc);
  c.name = cell.name;
  c.validate();
  return c;
}

struct BatchRun {
  std::size_t cell = 0;
  RunSummary summary;
};

/// Runs every (cell, seed) pair on a thread pool. Runs share nothing; a failed
/// run is recorded with status "error" and the batch continues. Per-run outputs
/// are written under out_dir/<cell index>/seed-<seed> when out_dir is set.
inline std::vector<BatchRun> run_batch(const BatchSpec& b) {
  std::vector<ScenarioConfig> configs;
  std::vector<BatchRun> runs;
  for (std::size_t c = 0; c < b.cells.size(); ++c) {
    for (std::uint64_t s : b.seeds) {
      configs.push_back(resolve(b, b.cells[c], s));
      runs.push_back({c, {}});
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < configs.size(); k = next++) {
      const ScenarioConfig& cfg = configs[k];
      try {
        RunResult r = run_scenario(cfg);
        if (!b.out_dir.empty()) {
          write_run(r, cfg, std::filesystem::path(b.out_dir) / ("cell-" + std::to_string(runs[k].cell)) /
                                ("seed-" + std::to_string(cfg.seed)));
        }
        runs[k].summary = std::move(r.summary);
      } catch (const std::exception& e) {
        RunSummary s;
        s.name = cfg.name;
        s.method = short_name(cfg.method);
        s.seed = cfg.seed;
        s.status = "error";
        s.error = e.what();
        runs[k].summary = std::move(s);
      }
    }
  };
  unsigned jobs = b.jobs ? b.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(1, configs.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return runs;
}

struct AggregateRow {
  std::string cell;
  std::string method;
  std::size_t robots = 0;
  std::size_t runs = 0;
  std::size_t failed = 0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation
  double area_sd = 0.0;
  double area_sd_vc = 0.0;
  double area_sd_pc = 0.0;
  double total_capacity = 0.0;
  double heterogeneity_eq_g = 0.0;
  double heterogeneity_sqrt = 0.0;
};

inline double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

/// Per-cell statistics of the steady-state mean OSPA. Rows follow first
/// appearance of each cell name; failed runs are counted and left out.
inline std::vector<AggregateRow> aggregate(const std::vector<RunSummary>& summaries) {
  std::vector<AggregateRow> rows;
  std::vector<std::vector<const RunSummary*>> groups;
  for (const RunSummary& s : summaries) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const AggregateRow& r) { return r.cell == s.name; });
    if (it == rows.end()) {
      rows.push_back({});
      rows.back().cell = s.name;
      groups.emplace_back();
      it = rows.end() - 1;
    }
    groups[static_cast<std::size_t>(it - rows.begin())].push_back(&s);
  }
  for (std::size_t g = 0; g < rows.size(); ++g) {
    AggregateRow& r = rows[g];
    std::vector<double> ospa, sd, sd_vc, sd_pc;
    for (const RunSummary* s : groups[g]) {
      ++r.runs;
      if (s->status != "ok") {
        ++r.failed;
        continue;
      }
      r.method = s->method;
      r.robots = s->robots;
      r.total_capacity = s->total_capacity;
      r.heterogeneity_eq_g = s->heterogeneity_eq_g;
      r.heterogeneity_sqrt = s->heterogeneity_sqrt;
      ospa.push_back(s->steady_mean_ospa);
      sd.push_back(s->steady_area_sd);
      sd_vc.push_back(s->steady_area_sd_vc);
      sd_pc.push_back(s->steady_area_sd_pc);
    }
    r.median = median_of(ospa);
    r.q25 = quantile_of(ospa, 0.25);
    r.q75 = quantile_of(ospa, 0.75);
    r.mean = mean_of(ospa);
    r.std = sample_sd(ospa);
    r.area_sd = mean_of(sd);
    r.area_sd_vc = mean_of(sd_vc);
    r.area_sd_pc = mean_of(sd_pc);
  }
  return rows;
}

inline std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
  std::ostringstream os;
  os << "cell,method,robots,runs,failed,ospa_median,ospa_q25,ospa_q75,ospa_mean,ospa_std,"
        "area_sd,area_sd_vc,area_sd_pc,total_capacity,heterogeneity_eq_g,heterogeneity_sqrt\n";
  for (const AggregateRow& r : rows) {
    os << '"' << r.cell << "\"," << r.method << ',' << r.robots << ',' << r.runs << ',' << r.failed << ','
       << num(r.median) << ',' << num(r.q25) << ',' << num(r.q75) << ',' << num(r.mean) << ',' << num(r.std) << ','
       << num(r.area_sd) << ',' << num(r.area_sd_vc) << ',' << num(r.area_sd_pc) << ',' << num(r.total_capacity)
       << ',' << num(r.heterogeneity_eq_g) << ',' << num(r.heterogeneity_sqrt) << '\n';
  }
  return os.str();
}

}  // namespace hetmtt
