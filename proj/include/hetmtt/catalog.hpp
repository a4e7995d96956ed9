#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hetmtt/errors.hpp"
#include "hetmtt/sensors.hpp"

namespace hetmtt {

enum class CapacityConvention { eq9, unit_pd };

/// Published capacity for a catalog entry, kept for table reproduction.
struct CapacityReference {
  std::string table;
  double c_max = 0.0;
  double mu_over_area = 1.0;
  CapacityConvention convention = CapacityConvention::eq9;
};

struct CatalogEntry {
  SensorSpec spec;
  std::optional<CapacityReference> reference;
};

/// C_max under a given convention. unit_pd treats p_d as 1 across the footprint.
inline double max_capacity(const SensorSpec& spec, double mu_over_area, CapacityConvention convention) {
  if (convention == CapacityConvention::eq9) return max_capacity(spec, mu_over_area, 1.0);
  SensorSpec unit = spec;
  unit.law = DetectionLaw::constant(1.0);
  return max_capacity(unit, mu_over_area, 1.0);
}

class SensorCatalog {
 public:
  SensorCatalog() = default;

  static SensorCatalog from_json(const nlohmann::json& doc) {
    SensorCatalog cat;
    if (!doc.contains("sensors") || !doc["sensors"].is_array()) {
      throw ConfigError("sensor catalog: missing 'sensors' array");
    }
    for (const auto& s : doc["sensors"]) {
      CatalogEntry e;
      try {
        e.spec.name = s.at("name").get<std::string>();
        e.spec.viewing_angle = s.at("viewing_angle_deg").get<double>() * kPi / 180.0;
        e.spec.radius = s.at("radius").get<double>();
        const auto& det = s.at("detection");
        const std::string law = det.at("law").get<std::string>();
        if (law == "constant") {
          e.spec.law = DetectionLaw::constant(det.at("intercept").get<double>());
        } else if (law == "affine") {
          e.spec.law = DetectionLaw::affine(det.at("intercept").get<double>(), det.at("slope").get<double>());
        } else {
          throw ConfigError("sensor '" + e.spec.name + "': unknown detection law '" + law + "'");
        }
        e.spec.range_noise_sd = s.value("range_noise_sd", e.spec.range_noise_sd);
        e.spec.bearing_noise_sd = s.value("bearing_noise_deg", 0.1) * kPi / 180.0;
        e.spec.clutter_rate = s.value("clutter_rate", e.spec.clutter_rate);
        if (s.contains("reference")) {
          const auto& r = s["reference"];
          CapacityReference ref;
          ref.table = r.value("table", std::string{});
          ref.c_max = r.at("c_max").get<double>();
          ref.mu_over_area = r.at("mu_over_area").get<double>();
          const std::string conv = r.value("capacity_convention", std::string("eq9"));
          if (conv == "eq9") {
            ref.convention = CapacityConvention::eq9;
          } else if (conv == "unit_pd") {
            ref.convention = CapacityConvention::unit_pd;
          } else {
            throw ConfigError("sensor '" + e.spec.name + "': unknown capacity convention '" + conv + "'");
          }
          e.reference = ref;
        }
      } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("sensor catalog: ") + ex.what());
      }
      e.spec.validate();
      if (cat.by_name_.count(e.spec.name)) throw ConfigError("sensor catalog: duplicate name '" + e.spec.name + "'");
      cat.by_name_[e.spec.name] = cat.entries_.size();
      cat.entries_.push_back(std::move(e));
    }
    return cat;
  }

  static SensorCatalog load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open sensor catalog '" + path + "'");
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& ex) {
      throw ConfigError("sensor catalog '" + path + "': " + ex.what());
    }
    return from_json(doc);
  }

  const std::vector<CatalogEntry>& entries() const { return entries_; }

  const CatalogEntry& entry(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) throw ConfigError("unknown sensor type '" + name + "'");
    return entries_[it->second];
  }
  const SensorSpec& spec(const std::string& name) const { return entry(name).spec; }
  bool contains(const std::string& name) const { return by_name_.count(name) != 0; }

  /// Capacity at the entry's reference mu/|B| using its published convention.
  double reference_capacity(const std::string& name) const {
    const auto& e = entry(name);
    if (!e.reference) throw ConfigError("sensor '" + name + "' has no reference capacity");
    return max_capacity(e.spec, e.reference->mu_over_area, e.reference->convention);
  }

 private:
  std::vector<CatalogEntry> entries_;
  std::map<std::string, std::size_t> by_name_;
};

}  // namespace hetmtt
