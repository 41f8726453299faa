// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "uavdc/common.hpp"
#include "uavdc/energy.hpp"
#include "uavdc/radio.hpp"
#include "uavdc/world.hpp"

namespace uavdc {

struct EpisodeConfig {
  std::size_t horizon = 60;
  double gamma = 0.99;
  bool stop_when_drained = true;
};

// Full description of one simulated world: geometry, device population,
// channel/energy constants, and episode bookkeeping. Serialized as JSON;
// the file's content hash travels with every dataset for provenance.
struct Scenario {
  Region region;
  SimParams sim;
  ChannelParams channel;
  PowerParams power;
  EpisodeConfig episode;
  std::size_t n_devices = 15;
  std::size_t n_rbs = 4;
  double data_max_bits = megabytes_to_bits(20.0);
  std::uint64_t placement_seed = 2025;

  std::vector<Device> make_devices() const {
    return place_devices(n_devices, data_max_bits, region, placement_seed);
  }

  UavState start_position() const { return UavState{region.x_max_m / 2.0, region.y_max_m / 2.0}; }

  void validate() const {
    region.validate();
    channel.validate();
    power.validate();
    if (n_devices == 0) throw ValidationError("scenario needs at least one device");
    if (n_rbs == 0) throw ValidationError("scenario needs at least one resource block");
    if (episode.horizon == 0) throw ValidationError("horizon must be at least 1");
    if (episode.gamma < 0.0 || episode.gamma > 1.0) throw ValidationError("gamma must be in [0,1]");
    if (!(data_max_bits > 0.0)) throw ValidationError("device data volume must be positive");
    if (!(sim.max_speed_mps > 0.0) || !(sim.slot_len_s > 0.0)) {
      throw ValidationError("speed limit and slot length must be positive");
    }
  }

  // Desk-scale default: Table-style radio/energy constants with a small
  // device population and horizon that train in minutes on a CPU.
  static Scenario desk_default() { return Scenario{}; }

  // Full-scale configuration from the source system parameters.
  static Scenario paper_default() {
    Scenario s;
    s.n_devices = 100;
    s.n_rbs = 10;
    s.episode.horizon = 500;
    return s;
  }
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<const char*> known,
                                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool found = false;
    for (const char* k : known) {
      if (it.key() == k) {
        found = true;
        break;
      }
    }
    if (!found) throw ValidationError("unknown key '" + it.key() + "' in " + where);
  }
}

template <typename T>
void get_if_present(const nlohmann::json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace detail

inline nlohmann::json scenario_to_json(const Scenario& s) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["region"] = {{"x_max_m", s.region.x_max_m},
                 {"y_max_m", s.region.y_max_m},
                 {"altitude_m", s.region.altitude_m}};
  j["devices"] = {{"count", s.n_devices},
                  {"data_max_mb", bits_to_megabytes(s.data_max_bits)},
                  {"placement_seed", s.placement_seed}};
  j["uav"] = {{"v_max_mps", s.sim.max_speed_mps},
              {"slot_len_s", s.sim.slot_len_s},
              {"omega_max_rad", s.sim.max_elevation_rad}};
  j["radio"] = {{"a", s.channel.los_a},
                {"b", s.channel.los_b},
                {"g0_db", linear_to_db(s.channel.ref_gain)},
                {"kappa", s.channel.nlos_atten},
                {"iota", s.channel.pathloss_exp},
                {"p_tx", s.channel.tx_power_w},
                {"rb_bandwidth", s.channel.rb_bandwidth_hz},
                {"n0_dbm_hz", linear_to_db(s.channel.noise_psd_w_hz * 1000.0)},
                {"interference", s.channel.interference_w},
                {"n_rbs", s.n_rbs}};
  j["energy"] = {{"p1", s.power.blade_power_w},
                 {"p2", s.power.induced_power_w},
                 {"u_tip", s.power.tip_speed_mps},
                 {"v0", s.power.induced_velocity_mps},
                 {"d0", s.power.drag_ratio},
                 {"rho", s.power.air_density},
                 {"g", s.power.rotor_solidity},
                 {"A", s.power.rotor_area_m2}};
  j["episode"] = {{"horizon", s.episode.horizon},
                  {"gamma", s.episode.gamma},
                  {"stop_when_drained", s.episode.stop_when_drained}};
  return j;
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s;
  detail::reject_unknown_keys(
      j, {"format_version", "region", "devices", "uav", "radio", "energy", "episode"}, "scenario");
  if (j.contains("format_version") && j.at("format_version").get<int>() != 1) {
    throw ValidationError("unsupported scenario format_version");
  }
  if (j.contains("region")) {
    const auto& r = j.at("region");
    detail::reject_unknown_keys(r, {"x_max_m", "y_max_m", "altitude_m"}, "region");
    detail::get_if_present(r, "x_max_m", s.region.x_max_m);
    detail::get_if_present(r, "y_max_m", s.region.y_max_m);
    detail::get_if_present(r, "altitude_m", s.region.altitude_m);
  }
  if (j.contains("devices")) {
    const auto& d = j.at("devices");
    detail::reject_unknown_keys(d, {"count", "data_max_mb", "placement_seed"}, "devices");
    detail::get_if_present(d, "count", s.n_devices);
    if (d.contains("data_max_mb")) s.data_max_bits = megabytes_to_bits(d.at("data_max_mb").get<double>());
    detail::get_if_present(d, "placement_seed", s.placement_seed);
  }
  if (j.contains("uav")) {
    const auto& u = j.at("uav");
    detail::reject_unknown_keys(u, {"v_max_mps", "slot_len_s", "omega_max_rad"}, "uav");
    detail::get_if_present(u, "v_max_mps", s.sim.max_speed_mps);
    detail::get_if_present(u, "slot_len_s", s.sim.slot_len_s);
    detail::get_if_present(u, "omega_max_rad", s.sim.max_elevation_rad);
  }
  if (j.contains("radio")) {
    const auto& r = j.at("radio");
    detail::reject_unknown_keys(r,
                                {"a", "b", "g0_db", "kappa", "iota", "p_tx", "rb_bandwidth",
                                 "n0_dbm_hz", "interference", "n_rbs"},
                                "radio");
    detail::get_if_present(r, "a", s.channel.los_a);
    detail::get_if_present(r, "b", s.channel.los_b);
    if (r.contains("g0_db")) s.channel.ref_gain = db_to_linear(r.at("g0_db").get<double>());
    detail::get_if_present(r, "kappa", s.channel.nlos_atten);
    detail::get_if_present(r, "iota", s.channel.pathloss_exp);
    detail::get_if_present(r, "p_tx", s.channel.tx_power_w);
    detail::get_if_present(r, "rb_bandwidth", s.channel.rb_bandwidth_hz);
    if (r.contains("n0_dbm_hz")) {
      s.channel.noise_psd_w_hz = dbm_per_hz_to_w_per_hz(r.at("n0_dbm_hz").get<double>());
    }
    detail::get_if_present(r, "interference", s.channel.interference_w);
    detail::get_if_present(r, "n_rbs", s.n_rbs);
  }
  if (j.contains("energy")) {
    const auto& e = j.at("energy");
    detail::reject_unknown_keys(e, {"p1", "p2", "u_tip", "v0", "d0", "rho", "g", "A"}, "energy");
    detail::get_if_present(e, "p1", s.power.blade_power_w);
    detail::get_if_present(e, "p2", s.power.induced_power_w);
    detail::get_if_present(e, "u_tip", s.power.tip_speed_mps);
    detail::get_if_present(e, "v0", s.power.induced_velocity_mps);
    detail::get_if_present(e, "d0", s.power.drag_ratio);
    detail::get_if_present(e, "rho", s.power.air_density);
    detail::get_if_present(e, "g", s.power.rotor_solidity);
    detail::get_if_present(e, "A", s.power.rotor_area_m2);
  }
  if (j.contains("episode")) {
    const auto& e = j.at("episode");
    detail::reject_unknown_keys(e, {"horizon", "gamma", "stop_when_drained"}, "episode");
    detail::get_if_present(e, "horizon", s.episode.horizon);
    detail::get_if_present(e, "gamma", s.episode.gamma);
    detail::get_if_present(e, "stop_when_drained", s.episode.stop_when_drained);
  }
  s.validate();
  return s;
}

inline std::string scenario_serialize(const Scenario& s) { return scenario_to_json(s).dump(2) + "\n"; }

inline std::string scenario_content_hash(const std::string& file_bytes) {
  return hash_hex(fnv1a64(file_bytes));
}

inline void save_scenario(const std::string& path, const Scenario& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write scenario file: " + path);
  out << scenario_serialize(s);
}

// Loads a scenario and reports the content hash of the raw file bytes.
inline Scenario load_scenario(const std::string& path, std::string* hash_out = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open scenario file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  if (hash_out != nullptr) *hash_out = scenario_content_hash(bytes);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("scenario parse error: ") + e.what());
  }
  return scenario_from_json(j);
}

}  // namespace uavdc
