// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "uavdc/scenario.hpp"

using namespace uavdc;

TEST_CASE("scenario JSON round trip") {
  Scenario sc = Scenario::desk_default();
  sc.n_devices = 9;
  sc.n_rbs = 3;
  sc.channel.interference_w = 1e-15;
  sc.episode.horizon = 42;
  const std::string path = (std::filesystem::temp_directory_path() / "uavdc_scenario.json").string();
  save_scenario(path, sc);
  std::string hash1, hash2;
  const Scenario back = load_scenario(path, &hash1);
  const Scenario again = load_scenario(path, &hash2);
  std::remove(path.c_str());

  CHECK(hash1 == hash2);
  CHECK(hash1.size() == 16);
  CHECK(back.n_devices == 9);
  CHECK(back.n_rbs == 3);
  CHECK(back.episode.horizon == 42);
  CHECK(back.region.x_max_m == sc.region.x_max_m);
  CHECK(back.channel.ref_gain == doctest::Approx(sc.channel.ref_gain).epsilon(1e-12));
  CHECK(back.channel.noise_psd_w_hz == doctest::Approx(sc.channel.noise_psd_w_hz).epsilon(1e-12));
  CHECK(back.channel.interference_w == 1e-15);
  CHECK(back.power.rotor_area_m2 == sc.power.rotor_area_m2);
  CHECK(back.sim.max_elevation_rad == sc.sim.max_elevation_rad);
  CHECK(back.placement_seed == sc.placement_seed);
}

TEST_CASE("unknown scenario keys are rejected") {
  nlohmann::json j = scenario_to_json(Scenario::desk_default());
  j["radio"]["bandwidht"] = 1e6;  // misspelled key must not silently default
  CHECK_THROWS_AS(scenario_from_json(j), ValidationError);

  nlohmann::json top = scenario_to_json(Scenario::desk_default());
  top["extra_section"] = 1;
  CHECK_THROWS_AS(scenario_from_json(top), ValidationError);
}

TEST_CASE("scenario validation catches bad values") {
  nlohmann::json j = scenario_to_json(Scenario::desk_default());
  j["region"]["x_max_m"] = -5.0;
  CHECK_THROWS_AS(scenario_from_json(j), ValidationError);

  j = scenario_to_json(Scenario::desk_default());
  j["radio"]["kappa"] = 1.5;
  CHECK_THROWS_AS(scenario_from_json(j), ValidationError);

  j = scenario_to_json(Scenario::desk_default());
  j["devices"]["count"] = 0;
  CHECK_THROWS_AS(scenario_from_json(j), ValidationError);
}

TEST_CASE("presets") {
  const Scenario desk = Scenario::desk_default();
  CHECK(desk.n_devices == 15);
  CHECK(desk.n_rbs == 4);
  CHECK(desk.episode.horizon == 60);

  const Scenario paper = Scenario::paper_default();
  CHECK(paper.n_devices == 100);
  CHECK(paper.n_rbs == 10);
  CHECK(paper.episode.horizon == 500);
  CHECK(paper.sim.max_speed_mps == 25.0);
  CHECK(paper.sim.slot_len_s == 5.0);
  CHECK(paper.region.altitude_m == 100.0);
  CHECK(paper.channel.ref_gain == doctest::Approx(1e-5).epsilon(1e-12));
  CHECK(paper.power.blade_power_w == 79.86);
  CHECK(paper.data_max_bits == megabytes_to_bits(20.0));
}

TEST_CASE("serialized scenario bytes are stable") {
  const std::string a = scenario_serialize(Scenario::desk_default());
  const std::string b = scenario_serialize(Scenario::desk_default());
  CHECK(a == b);
  CHECK(scenario_content_hash(a) == scenario_content_hash(b));
}
