#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "puppetai/gestures.hpp"

using namespace puppetai;
using nlohmann::json;

namespace {

json minimal_library() {
  return json::parse(R"({"gestures": [
    {"name": "Nod", "kind": "discrete", "duration_s": 1.0, "keyframes": [
      {"t_s": 0.0, "targets": {"body": {"sagittal": 0}}},
      {"t_s": 0.5, "interp": "linear", "targets": {"body": {"sagittal": 20}}},
      {"t_s": 1.0, "targets": {"body": {"sagittal": 0}}}]},
    {"name": "Rock", "kind": "continuous", "duration_s": 1.0, "aliases": ["Sway"], "keyframes": [
      {"t_s": 0.0, "targets": {"body": {"lateral": -10}}},
      {"t_s": 0.5, "targets": {"body": {"lateral": 10}}},
      {"t_s": 1.0, "targets": {"body": {"lateral": -10}}}]}]})");
}

Errc load_error(const json& doc) {
  try {
    load_library(doc);
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::InvalidArgument;
}

bool within_limits(const PuppetModel& m, const BendState& s) {
  for (const auto& [ref, deg] : s) {
    const auto& r = locate_plane(m, ref).plane->active_range;
    if (deg < r.min_deg - tolerance::kAngleDeg || deg > r.max_deg + tolerance::kAngleDeg) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("builtin library content") {
  const PuppetModel m = demo_model();
  const GestureLibrary lib = builtin_library(m);
  CHECK(lib.names() == std::vector<std::string>{"Confusion", "Dancing", "Hug", "Joy", "Sadness", "Waving"});
  CHECK(lib.resolve("happy") == lib.resolve("Joy"));
  CHECK(lib.resolve("WAVING")->name == "Waving");
  CHECK(lib.resolve("Moonwalk") == nullptr);
  CHECK(lib.resolve("Dancing")->kind == GestureKind::Continuous);
  for (const char* d : {"Waving", "Joy", "Sadness", "Hug", "Confusion"})
    CHECK(lib.resolve(d)->kind == GestureKind::Discrete);
  CHECK(check_library_against(lib, m).empty());
}

TEST_CASE("library json round trip") {
  const GestureLibrary lib = builtin_library(demo_model());
  const GestureLibrary again = load_library(library_to_json(lib));
  CHECK(again.gestures == lib.gestures);
  CHECK(again.neutral == lib.neutral);
  CHECK(again.idle == lib.idle);
  CHECK(again.alias_index == lib.alias_index);
}

TEST_CASE("library validation errors") {
  json dup = minimal_library();
  dup["gestures"].push_back(dup["gestures"][0]);
  CHECK(load_error(dup) == Errc::DuplicateName);

  json alias = minimal_library();
  alias["gestures"][1]["aliases"] = {"nod"};
  CHECK(load_error(alias) == Errc::AliasCollision);

  json order = minimal_library();
  order["gestures"][0]["keyframes"][1]["t_s"] = 0.0;
  CHECK(load_error(order) == Errc::NonMonotoneKeyframes);

  json beyond = minimal_library();
  beyond["gestures"][0]["keyframes"][2]["t_s"] = 1.5;
  CHECK(load_error(beyond) == Errc::KeyframeBeyondDuration);

  json open = minimal_library();
  open["gestures"][1]["keyframes"][2]["targets"]["body"]["lateral"] = 5;
  CHECK(load_error(open) == Errc::OpenLoop);

  json schema = minimal_library();
  schema["gestures"][0]["tempo"] = 3;
  CHECK(load_error(schema) == Errc::SchemaError);

  json plane = minimal_library();
  plane["gestures"][0]["keyframes"][1]["targets"]["tail"] = {{"wag", 3}};
  const GestureLibrary lib = load_library(plane);
  const auto d = check_library_against(lib, demo_model());
  REQUIRE_FALSE(d.empty());
  CHECK(d.front().code == Errc::UnknownPlaneInKeyframe);
}

TEST_CASE("builtin library needs the demo shape") {
  PuppetModel m = demo_model();
  m.sections.pop_back();
  try {
    builtin_library(m);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ModelShapeMismatch);
  }
}

TEST_CASE("keyframe interpolation") {
  const GestureLibrary lib = load_library(minimal_library());
  const GestureDef& nod = *lib.resolve("Nod");
  const PlaneRef sag{"body", "sagittal"};
  // Linear segment into the 0.5 s keyframe, smooth segment out of it.
  CHECK(evaluate_gesture(nod, {}, 0.25).at(sag) == doctest::Approx(10.0));
  CHECK(evaluate_gesture(nod, {}, 0.75).at(sag) == doctest::Approx(20.0 * (1.0 - oracle::smoothstep(0.5))));
  CHECK(evaluate_gesture(nod, {}, 0.6).at(sag) == doctest::Approx(20.0 * (1.0 - oracle::smoothstep(0.2))));
  CHECK(evaluate_gesture(nod, {}, -1.0).at(sag) == 0.0);
  CHECK(evaluate_gesture(nod, {}, 9.0).at(sag) == 0.0);
  // Planes a gesture does not name keep their neutral value.
  const BendState neutral{{{"left_arm", "vertical"}, 50.0}};
  CHECK(evaluate_gesture(nod, neutral, 0.3).at({"left_arm", "vertical"}) == 50.0);
}

TEST_CASE("compiled trajectories sample endpoints") {
  const PuppetModel m = demo_model();
  const GestureLibrary lib = builtin_library(m);
  for (const auto& name : lib.names()) {
    const GestureDef& def = *lib.resolve(name);
    const Trajectory t = compile_gesture(def, m, lib.neutral, 50.0);
    CHECK(t.samples.size() == static_cast<std::size_t>(std::ceil(def.nominal_duration_s * 50.0)));
    CHECK(t.sample_time(0) == 0.0);
    CHECK(t.sample_time(t.samples.size() - 1) == def.nominal_duration_s);
    CHECK(t.samples.front() == clamp_state(m, evaluate_gesture(def, lib.neutral, 0.0)));
    CHECK(t.samples.back() == clamp_state(m, evaluate_gesture(def, lib.neutral, def.nominal_duration_s)));
    const std::size_t last = t.samples.size() - 1;
    for (std::size_t k = 0; k < last; ++k) CHECK(&sample_trajectory(t, t.sample_time(k)) == &t.samples[k]);
    // Continuous trajectories wrap: the endpoint time maps back to the start.
    const std::size_t end_index = def.loopable() ? 0 : last;
    CHECK(&sample_trajectory(t, t.sample_time(last)) == &t.samples[end_index]);
  }
}

TEST_CASE("continuous lookup wraps, discrete lookup holds") {
  const PuppetModel m = demo_model();
  const GestureLibrary lib = builtin_library(m);
  const Trajectory dance = compile_gesture(*lib.resolve("Dancing"), m, lib.neutral, 50.0);
  CHECK(dance.samples.front() == dance.samples.back());
  for (double t = 0.0; t < 2.0; t += 0.037) CHECK(sample_trajectory(dance, t + 2.0) == sample_trajectory(dance, t));
  const Trajectory wave = compile_gesture(*lib.resolve("Waving"), m, lib.neutral, 50.0);
  CHECK(&sample_trajectory(wave, 10.0) == &wave.samples.back());
}

TEST_CASE("every builtin gesture stays within plane limits") {
  const PuppetModel m = demo_model();
  const GestureLibrary lib = builtin_library(m);
  for (const auto& name : lib.names()) {
    const GestureDef& def = *lib.resolve(name);
    // The raw interpolant, not only the clamped samples.
    for (double t = 0.0; t <= def.nominal_duration_s; t += 0.001) CHECK(within_limits(m, evaluate_gesture(def, lib.neutral, t)));
  }
}

TEST_CASE("idle sway is seeded, bounded and continuous") {
  const PuppetModel m = demo_model();
  const GestureLibrary lib = builtin_library(m);
  const PlaneRef lat{"body", "lateral"};
  IdleSway a(42, lib.idle), b(42, lib.idle), c(43, lib.idle);
  bool differs = false;
  double prev = 0.0;
  for (int k = 0; k < 5000; ++k) {
    const double t = k * 0.02;
    const double va = a.angle_deg(t);
    CHECK(va == b.angle_deg(t));
    differs = differs || va != c.angle_deg(t);
    CHECK(std::abs(va) <= 5.0);
    CHECK(std::abs(va - prev) < 2.0 * M_PI * 5.0 / 4.0 * 0.02 + 1e-12);
    prev = va;
    CHECK(within_limits(m, a.pose(m, lib.neutral, t)));
  }
  CHECK(differs);
  CHECK(idle_pose(7, lib, m, 0.0).at(lat) == 0.0);
  CHECK(idle_pose(7, lib, m, 3.3) == idle_pose(7, lib, m, 3.3));
}

TEST_CASE("idle sway draws from the configured ranges") {
  // mt19937_64 stream: amplitude then period per cycle, 53-bit uniforms.
  std::mt19937_64 rng(99);
  auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const double amp = 2.0 + 3.0 * u();
  const double period = 4.0 + 4.0 * u();
  IdleSwayConfig cfg;
  IdleSway sway(99, cfg);
  CHECK(sway.angle_deg(period / 4.0) == doctest::Approx(amp).epsilon(1e-12));
  CHECK(sway.angle_deg(period / 2.0) == doctest::Approx(0.0).epsilon(1e-9));
}
