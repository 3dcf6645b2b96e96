#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <thread>

#include "dafjam/control/api.hpp"
#include "dafjam/control/session.hpp"
#include "dafjam/fixtures.hpp"

using namespace dafjam;
using namespace dafjam::control;

namespace {

SessionConfig fast_config() {
  SessionConfig cfg;
  cfg.speed = 0.0;
  cfg.telemetry_hz = 50.0;
  return cfg;
}

std::string validation_field(Session& s, const json& patch) {
  try {
    s.update_params(patch);
  } catch (const ValidationError& e) {
    return e.field();
  }
  return "accepted";
}

}  // namespace

TEST(Session, FreshState) {
  Session s(fast_config());
  const auto st = s.state_json();
  EXPECT_EQ(st["muted"], true);
  EXPECT_EQ(st["device"]["mode"], "manual_delay");
  EXPECT_EQ(st["device"]["rotary"], 0);
  EXPECT_EQ(st["delay_s"], 0.0092);
  EXPECT_EQ(st["version"], 1);
  EXPECT_EQ(st["running"], false);
  EXPECT_EQ(st["source"]["kind"], "live_stub");
  EXPECT_EQ(st["engine_config"]["sample_rate_hz"], 48000);
  EXPECT_EQ(st["engine_config"]["max_delay_s"], 2.0);
}

TEST(Session, RotarySeven) {
  Session s(fast_config());
  const auto snap = s.update_params({{"rotary", 7}});
  EXPECT_EQ(snap->params.modulation.base_s, 0.192);
  EXPECT_EQ(s.state_json()["delay_s"], 0.192);
  EXPECT_EQ(s.snapshot()->version, 2u);
}

TEST(Session, InvalidRotaryIsRejectedWholesale) {
  Session s(fast_config());
  s.update_params({{"rotary", 3}});
  const auto before = s.snapshot();
  try {
    s.update_params({{"output_gain_db", -6.0}, {"rotary", 9}});
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "rotary");
    EXPECT_EQ(e.reason(), "out of range 0..7");
  }
  EXPECT_EQ(s.snapshot(), before);
  EXPECT_EQ(s.snapshot()->device.output_gain_db, 0.0);
}

TEST(Session, FieldLevelErrors) {
  Session s(fast_config());
  EXPECT_EQ(validation_field(s, {{"temperature_c", 100}}), "temperature_c");
  EXPECT_EQ(validation_field(s, {{"input_gain_db", "loud"}}), "input_gain_db");
  EXPECT_EQ(validation_field(s, {{"mode", "warp"}}), "mode");
  EXPECT_EQ(validation_field(s, {{"volume", 3}}), "volume");
  EXPECT_EQ(validation_field(s, {{"epoch_s", -1}}), "epoch_s");
  EXPECT_EQ(validation_field(s, json::array()), "body");
  EXPECT_EQ(validation_field(s, {{"modulation", {{"kind", "sinusoid"}, {"base_s", 1.9}, {"amplitude_s", 0.2}}}}),
            "modulation");
  EXPECT_EQ(validation_field(s, {{"mode", "manual_delay"}, {"modulation", {{"kind", "fixed"}}}}), "modulation");
  EXPECT_EQ(s.snapshot()->version, 1u);
}

TEST(Session, AutoDistanceTooFarIsClamped) {
  Session s(fast_config());
  const auto snap = s.update_params(
      {{"mode", "auto_distance"}, {"distance_m", 50}, {"d_daf_target_s", 0.2}, {"temperature_c", 20}});
  EXPECT_TRUE(snap->clamped);
  EXPECT_EQ(snap->physics_error, ErrorKind::DistanceTooFar);
  EXPECT_EQ(snap->params.modulation.base_s, kIcMinDelayS);
  const auto st = s.state_json(snap);
  EXPECT_EQ(st["clamped"], true);
  EXPECT_EQ(st["physics_error"], "DistanceTooFar");
}

TEST(Session, DirectModulation) {
  Session s(fast_config());
  const auto snap = s.update_params(
      {{"modulation", {{"kind", "sinusoid"}, {"base_s", 0.15}, {"amplitude_s", 0.05}, {"frequency_hz", 1}}}});
  EXPECT_EQ(snap->control, ControlSource::Direct);
  EXPECT_EQ(snap->params.modulation, ModulationSpec::sinusoid(0.15, 0.05, 1.0));
  // Choosing a device mode hands the schedule back to the device.
  const auto back = s.update_params({{"mode", "manual_delay"}});
  EXPECT_EQ(back->control, ControlSource::Device);
  EXPECT_EQ(back->params.modulation, ModulationSpec::fixed(0.0092));
}

TEST(Session, TriggerIsIdempotent) {
  Session s(fast_config());
  const auto on = s.trigger(true);
  EXPECT_FALSE(on->params.gains.muted);
  EXPECT_EQ(on->version, 2u);
  EXPECT_EQ(s.trigger(true), on);
  const auto off = s.trigger(false);
  EXPECT_TRUE(off->params.gains.muted);
  EXPECT_EQ(off->version, 3u);
}

TEST(Session, HistoryMatchesSnapshots) {
  Session s(fast_config());
  s.update_params({{"rotary", 5}});
  s.trigger(true);
  const auto hist = s.params_history();
  ASSERT_EQ(hist.size(), 3u);
  EXPECT_EQ(hist.at(3), s.snapshot()->params);
}

TEST(Session, TelemetryFramesInOrder) {
  SessionConfig cfg;
  cfg.speed = 4.0;
  cfg.telemetry_hz = 20.0;
  Session s(cfg);
  auto sub = s.subscribe();
  s.update_params({{"modulation", {{"kind", "sinusoid"}, {"base_s", 0.15}, {"amplitude_s", 0.05}, {"frequency_hz", 1}}}});
  s.start();
  std::uint64_t last_seq = 0;
  int frames = 0;
  double lo = 1e9, hi = -1e9;
  while (frames < 30) {
    auto f = sub->pop(std::chrono::milliseconds(2000));
    ASSERT_TRUE(f.has_value());
    EXPECT_EQ(f->seq, last_seq + 1);
    last_seq = f->seq;
    if (f->params_version == 2) {
      const double want = 1000.0 * delay_at(ModulationSpec::sinusoid(0.15, 0.05, 1.0), f->schedule_time_s);
      EXPECT_NEAR(f->instantaneous_delay_ms, want, 1.0);
      EXPECT_GE(f->instantaneous_delay_ms, 100.0 - 1e-9);
      EXPECT_LE(f->instantaneous_delay_ms, 200.0 + 1e-9);
      lo = std::min(lo, f->instantaneous_delay_ms);
      hi = std::max(hi, f->instantaneous_delay_ms);
      EXPECT_TRUE(f->muted);
      EXPECT_EQ(f->rms_out_db, kSilenceDb);
    }
    ++frames;
  }
  s.stop();
  while (auto f = sub->try_pop()) last_seq = f->seq;
  // 30 frames at 20 Hz cover 6 s of stream time at speed 4.
  EXPECT_LT(lo, 120.0);
  EXPECT_GT(hi, 180.0);
  EXPECT_EQ(s.state_json()["telemetry_seq"], last_seq);
}

TEST(Session, TriggerShowsInTelemetry) {
  SessionConfig cfg;
  cfg.speed = 1.0;
  cfg.telemetry_hz = 20.0;
  Session s(cfg);
  s.start();
  auto sub = s.subscribe();
  s.trigger(true);
  bool unmuted = false;
  for (int i = 0; i < 40 && !unmuted; ++i) {
    auto f = sub->pop(std::chrono::milliseconds(1000));
    ASSERT_TRUE(f);
    unmuted = !f->muted && f->params_version == 2;
  }
  EXPECT_TRUE(unmuted);
  s.stop();
}

TEST(Session, SlowSubscriberOverflows) {
  SessionConfig cfg;
  cfg.speed = 0.0;
  cfg.telemetry_hz = 200.0;
  cfg.subscriber_queue = 4;
  Session s(cfg);
  auto slow = s.subscribe();
  auto healthy = s.subscribe();
  s.start();
  std::uint64_t last = 0;
  for (int i = 0; i < 20; ++i) {
    auto f = healthy->pop(std::chrono::milliseconds(1000));
    ASSERT_TRUE(f);
    EXPECT_EQ(f->seq, last + 1);
    last = f->seq;
  }
  s.stop();
  EXPECT_TRUE(slow->overflowed());
  EXPECT_FALSE(healthy->overflowed());
}

TEST(Session, FileModeCapturesOutput) {
  const auto input = fixtures::white_noise(48000, 0.5, 12);
  SessionConfig cfg = fast_config();
  cfg.device.trigger_pressed = true;
  cfg.device.rotary = RotaryPosition(7);
  Session s(cfg, input);
  s.start();
  s.wait_finished();
  const auto out = s.captured_output();
  s.stop();
  ASSERT_EQ(out.size(), input.size());
  const std::size_t shift = 9216;  // 0.192 s
  for (std::size_t n = 0; n < out.size(); ++n) {
    ASSERT_EQ(out.samples[n], n >= shift ? input.samples[n - shift] : 0.0) << n;
  }
}

TEST(Session, ConcurrentReadersSeeConsistentSnapshots) {
  Session s(fast_config());
  std::atomic<bool> done{false};
  std::atomic<long> checks{0};
  auto reader = [&] {
    while (!done) {
      const auto snap = s.snapshot();
      const int r = snap->device.rotary.value();
      // Writers keep input gain equal to -rotary and output gain equal to rotary.
      ASSERT_EQ(snap->device.input_gain_db, -r);
      ASSERT_EQ(snap->device.output_gain_db, r);
      ASSERT_EQ(snap->params.modulation.base_s, rotary_to_delay(snap->device.rotary));
      ++checks;
    }
  };
  std::thread a(reader), b(reader);
  for (int i = 0; i < 2000; ++i) {
    const int r = i % 8;
    s.update_params({{"rotary", r}, {"input_gain_db", -r}, {"output_gain_db", r}});
  }
  done = true;
  a.join();
  b.join();
  EXPECT_GT(checks.load(), 0);
  EXPECT_EQ(s.snapshot()->version, 2001u);
}

TEST(SessionConfig, FromJson) {
  const auto cfg = session_config_from_json(json::parse(R"({
    "sample_rate_hz": 16000, "max_delay_s": 1.0, "block_size": 160, "speed": 0,
    "source": {"kind": "file", "path": "in.wav", "loop": false},
    "device": {"rotary": 4, "mode": "periodic_square", "periodic": {"frequency_hz": 2}}
  })"));
  EXPECT_EQ(cfg.sample_rate_hz, 16000);
  EXPECT_EQ(cfg.block_size, 160u);
  EXPECT_EQ(cfg.source.kind, SourceKind::File);
  EXPECT_FALSE(cfg.source.loop);
  EXPECT_EQ(cfg.device.rotary.value(), 4);
  EXPECT_EQ(cfg.device.mode, DeviceMode::PeriodicSquare);
  EXPECT_EQ(cfg.device.periodic.frequency_hz, 2.0);
  EXPECT_EQ(cfg.device.periodic.base_s, 0.10);
  EXPECT_THROW(session_config_from_json(json{{"block_size", 0}}), ValidationError);
  EXPECT_THROW(session_config_from_json(json{{"source", {{"kind", "mic"}}}}), ValidationError);
  EXPECT_THROW(session_config_from_json(json{{"device", {{"rotary", 8}}}}), ValidationError);
}

TEST(SessionConfig, MissingFileSource) {
  SessionConfig cfg;
  cfg.source = SourceConfig{SourceKind::File, "/nonexistent/in.wav", false};
  try {
    Session s(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::FileNotFound);
  }
}

// ---- transport-independent API --------------------------------------------

TEST(HandleApi, Routes) {
  Session s(fast_config());
  auto r = handle_api(s, "GET", "/api/state", "");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["delay_s"], 0.0092);

  r = handle_api(s, "PATCH", "/api/params", R"({"rotary": 7})");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["delay_s"], 0.192);

  r = handle_api(s, "PATCH", "/api/params", R"({"rotary": 9})");
  EXPECT_EQ(r.status, 422);
  EXPECT_EQ(r.body["field"], "rotary");
  EXPECT_EQ(r.body["reason"], "out of range 0..7");

  r = handle_api(s, "PATCH", "/api/params", "{not json");
  EXPECT_EQ(r.status, 422);

  r = handle_api(s, "POST", "/api/trigger", R"({"pressed": true})");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["muted"], false);

  r = handle_api(s, "POST", "/api/trigger", R"({"pressed": "yes"})");
  EXPECT_EQ(r.status, 422);
  EXPECT_EQ(r.body["field"], "pressed");

  EXPECT_EQ(handle_api(s, "DELETE", "/api/state", "").status, 405);
  EXPECT_EQ(handle_api(s, "GET", "/api/nothing", "").status, 404);
}

TEST(HandleApi, Physics) {
  Session s(fast_config());
  auto r = handle_api(s, "GET", "/api/physics?d_daf_s=0.2&temperature_c=20&distance_m=34.37&path=round_trip", "");
  ASSERT_EQ(r.status, 200);
  EXPECT_NEAR(r.body["max_distance_m"].get<double>(), 34.37, 1e-9);
  EXPECT_NEAR(r.body["v_mps"].get<double>(), 343.7, 1e-12);
  EXPECT_LE(std::abs(r.body["artificial_delay_s"].get<double>()), 1e-4);

  r = handle_api(s, "GET", "/api/physics?d_daf_s=0.2&distance_m=50", "");
  EXPECT_EQ(r.status, 422);
  EXPECT_EQ(r.body["field"], "distance_m");

  r = handle_api(s, "GET", "/api/physics?d_daf_s=0.2&temperature_c=99", "");
  EXPECT_EQ(r.status, 422);
  EXPECT_EQ(r.body["field"], "temperature_c");

  r = handle_api(s, "GET", "/api/physics?d_daf_s=abc", "");
  EXPECT_EQ(r.status, 422);
  EXPECT_EQ(r.body["field"], "d_daf_s");
}
