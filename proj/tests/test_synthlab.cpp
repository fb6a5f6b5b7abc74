#include "ciaf/errors.hpp"
#include "ciaf/llm.hpp"
#include "ciaf/ontology.hpp"
#include "ciaf/synthlab.hpp"
#include "ciaf/transform.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace ciaf;
using namespace std::chrono;

namespace {

std::string serialized(const SyntheticStreams& s) {
  std::ostringstream out;
  write_perf(out, s.perf, InputFormat::Csv);
  write_events(out, s.events, InputFormat::Csv);
  return out.str();
}

}  // namespace

TEST_CASE("record count is minutes x counters x samples") {
  auto s = generate(default_generator_config(42));
  CHECK(s.config.counters.size() == 4);
  CHECK(s.perf.size() == 35u * 4u * 12u);
}

TEST_CASE("equal seeds give identical streams, different seeds do not") {
  CHECK(serialized(generate(default_generator_config(1))) == serialized(generate(default_generator_config(1))));
  CHECK(serialized(generate(default_generator_config(1))) != serialized(generate(default_generator_config(2))));
}

TEST_CASE("zero deviation pins every draw to the mean") {
  GeneratorConfig cfg = default_generator_config(5);
  for (auto& c : cfg.counters) c.baseline_std = 0.0;
  for (const auto& r : generate(cfg).perf) {
    auto spec = std::find_if(cfg.counters.begin(), cfg.counters.end(),
                             [&](const CounterSpec& c) { return c.counter_name == r.counter_name; });
    CHECK(r.value == spec->baseline_mean);
  }
}

TEST_CASE("draws follow the configured distribution") {
  GeneratorConfig cfg = default_generator_config(77);
  cfg.duration_minutes = 400;
  cfg.noise_fraction = 0.0;
  auto s = generate(cfg);
  for (const auto& c : cfg.counters) {
    double sum = 0, sq = 0;
    std::size_t n = 0;
    for (const auto& r : s.perf) {
      if (r.counter_name != c.counter_name) continue;
      const double z = (r.value - c.baseline_mean) / c.baseline_std;
      sum += z;
      sq += z * z;
      ++n;
    }
    const double mean = sum / n;
    CHECK(std::abs(mean) < 0.05);
    CHECK(std::abs(sq / n - mean * mean - 1.0) < 0.05);
  }
}

TEST_CASE("config validation") {
  GeneratorConfig cfg = default_generator_config();
  cfg.duration_minutes = 0;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg = default_generator_config();
  cfg.noise_fraction = 1.0;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg = default_generator_config();
  cfg.counters[0].baseline_std = -1;
  CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
}

TEST_CASE("attack injection labels the window and shifts the listed counters") {
  const GeneratorConfig cfg = default_generator_config(42);
  const auto base = generate(cfg);
  auto [attacked, truth] = inject_attack(base, default_ransomware_profile());
  REQUIRE(truth.size() == 35);
  int malicious = 0;
  for (const auto& [minute, label] : truth) {
    const auto offset = (minute - floor_minute(cfg.start)).count();
    CHECK((label == ClassificationLabel::Malicious) == (offset >= 20 && offset < 30));
    malicious += label == ClassificationLabel::Malicious;
  }
  CHECK(malicious == 10);

  REQUIRE(attacked.perf.size() == base.perf.size());
  const TimeWindow window{cfg.start + minutes{20}, cfg.start + minutes{30}};
  for (std::size_t i = 0; i < base.perf.size(); ++i) {
    const auto& before = base.perf[i];
    const auto& after = attacked.perf[i];
    const bool shifted_counter = before.counter_name != "Available Bytes";
    if (window.contains(before.timestamp) && shifted_counter) {
      auto spec = std::find_if(cfg.counters.begin(), cfg.counters.end(),
                               [&](const CounterSpec& c) { return c.counter_name == before.counter_name; });
      CHECK(after.value == doctest::Approx(before.value + 3.0 * spec->baseline_std));
    } else {
      CHECK(after.value == before.value);
    }
  }
  CHECK(attacked.events.size() == base.events.size() + 10 * 50);
}

TEST_CASE("an empty shift list leaves the streams alone") {
  const auto base = generate(default_generator_config(3));
  AttackProfile p;
  p.window_start_minute = 5;
  p.window_end_minute = 7;
  auto [same, truth] = inject_attack(base, p);
  CHECK(same.perf == base.perf);
  CHECK(same.events == base.events);
  CHECK(std::count_if(truth.begin(), truth.end(), [](const auto& kv) {
          return kv.second == ClassificationLabel::Malicious;
        }) == 2);
}

TEST_CASE("windows outside the stream are rejected") {
  const auto base = generate(default_generator_config(3));
  AttackProfile p = default_ransomware_profile();
  p.window_start_minute = 40;
  p.window_end_minute = 50;
  CHECK_THROWS_AS(inject_attack(base, p), WindowOutOfRange);
  p.window_start_minute = 10;
  p.window_end_minute = 10;
  CHECK_THROWS_AS(inject_attack(base, p), WindowOutOfRange);
}

TEST_CASE("the bundled profile file matches the built-in one") {
  AttackProfile file = load_profile(testing_support::data_dir() / "profiles" / "ransomware.json");
  AttackProfile builtin = default_ransomware_profile();
  CHECK(file.window_start_minute == builtin.window_start_minute);
  CHECK(file.window_end_minute == builtin.window_end_minute);
  REQUIRE(file.shifts.size() == builtin.shifts.size());
  for (std::size_t i = 0; i < file.shifts.size(); ++i) {
    CHECK(file.shifts[i].counter_name == builtin.shifts[i].counter_name);
    CHECK(file.shifts[i].delta_sigmas == builtin.shifts[i].delta_sigmas);
  }
  CHECK(file.event_burst.events_per_minute == builtin.event_burst.events_per_minute);
  CHECK_THROWS_AS(parse_profile("{\"window\": 3}"), Error);
  CHECK_THROWS_AS(parse_profile("not json"), Error);
}

TEST_CASE("the bundled rule recovers most injected minutes across seeds") {
  // With the shift at +3 sigma over 10 of 35 minutes, each attacked minute
  // lands near z = 1.5, inside the high band, so the rule should fire.
  const OntologyDoc doc = load_ontology(testing_support::bundled_ontology());
  const auto& scenario = lookup_scenario(doc, "ransomware");
  int correct = 0, total = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto [streams, truth] = inject_attack(generate(default_generator_config(seed)), default_ransomware_profile());
    FeatureMatrix m = resample_minutely(streams.perf);
    std::vector<std::string> keys;
    for (const auto& f : scenario.required_features) keys.push_back(m.columns[*resolve_feature(m.columns, f)]);
    FeatureMatrix sel = m.select(keys);
    LikertMatrix lm = to_likert(sel, compute_stats(sel), LikertScheme::Seven);
    for (std::size_t i = 0; i < lm.rows.size(); ++i) {
      correct += mock_classify(scenario.detection_rule, row_view(lm, i)) == truth.at(lm.rows[i]);
      ++total;
    }
  }
  CHECK(static_cast<double>(correct) / total >= 0.9);
}

TEST_CASE("label file format") {
  GroundTruth t{{floor_minute(default_generator_config().start), ClassificationLabel::Malicious}};
  std::ostringstream out;
  write_labels(out, t);
  CHECK(out.str() == "minute,label\n2025-01-01T00:00:00Z,Malicious\n");
}
