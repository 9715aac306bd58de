#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "groundrisk/cascade.hpp"
#include "groundrisk/util.hpp"

using namespace groundrisk;

namespace {

GroundingRecord make(std::string id, bool primary_ok, std::optional<bool> expert_ok) {
  GroundingRecord r;
  r.id = std::move(id);
  r.image_width = 100;
  r.image_height = 100;
  r.gt_box = {10, 10, 20, 20};
  r.samples = {{15, 15}};
  r.mlg = primary_ok ? Point{15, 15} : Point{50, 50};
  if (expert_ok) r.expert = *expert_ok ? Point{12, 12} : Point{80, 80};
  return r;
}

}  // namespace

TEST_CASE("decide") {
  CHECK(decide(0.3, 0.3) == Decision::Accept);
  CHECK(decide(0.2, 0.3) == Decision::Accept);
  CHECK(decide(0.31, 0.3) == Decision::Defer);
}

TEST_CASE("cascade composition") {
  const std::vector<GroundingRecord> records{make("a", true, true), make("b", false, true),
                                             make("c", true, false), make("d", false, false)};
  const std::vector<double> u{0.1, 0.9, 0.2, 0.8};

  const auto r = evaluate_cascade(records, u, 0.5, 0);
  CHECK(r.accepted == 2);
  CHECK(r.deferred == 2);
  CHECK(r.accepted_correct == 2);
  CHECK(r.deferred_correct == 1);
  CHECK(r.system_accuracy == 0.75);
  CHECK(r.primary_accuracy == 0.5);
  CHECK(r.expert_only_accuracy == 0.5);
  CHECK(r.cascading_rate == 0.5);

  const auto all = evaluate_cascade(records, u, std::nullopt, 0);
  CHECK(all.cascading_rate == 1.0);
  CHECK(all.system_accuracy == *all.expert_only_accuracy);

  const auto none = evaluate_cascade(records, u, std::numeric_limits<double>::infinity(), 0);
  CHECK(none.cascading_rate == 0.0);
  CHECK(none.system_accuracy == none.primary_accuracy);
}

TEST_CASE("cascade equals the accept/defer mixture on every configuration") {
  // Enumerate all 2^3 outcomes per record across 20 records with random
  // uncertainties and thresholds.
  Rng rng(17);
  for (int t = 0; t < 100; ++t) {
    std::vector<GroundingRecord> records;
    std::vector<double> u;
    for (int i = 0; i < 20; ++i) {
      const int code = (t * 20 + i) % 8;
      records.push_back(make("r" + std::to_string(i), code & 1, (code & 2) != 0));
      u.push_back(code & 4 ? rng.uniform(0, 0.5) : rng.uniform(0.5, 1));
    }
    const double tau = rng.uniform01();
    const auto r = evaluate_cascade(records, u, tau, 0);
    std::size_t expected = 0, deferred = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const bool accept = u[i] <= tau;
      deferred += !accept;
      expected += accept ? records[i].mlg->x == 15 : records[i].expert->x == 12;
    }
    CHECK(r.system_accuracy == static_cast<double>(expected) / 20.0);
    CHECK(r.cascading_rate == static_cast<double>(deferred) / 20.0);
    CHECK(r.accepted + r.deferred == r.n_total);
  }
}

TEST_CASE("cascading rate falls as the threshold rises") {
  Rng rng(4);
  std::vector<GroundingRecord> records;
  std::vector<double> u;
  for (int i = 0; i < 200; ++i) {
    records.push_back(make("x" + std::to_string(i), rng.bernoulli(0.7), rng.bernoulli(0.9)));
    u.push_back(std::floor(rng.uniform01() * 30) / 30);
  }
  double previous = 2.0;
  for (int k = 0; k <= 40; ++k) {
    const double rate = evaluate_cascade(records, u, k / 40.0, 0).cascading_rate;
    CHECK(rate <= previous);
    previous = rate;
  }
}

TEST_CASE("missing experts matter only when deferred") {
  const std::vector<GroundingRecord> records{make("keep", true, std::nullopt), make("ok", false, true),
                                             make("lost", false, std::nullopt)};
  const std::vector<double> low{0.1, 0.9, 0.2};
  const auto r = evaluate_cascade(records, low, 0.5, 0);
  CHECK_FALSE(r.expert_only_accuracy.has_value());
  CHECK(r.system_accuracy == doctest::Approx(2.0 / 3));

  const std::vector<double> high{0.1, 0.9, 0.7};
  try {
    evaluate_cascade(records, high, 0.5, 0);
    FAIL("expected MissingExpertError");
  } catch (const MissingExpertError& e) {
    CHECK(e.ids() == std::vector<std::string>{"lost"});
  }
  CHECK_THROWS_AS(evaluate_cascade(records, std::vector<double>{0.1}, 0.5, 0), std::invalid_argument);
}

TEST_CASE("deferral manifest lists exactly the deferred records") {
  std::vector<GroundingRecord> records{make("a", true, true), make("b", true, true), make("c", true, true)};
  records[1].instruction = "click \"save\"";
  const std::vector<double> u{0.2, 0.6, 0.6};
  const auto entries = emit_deferrals(records, u, 0.5);
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].id == "b");
  CHECK(entries[0].instruction == "click \"save\"");
  CHECK(entries[1].id == "c");
  CHECK_FALSE(entries[1].instruction.has_value());

  const std::string text = serialize_manifest(entries);
  const auto newline = text.find('\n');
  const auto first = nlohmann::json::parse(text.substr(0, newline));
  CHECK(first["id"] == "b");
  CHECK(first["instruction"] == "click \"save\"");
  const auto second = nlohmann::json::parse(text.substr(newline + 1, text.find('\n', newline + 1) - newline - 1));
  CHECK_FALSE(second.contains("instruction"));

  CHECK(emit_deferrals(records, u, std::nullopt).size() == 3);
  CHECK(emit_deferrals(records, u, 1.0).empty());
}
