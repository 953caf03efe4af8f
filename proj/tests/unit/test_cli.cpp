#include <string>

#include "doctest.h"
#include "scenario.hpp"

using namespace sdom::cli;

TEST_CASE("bundled templates") {
  const auto names = template_names();
  CHECK(names.size() >= 9);
  for (const auto& n : names) {
    const auto s = parse_scenario(template_text(n));
    CHECK(s.name == n);
  }
  CHECK_THROWS_AS(template_text("nope"), ConfigError);
}

TEST_CASE("describe") {
  const auto text = describe_kind("sparse-linear");
  CHECK(text.find("exponents.p1") != std::string::npos);
  CHECK(text.find("truncation.taus") != std::string::npos);
  CHECK(text.find("required") != std::string::npos);
  CHECK_THROWS_AS(describe_kind("bogus"), ConfigError);
}

TEST_CASE("strict validation") {
  auto doc = Json::parse(template_text("sparse_linear_hilbert"));
  SUBCASE("unknown keys") {
    doc["params"]["surprise"] = 1;
    CHECK_THROWS_AS(validate(doc), ConfigError);
    doc["params"].erase("surprise");
    doc["extra"] = Json::object();
    CHECK_THROWS_AS(validate(doc), ConfigError);
  }
  SUBCASE("exponents have no defaults") {
    doc["exponents"].erase("p2");
    CHECK_THROWS_AS(validate(doc), ConfigError);
  }
  SUBCASE("p1 above the dual of p2") {
    doc["exponents"]["p1"] = 3;
    doc["exponents"]["p2"] = 2;
    try {
      validate(doc);
      FAIL("accepted p1 > p2'");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("p1 <= p2'") != std::string::npos);
    }
  }
  SUBCASE("wrong types") {
    doc["truncation"]["sigma"] = "zero";
    CHECK_THROWS_AS(validate(doc), ConfigError);
  }
  SUBCASE("malformed JSON") { CHECK_THROWS_AS(parse_scenario("{\"kind\": "), ConfigError); }
}

TEST_CASE("overrides") {
  auto doc = Json::parse(template_text("ladder_demo"));
  apply_override(doc, "seeds.base=99");
  apply_override(doc, "functions.generator=indicator");
  apply_override(doc, "space.extent=[512]");
  CHECK(doc["seeds"]["base"] == 99);
  CHECK(doc["functions"]["generator"] == "indicator");
  CHECK(doc["space"]["extent"][0] == 512);
  CHECK(validate(doc).seed == 99);
  CHECK_THROWS_AS(apply_override(doc, "novalue"), ConfigError);
}

TEST_CASE("runs write a summary and are reproducible") {
  auto doc = Json::parse(template_text("cz_decomposition"));
  apply_override(doc, "seeds.count=3");
  const auto s = validate(doc);
  const auto a = run_scenario(s), b = run_scenario(s);
  REQUIRE(a.files.count("summary.csv") == 1);
  CHECK(a.files.at("summary.csv").rfind("check,status,constant,tolerance\n", 0) == 0);
  CHECK(a.all_pass());
  CHECK(a.files == b.files);

  apply_override(doc, "params.tolerance=1e-30");
  CHECK_FALSE(run_scenario(validate(doc)).all_pass());
}
