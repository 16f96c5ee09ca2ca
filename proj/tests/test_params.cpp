// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pyric/params.hpp"

using namespace pyric;

namespace {

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

} // namespace

TEST_CASE("defaults carry the printed equation constants") {
  const ParameterSet p = ParameterSet::defaults();
  CHECK(p.value("qign.c0") == 144.5);
  CHECK(p.value("qign.c1") == 0.266);
  CHECK(p.value("qign.c2") == 0.00058);
  CHECK(p.value("qign.c3") == 0.01);
  CHECK(p.value("qign.c4") == 18.54);
  CHECK(p.value("qign.c5") == 0.151);
  CHECK(p.value("qign.c6") == 6.4);
  CHECK(p.value("ic.qmax") == 344.0);
  CHECK(p.value("ic.chi_exponent") == 3.6);
  CHECK(p.value("ic.chi_scale") == 10.0);
}

TEST_CASE("exponents over signed bases are permanently frozen") {
  ParameterSet p = ParameterSet::defaults();
  for (const char* name :
       {"qign.square_exponent", "ic.chi_exponent", "spread.wind_exponent"}) {
    const Parameter& q = p.param(p.index(name));
    CHECK(q.exponent);
    CHECK(q.frozen);
    CHECK_THROWS_AS(p.set_frozen(name, false), DomainError);
  }
}

TEST_CASE("every parameter has a freeze flag and alphas live in log space") {
  const ParameterSet p = ParameterSet::defaults();
  int alphas = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Parameter& q = p.param(static_cast<int>(i));
    CHECK(!q.name.empty());
    if (q.log_space) {
      ++alphas;
      CHECK(q.value > 0.0);
      CHECK(q.name.rfind("branch_alpha.", 0) == 0);
    }
  }
  CHECK(alphas == 18);
}

TEST_CASE("ledger serialization round-trips bit-exactly") {
  const ParameterSet p = ParameterSet::defaults();
  const std::string text = p.to_json_text();
  const ParameterSet q = ParameterSet::from_json_text(text);
  CHECK(p == q);
  CHECK(q.to_json_text() == text);

  // Values with no short decimal representation survive as well.
  ParameterSet r = ParameterSet::defaults();
  r.set_value("qign.c1", 0.1 + 0.2); // 0.30000000000000004
  r.set_value("ic.pnorm3", 1.8500000000000001e-05);
  const ParameterSet s = ParameterSet::from_json_text(r.to_json_text());
  CHECK(s.value("qign.c1") == r.value("qign.c1"));
  CHECK(s.value("ic.pnorm3") == r.value("ic.pnorm3"));

  const auto path = temp_file("pyric_ledger_roundtrip.json");
  r.save(path);
  const ParameterSet t = ParameterSet::load(path);
  CHECK(t == r);
  std::filesystem::remove(path);
}

TEST_CASE("freeze helpers") {
  ParameterSet p = ParameterSet::defaults();
  p.freeze_all_except({"qign.c1"});
  const auto unfrozen = p.unfrozen_indices();
  REQUIRE(unfrozen.size() == 1);
  CHECK(p.param(unfrozen[0]).name == "qign.c1");

  p.freeze_all();
  CHECK(p.unfrozen_indices().empty());
}

TEST_CASE("branch alpha batch setter") {
  ParameterSet p = ParameterSet::defaults();
  p.set_all_branch_alphas(1000.0);
  CHECK(p.value("branch_alpha.ic_zero") == 1000.0);
  CHECK(p.value("branch_alpha.emc_lo") == 1000.0);
  CHECK(p.value("qign.c0") == 144.5); // untouched
  CHECK_THROWS_AS(p.set_value("branch_alpha.ic_zero", -1.0), DomainError);
}

TEST_CASE("unknown names and malformed ledgers are rejected") {
  ParameterSet p = ParameterSet::defaults();
  CHECK_THROWS_AS(p.index("no.such.parameter"), DomainError);
  CHECK(p.find("no.such.parameter") == -1);
  CHECK_THROWS_AS(ParameterSet::from_json_text("{"), IoError);
  CHECK_THROWS_AS(ParameterSet::from_json_text("{\"format\":\"other\"}"),
                  IoError);
}

TEST_CASE("content hash tracks value changes") {
  ParameterSet p = ParameterSet::defaults();
  const std::string h0 = p.content_hash();
  p.set_value("qign.c1", 0.3);
  CHECK(p.content_hash() != h0);
}

TEST_CASE("the committed default ledger matches the built-in defaults") {
  const std::filesystem::path path =
      std::filesystem::path(PYRIC_SOURCE_DIR) / "core" / "data" /
      "ledger.default.json";
  REQUIRE(std::filesystem::exists(path));
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() == ParameterSet::defaults().to_json_text());
  CHECK(ParameterSet::load(path) == ParameterSet::defaults());
}
