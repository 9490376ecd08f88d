// Links only libfrostlab.so; exercises the C surface end to end.

#include <cstdlib>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "frostlab/frostlab_c.h"

using Json = nlohmann::json;

namespace {

std::string Take(char* s) {
  std::string out = s ? s : "";
  fl_string_free(s);
  return out;
}

fl_measure* Gen(const char* name, const char* params) {
  fl_measure* m = nullptr;
  REQUIRE(fl_measure_generate(name, params, &m) == FL_OK);
  REQUIRE(m != nullptr);
  return m;
}

}  // namespace

TEST_SUITE("capi") {

TEST_CASE("status names and version") {
  CHECK(std::string(fl_status_name(FL_OK)) == "Ok");
  CHECK(std::string(fl_status_name(FL_UNKNOWN_GENERATOR)) == "UnknownGenerator");
  CHECK(std::string(fl_status_name(FL_INTERNAL)) == "Internal");
  CHECK(std::string(fl_status_name(999)) == "Unknown");
  CHECK(std::string(fl_version()).size() > 0);
  fl_string_free(nullptr);
  fl_measure_free(nullptr);
}

TEST_CASE("measure round trip through JSON") {
  fl_measure* mu = Gen("cantor_product", R"({"d":2,"m":8})");
  char* text = nullptr;
  REQUIRE(fl_measure_to_json(mu, &text) == FL_OK);
  std::string s = Take(text);
  Json j = Json::parse(s);
  CHECK(j["d"] == 2);
  CHECK(j["m"] == 8);
  CHECK(j["cells"].size() == 256);

  fl_measure* back = nullptr;
  REQUIRE(fl_measure_parse(s.c_str(), &back) == FL_OK);
  REQUIRE(fl_measure_to_json(back, &text) == FL_OK);
  CHECK(Take(text) == s);

  REQUIRE(fl_measure_info(back, &text) == FL_OK);
  Json info = Json::parse(Take(text));
  CHECK(info["cells"] == 256);
  CHECK(info["count_by_level"][8] == 256);
  fl_measure_free(back);
  fl_measure_free(mu);
}

TEST_CASE("errors map to status codes") {
  fl_measure* m = nullptr;
  CHECK(fl_measure_generate("nope", "{}", &m) == FL_UNKNOWN_GENERATOR);
  CHECK(m == nullptr);
  CHECK(std::string(fl_last_error()).find("nope") != std::string::npos);

  CHECK(fl_measure_parse("{not json", &m) == FL_PARSE_ERROR);
  CHECK(fl_measure_parse(R"({"d":2,"m":3,"cells":[{"idx":[1],"mass":1}]})", &m) ==
        FL_PARSE_ERROR);
  CHECK(fl_measure_load("/nonexistent/mu.json", &m) == FL_IO_ERROR);
  CHECK(fl_measure_generate("cantor_product", R"({"d":2,"m":7})", &m) == FL_DEPTH_MISMATCH);

  char* out = nullptr;
  CHECK(fl_incidence(R"({"E":[[0,0],[0,0]],"A":[[0,0]],"delta":0.5,"audit":false})", &out) ==
        FL_PRECONDITION_FAILED);
  CHECK(out == nullptr);
  CHECK(fl_run(R"({"name":"x"})", &out) == FL_PARSE_ERROR);
  CHECK(fl_lip_decompose(R"({"mode":"superlinear"})", &out) != FL_OK);
}

TEST_CASE("operations return JSON") {
  fl_measure* mu = Gen("cantor_product", R"({"d":2,"m":8})");
  char* out = nullptr;

  REQUIRE(fl_regularize(mu, R"({"T":2})", &out) == FL_OK);
  Json reg = Json::parse(Take(out));
  CHECK(reg["pieces"].size() >= 1);

  REQUIRE(fl_energy(mu, R"({"sigma":0.5})", &out) == FL_OK);
  CHECK(Json::parse(Take(out))["total"].get<double>() > 0);

  REQUIRE(fl_entropy_bound(mu, R"({"map":"proj:0.3","T":2})", &out) == FL_OK);
  Json eb = Json::parse(Take(out));
  CHECK(eb["lhs"].get<double>() <= eb["rhs"].get<double>() + 1e-9);

  fl_measure* p = nullptr;
  REQUIRE(fl_project(mu, R"({"angle":0})", &p) == FL_OK);
  REQUIRE(fl_measure_info(p, &out) == FL_OK);
  Json pi = Json::parse(Take(out));
  CHECK(pi["d"] == 1);
  CHECK(pi["cells"] == 16);
  fl_measure_free(p);

  char* csv = nullptr;
  REQUIRE(fl_sweep(mu, R"({"directions":4})", &out, &csv) == FL_OK);
  Json sw = Json::parse(Take(out));
  CHECK(sw["directions"] == 4);
  std::string table = Take(csv);
  CHECK(table.rfind("theta,count,exponent,slope\n", 0) == 0);
  CHECK(table.find("0.000000000000,16,0.500000000") != std::string::npos);

  REQUIRE(fl_pinned(mu, R"({"count":3})", &out, nullptr) == FL_OK);
  CHECK(Json::parse(Take(out)).contains("exponent"));
  fl_measure_free(mu);
}

TEST_CASE("incidence on the train track") {
  char* out = nullptr;
  REQUIRE(fl_incidence(R"({"train_track":8})", &out) == FL_OK);
  Json r = Json::parse(Take(out));
  // every point of every row meets every horizontal line of its row
  CHECK(r["incidence"]["count"] == r["incidence"]["X"].get<std::uint64_t>() *
                                       r["incidence"]["A"].get<std::uint64_t>());
  CHECK(r["audit"]["size"]["ok"] == false);
}

TEST_CASE("pipeline runs from a scenario string") {
  char* out = nullptr;
  const char* sc =
      R"({"name":"c","generator":{"name":"cantor_product","params":{"d":2,"m":16}},"T":2})";
  REQUIRE(fl_run(sc, &out) == FL_OK);
  Json r = Json::parse(Take(out));
  CHECK(r["name"] == "c");
  CHECK(r["degenerate"] == false);
  CHECK(r["scales"].size() > 0);
}

}  // TEST_SUITE
