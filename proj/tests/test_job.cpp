#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "job.hpp"

using namespace pdcrys;
using namespace pdcrys::job;
using nlohmann::json;

namespace {

const std::filesystem::path kJobs = PDCRYS_JOBS_DIR;

std::vector<std::filesystem::path> jobs_in(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  for (auto& e : std::filesystem::directory_iterator(dir))
    if (e.path().extension() == ".json") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

std::string pointer_of(const json& j) {
  try {
    parse_job(j);
  } catch (const SchemaError& e) {
    return e.pointer;
  }
  return "<accepted>";
}

json base() {
  return json::parse(R"({"format": "pdcrys-job/1", "ring": {"p": 3, "n": 2}, "atlas": {"preset": "affine", "dim": 1}})");
}

}  // namespace

TEST(Job, ExamplesRoundTrip) {
  auto files = jobs_in(kJobs);
  ASSERT_GE(files.size(), 6u);
  for (auto& f : files) {
    JobSpec a = load_job(f.string());
    json once = to_json(a);
    JobSpec b = parse_job(once);
    EXPECT_EQ(a, b) << f;
    EXPECT_EQ(to_json(b).dump(), once.dump()) << f;
  }
}

TEST(Job, ExamplesBuild) {
  for (auto& f : jobs_in(kJobs)) {
    Built b = build(load_job(f.string()));
    EXPECT_TRUE(validate_glued(b.module).valid) << f;
  }
}

TEST(Job, InvalidExamplesAreRejected) {
  for (auto& f : jobs_in(kJobs / "invalid")) {
    bool rejected = false;
    try {
      build(load_job(f.string()));
    } catch (const SchemaError& e) {
      rejected = true;
      EXPECT_FALSE(std::string(e.what()).empty());
    }
    EXPECT_TRUE(rejected) << f;
  }
}

TEST(Job, ErrorsNameTheLocation) {
  json j = base();
  j["format"] = "pdcrys-job/0";
  EXPECT_EQ(pointer_of(j), "/format");

  j = base();
  j["ring"]["q"] = 1;
  EXPECT_EQ(pointer_of(j), "/ring/q");

  j = base();
  j["ring"].erase("n");
  EXPECT_EQ(pointer_of(j), "/ring");

  j = base();
  j["atlas"] = {{"preset", "sphere"}};
  EXPECT_EQ(pointer_of(j), "/atlas/preset");

  j = base();
  j["module"] = json::parse(R"({"kind": "explicit", "rank": 1, "charts": [{"connection": [[[[0], 0, 0, "x"]]]}]})");
  EXPECT_EQ(pointer_of(j), "/module/charts/0/connection/0/0/3");

  j = base();
  j["lifts"] = json::parse(R"([{"name": "F"}, {"name": "F"}])");
  EXPECT_EQ(pointer_of(j), "/lifts/1/name");

  j = base();
  j["command"] = {{"name", "integrate"}};
  EXPECT_EQ(pointer_of(j), "/command/name");
}

TEST(Job, BuildErrorsNameTheLocation) {
  auto build_pointer = [](const json& j) {
    try {
      build(parse_job(j));
    } catch (const SchemaError& e) {
      return e.pointer;
    }
    return std::string("<accepted>");
  };
  json j = base();
  j["ring"]["p"] = 4;
  EXPECT_EQ(build_pointer(j), "/ring");

  j = base();
  j["lifts"] = json::parse(R"([{"name": "F", "chart": 3}])");
  EXPECT_EQ(build_pointer(j), "/lifts/0/chart");

  j = base();
  j["lifts"] = json::parse(R"([{"name": "F", "corrections": [[[[0, 0], 1]]]}])");
  EXPECT_EQ(build_pointer(j), "/lifts/0/corrections/0/0/0");

  j = base();
  j["module"] = json::parse(R"({"kind": "explicit", "rank": 2, "charts": [{"filtration": [[[1]]]}]})");
  EXPECT_EQ(build_pointer(j), "/module/charts/0/filtration/0");

  j = base();
  j["module"] = json::parse(R"({"kind": "structure_sheaf", "lambda": 2})");
  EXPECT_EQ(build_pointer(j), "/module/lambda");
}

TEST(Job, ExplicitLineMatchesPreset) {
  // two charts t and s = 1/t, glued on t invertible
  json j = json::parse(R"({
    "format": "pdcrys-job/1",
    "ring": {"p": 5, "n": 2},
    "atlas": {
      "charts": [{"name": "U0", "dim": 1}, {"name": "U1", "dim": 1}],
      "overlaps": [{"i": 0, "j": 1, "invertible_on_i": [true], "images": [[[[-1], 1]]]}]
    }
  })");
  Built b = build(parse_job(j));
  Engine E(b.module);
  Engine P(structure_sheaf(projective_line(make_ring(5, 2))));
  for (int m = 0; m <= 2; ++m)
    EXPECT_EQ(E.group(m, Variant::full()).invariants(), P.group(m, Variant::full()).invariants()) << m;
}

TEST(Job, NamedLiftsReachTheAtlas) {
  json j = base();
  j["lifts"] = json::parse(R"([{"name": "G", "corrections": [[[[1], 1]]]}, {"name": "H"}])");
  Built b = build(parse_job(j));
  ASSERT_EQ(b.lifts.size(), 2u);
  EXPECT_EQ(b.atlas.lifts[0].name, "G");
  EXPECT_EQ(b.lift_chart.at("H"), 0);
  const CoeffRing& U = make_ring(3, 3);
  EXPECT_EQ(b.lifts.at("G").images()[0], LaurentPoly::monomial(U.one(), {3}) + LaurentPoly::monomial(U.from_int(3), {1}));
}

TEST(Job, WittCoordinates) {
  json j = base();
  j["ring"]["s"] = 2;
  j["module"] = json::parse(R"({"kind": "explicit", "rank": 2, "charts": [{"connection": [[[[0], 0, 1, [1, 2]]]]}]})");
  Built b = build(parse_job(j));
  const CoeffRing& R = make_ring(3, 2, 2);
  EXPECT_EQ(b.module.local[0].M.A[0][0][1].constant_term(), R.from_coords({1, 2}));
  EXPECT_EQ(parse_job(to_json(parse_job(j))), parse_job(j));
  j["module"]["charts"][0]["connection"][0][0][3] = json::array({1, 2, 3});
  EXPECT_THROW(build(parse_job(j)), SchemaError);
}
