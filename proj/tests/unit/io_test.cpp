#include <doctest.h>

#include "optrec/error.hpp"
#include "optrec/io.hpp"
#include "optrec/synthesis.hpp"

using namespace optrec;

namespace {

const char* kBox = R"({
  "space": {"rn": {"dim": 2}},
  "model": {"polytope": {"a": [[1, 0], [0, 1], [-1, 0], [0, -1]]}},
  "observations": [[1, 0]],
  "target": {"sup": {"w": [[1, 0], [0, 1]]}}
})";

}  // namespace

TEST_CASE("canonical JSON") {
  const Json j = parse_json(R"({"b": [1, 2.5, [3]], "a": {"z": 0.1, "y": "s"}, "c": [], "d": [[1, 2], [3, 4]]})");
  const std::string text = canonical_json(j);
  CHECK(text ==
        "{\n"
        "  \"a\": {\n"
        "    \"y\": \"s\",\n"
        "    \"z\": 0.10000000000000001\n"
        "  },\n"
        "  \"b\": [\n"
        "    1,\n"
        "    2.5,\n"
        "    [3]\n"
        "  ],\n"
        "  \"c\": [],\n"
        "  \"d\": [\n"
        "    [1, 2],\n"
        "    [3, 4]\n"
        "  ]\n"
        "}\n");
  // Idempotent and stable under re-parsing.
  CHECK(canonical_json(parse_json(text)) == text);
  CHECK_THROWS_AS(canonical_json(Json(std::numeric_limits<double>::infinity())), InputError);
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("problem files") {
  const Json doc = parse_json(kBox);
  const Problem p = problem_from_json(doc);
  CHECK(p.dim() == 2);
  CHECK(p.m() == 1);
  CHECK(is_polytope(p.model));
  CHECK(problem_hash(doc) == problem_hash(parse_json(canonical_json(doc))));

  SUBCASE("schema errors") {
    Json bad = doc;
    bad["target"] = parse_json(R"({"lth_largest": {"l": 0, "w": [[1, 0], [0, 1]]}})");
    CHECK_THROWS_AS(problem_from_json(bad), InputError);
    bad = doc;
    bad["extra"] = 1;
    CHECK_THROWS_AS(problem_from_json(bad), InputError);
    bad = doc;
    bad["observations"] = parse_json("[[1, 0, 0]]");
    CHECK_THROWS_AS(problem_from_json(bad), DimensionError);
    bad = doc;
    bad["noise"] = parse_json(R"({"p": "3", "radius": 0.1})");
    CHECK_THROWS_AS(problem_from_json(bad), InputError);
    bad = doc;
    bad["observations"] = parse_json("[0]");
    CHECK_THROWS_AS(problem_from_json(bad), InputError);
    CHECK_THROWS_AS(parse_json("{"), InputError);
  }
  SUBCASE("targets and noise") {
    Json j = doc;
    j["target"] = parse_json(R"({"diff_of_sups": {"mu": [[1, 0]], "nu": [[0, 1], [0, -1]]}})");
    j["noise"] = parse_json(R"({"p": "inf", "radius": 0.1})");
    const Problem q = problem_from_json(j);
    CHECK(q.target.kind() == TargetFunctional::Kind::SupInf);
    CHECK(q.noisy());
  }
  SUBCASE("rkhs mode") {
    const Json j = parse_json(R"({
      "space": {"rkhs": {"kernel": {"gaussian": {"gamma": 1.0}}, "points": [[0], [0.5], [1]]}},
      "model": {"approx": {"v_basis": [], "g": [0, 0, 0], "eps": 1.0}},
      "observations": [0, 2],
      "target": {"sup": {"w": [[0, 1, 0]]}}
    })");
    const Problem q = problem_from_json(j);
    const auto& k = std::get<ApproxSet>(q.model);
    CHECK(k.gram()(0, 1) == doctest::Approx(std::exp(-0.25)));
    CHECK(q.observations.rows()(1, 2) == 1.0);
    // Estimating f(0.5) from f(0), f(1) in the unit ball.
    const double e = synthesize(q).e_hat;
    CHECK(e > 0.0);
    CHECK(e < 1.0);
  }
}

TEST_CASE("estimator files round trip") {
  const Problem p = problem_from_json(parse_json(kBox));
  const SynthesisResult r = synthesize(p);
  EstimatorFile f{r.estimator, {r.e_hat, 1e-8, "abc", kToolVersion, 7}};
  const std::string text = canonical_json(estimator_to_json(f));
  const EstimatorFile g = estimator_from_json(parse_json(text));
  CHECK(canonical_json(estimator_to_json(g)) == text);
  CHECK(g.metadata.seed == 7);
  CHECK(std::get<SupAffineEstimator>(g.estimator).offsets == std::get<SupAffineEstimator>(r.estimator).offsets);

  Problem median = p;
  Matrix a(6, 3);
  a << Matrix::Identity(3, 3), -Matrix::Identity(3, 3);
  median.model = Polytope(a, 3);
  median.observations = ObservationMap(Matrix::Identity(1, 3), 3);
  median.target = lth_largest_target(Matrix::Identity(3, 3), 2);
  const SynthesisResult rm = synthesize(median);
  const EstimatorFile fm{rm.estimator, {rm.e_hat, 1e-8, "", kToolVersion, 0}};
  const std::string tm = canonical_json(estimator_to_json(fm));
  CHECK(canonical_json(estimator_to_json(estimator_from_json(parse_json(tm)))) == tm);

  Json broken = parse_json(text);
  broken["gains"] = parse_json("[[1], [2, 3]]");
  CHECK_THROWS_AS(estimator_from_json(broken), DimensionError);
  broken = parse_json(text);
  broken["kind"] = "affine";
  CHECK_THROWS_AS(estimator_from_json(broken), InputError);
}
