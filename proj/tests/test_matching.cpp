#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>
#include <string>
#include <vector>

#include "saldet/errors.hpp"
#include "saldet/matching.hpp"
#include "saldet/rng.hpp"
#include "support/oracles.hpp"

using namespace saldet;

namespace {

Detection det(double x0, double y0, double x1, double y1, double score,
              const std::string& image = "img") {
    return Detection{image, Box(x0, y0, x1, y1), score};
}

SignAnnotation gt(const std::string& id, double x0, double y0, double x1, double y1,
                  bool salient = false) {
    return SignAnnotation{id, "img", Box(x0, y0, x1, y1), SignCategory::Stop, salient,
                          std::nullopt};
}

} // namespace

TEST_CASE("detection validation enforces score range") {
    CHECK_NOTHROW(validate(det(0, 0, 1, 1, 0.0)));
    CHECK_NOTHROW(validate(det(0, 0, 1, 1, 1.0)));
    CHECK_THROWS_AS(validate(det(0, 0, 1, 1, -0.01)), ValidationError);
    CHECK_THROWS_AS(validate(det(0, 0, 1, 1, 1.01)), ValidationError);
    CHECK_THROWS_AS(validate(det(0, 0, 1, 1, std::numeric_limits<double>::quiet_NaN())),
                    ValidationError);
}

TEST_CASE("cap keeps the top scores and is stable on ties") {
    std::vector<Detection> dets = {
        det(0, 0, 1, 1, 0.5), det(1, 0, 2, 1, 0.9), det(2, 0, 3, 1, 0.5), det(3, 0, 4, 1, 0.1),
    };
    const auto capped = cap_detections(dets, 3);
    REQUIRE(capped.size() == 3);
    CHECK(capped[0].score == 0.9);
    // the two 0.5 scores keep their input order
    CHECK(capped[1].box == Box(0, 0, 1, 1));
    CHECK(capped[2].box == Box(2, 0, 3, 1));
}

TEST_CASE("cap rejects detections from different images") {
    std::vector<Detection> dets = {det(0, 0, 1, 1, 0.5), det(0, 0, 1, 1, 0.5, "other")};
    CHECK_THROWS_AS(cap_detections(dets, 10), MixedImages);
}

TEST_CASE("a single confident detection claims the overlapping annotation") {
    const std::vector<Detection> dets = {det(0, 0, 10, 10, 0.8)};
    const std::vector<SignAnnotation> gts = {gt("g0", 0, 0, 10, 12)};
    const MatchResult r = match_image(dets, gts);
    REQUIRE(r.matched_pairs.size() == 1);
    CHECK(r.matched_pairs[0].detection_index == 0);
    CHECK(r.matched_pairs[0].annotation_id == "g0");
    CHECK(r.matched_pairs[0].iou == doctest::Approx(10.0 / 12.0));
    CHECK(r.unmatched_detections.empty());
    CHECK(r.unmatched_annotations.empty());
}

TEST_CASE("overlap below the threshold stays unmatched") {
    const std::vector<Detection> dets = {det(0, 0, 10, 10, 0.8)};
    const std::vector<SignAnnotation> gts = {gt("g0", 6, 6, 16, 16)};
    const MatchResult r = match_image(dets, gts);
    CHECK(r.matched_pairs.empty());
    CHECK(r.unmatched_detections == std::vector<std::size_t>{0});
    CHECK(r.unmatched_annotations == std::vector<std::string>{"g0"});
}

TEST_CASE("higher scoring detection claims first even when a later one fits better") {
    // both detections overlap g0; the high scorer takes it greedily and the
    // better-fitting low scorer is left with nothing
    const std::vector<Detection> dets = {
        det(0, 0, 10, 10, 0.4),  // iou with g0: 1.0
        det(0, 0, 10, 12.5, 0.9) // iou with g0: 0.8
    };
    const std::vector<SignAnnotation> gts = {gt("g0", 0, 0, 10, 10)};
    const MatchResult r = match_image(dets, gts);
    REQUIRE(r.matched_pairs.size() == 1);
    CHECK(r.matched_pairs[0].detection_index == 1);
    CHECK(r.matched_pairs[0].iou == doctest::Approx(0.8));
    CHECK(r.unmatched_detections == std::vector<std::size_t>{0});
}

TEST_CASE("each detection takes its best remaining annotation") {
    const std::vector<Detection> dets = {
        det(0, 0, 10, 10, 0.9),
        det(0, 0, 10, 11, 0.8),
    };
    const std::vector<SignAnnotation> gts = {
        gt("g0", 0, 0, 10, 10),
        gt("g1", 0, 0, 10, 12),
    };
    const MatchResult r = match_image(dets, gts);
    REQUIRE(r.matched_pairs.size() == 2);
    CHECK(r.matched_pairs[0].detection_index == 0);
    CHECK(r.matched_pairs[0].annotation_id == "g0");
    CHECK(r.matched_pairs[1].detection_index == 1);
    CHECK(r.matched_pairs[1].annotation_id == "g1");
}

TEST_CASE("iou ties break toward the lowest annotation id") {
    // two identical ground-truth boxes, only the ids differ
    const std::vector<Detection> dets = {det(0, 0, 10, 10, 0.9)};
    const std::vector<SignAnnotation> gts = {
        gt("zz", 0, 0, 10, 10),
        gt("aa", 0, 0, 10, 10),
    };
    const MatchResult r = match_image(dets, gts);
    REQUIRE(r.matched_pairs.size() == 1);
    CHECK(r.matched_pairs[0].annotation_id == "aa");
    CHECK(r.unmatched_annotations == std::vector<std::string>{"zz"});
}

TEST_CASE("detections beyond the cap never participate") {
    std::vector<Detection> dets;
    for (int i = 0; i < 5; ++i) {
        // scores descend with the index; the last one overlaps the annotation
        dets.push_back(det(20 + i, 20, 30 + i, 30, 0.9 - 0.1 * i));
    }
    dets.push_back(det(0, 0, 10, 10, 0.1)); // perfect fit, lowest score
    const std::vector<SignAnnotation> gts = {gt("g0", 0, 0, 10, 10)};
    const MatchResult r = match_image(dets, gts, 0.5, 5);
    CHECK(r.matched_pairs.empty());
    CHECK(r.unmatched_annotations == std::vector<std::string>{"g0"});
    // the capped-out detection is not reported at all
    CHECK(r.unmatched_detections == std::vector<std::size_t>{0, 1, 2, 3, 4});
}

TEST_CASE("empty inputs produce empty results") {
    const MatchResult r1 = match_image({}, {});
    CHECK(r1.matched_pairs.empty());
    const std::vector<SignAnnotation> gts = {gt("g0", 0, 0, 10, 10)};
    const MatchResult r2 = match_image({}, gts);
    CHECK(r2.unmatched_annotations == std::vector<std::string>{"g0"});
}

TEST_CASE("optimized matcher agrees with the naive reference on random instances") {
    Rng rng(8080);
    for (int trial = 0; trial < 500; ++trial) {
        const int n_dets = rng.uniform_int(0, 6);
        const int n_gts = rng.uniform_int(0, 6);
        std::vector<Detection> dets;
        std::vector<SignAnnotation> gts;
        for (int i = 0; i < n_dets; ++i) {
            // quantized scores in {0, 0.1, ..., 1} force frequent ties
            dets.push_back(Detection{"img", oracles::random_quantized_box(rng),
                                     rng.uniform_int(0, 10) / 10.0});
        }
        for (int i = 0; i < n_gts; ++i) {
            gts.push_back(gt("g" + std::to_string(i), 0, 0, 1, 1));
            gts.back().box = oracles::random_quantized_box(rng);
        }
        const std::size_t cap = static_cast<std::size_t>(rng.uniform_int(1, 7));
        const MatchResult fast = match_image(dets, gts, 0.5, cap);
        const MatchResult naive = oracles::naive_match(dets, gts, 0.5, cap);
        CAPTURE(trial);
        REQUIRE(fast.matched_pairs == naive.matched_pairs);
        REQUIRE(fast.unmatched_detections == naive.unmatched_detections);
        REQUIRE(fast.unmatched_annotations == naive.unmatched_annotations);

        // conservation: every considered detection and every annotation is
        // accounted for exactly once
        REQUIRE(fast.matched_pairs.size() + fast.unmatched_detections.size() ==
                std::min(dets.size(), cap));
        REQUIRE(fast.matched_pairs.size() + fast.unmatched_annotations.size() == gts.size());
    }
}
