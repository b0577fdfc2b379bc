#include "doctest.h"

#include "recsys/errors.hpp"
#include "recsys/evaluation.hpp"
#include "support/fixtures.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace recsys;

namespace {

struct ConstantPredictor : RatingPredictor {
    double value;
    int support;
    explicit ConstantPredictor(double v, int s = 1) : value(v), support(s) {}
    Prediction predict(std::int64_t u, std::int64_t i) const override {
        Prediction p;
        p.user_id = u;
        p.item_id = i;
        p.value = value;
        p.support = support;
        return p;
    }
    double fallback_value() const override { return 3.0; }
    std::string name() const override { return "constant"; }
};

struct ThrowingPredictor : RatingPredictor {
    Prediction predict(std::int64_t, std::int64_t) const override {
        throw DomainError("always fails");
    }
    double fallback_value() const override { return 2.5; }
    std::string name() const override { return "throwing"; }
};

} // namespace

TEST_CASE("rmse evaluates the worked cases") {
    CHECK(rmse({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(rmse({5, 1}, {1, 5}) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(rmse({2}, {3}) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rmse validates its input") {
    CHECK_THROWS_AS(rmse({1, 2}, {1}), DomainError);
    CHECK_THROWS_AS(rmse({}, {}), DomainError);
}

TEST_CASE("rmse symmetry, translation invariance and mse relation") {
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> val(-10.0, 10.0);
    std::uniform_int_distribution<int> len(1, 20);
    for (int trial = 0; trial < 200; trial++) {
        int n = len(rng);
        std::vector<double> o, t, oc, tc;
        double c = val(rng);
        for (int i = 0; i < n; i++) {
            o.push_back(val(rng));
            t.push_back(val(rng));
            oc.push_back(o.back() + c);
            tc.push_back(t.back() + c);
        }
        double r = rmse(o, t);
        CHECK(r == rmse(t, o));
        CHECK(std::abs(rmse(oc, tc) - r) < 1e-9);
        CHECK(std::abs(mse(o, t) - r * r) < 1e-12 * std::max(1.0, r * r));
        CHECK(r >= 0.0);
    }
}

TEST_CASE("rmse is zero only for identical vectors") {
    CHECK(rmse({1.5, 2.5}, {1.5, 2.5}) == 0.0);
    CHECK(rmse({1.5, 2.5}, {1.5, 2.5 + 1e-8}) > 0.0);
}

TEST_CASE("evaluate scores a constant predictor") {
    RatingMatrix test = testsup::make_matrix({{1, 1, 1}, {2, 2, 5}});
    EvalReport report = evaluate(ConstantPredictor(3.0), test);
    CHECK(report.n == 2);
    CHECK(report.rmse == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(report.mse == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(report.coverage == 1.0);
    CHECK(report.fallbacks == 0);
}

TEST_CASE("evaluate on a perfect predictor reports zero error") {
    struct Perfect : RatingPredictor {
        const RatingMatrix& truth;
        explicit Perfect(const RatingMatrix& t) : truth(t) {}
        Prediction predict(std::int64_t u, std::int64_t i) const override {
            Prediction p;
            p.value = *truth.rating(*truth.user_index(u), *truth.item_index(i));
            p.support = 1;
            return p;
        }
        double fallback_value() const override { return 3.0; }
        std::string name() const override { return "perfect"; }
    };
    RatingMatrix test = testsup::example_matrix();
    EvalReport report = evaluate(Perfect(test), test);
    CHECK(report.rmse == 0.0);
    CHECK(report.mse == 0.0);
}

TEST_CASE("evaluate never aborts on predictor failures") {
    RatingMatrix test = testsup::make_matrix({{1, 1, 2}, {2, 2, 3}});
    EvalReport report = evaluate(ThrowingPredictor{}, test);
    CHECK(report.coverage == 0.0);
    CHECK(report.fallbacks == 2);
    // both pairs scored with the fallback value 2.5
    CHECK(report.rmse == doctest::Approx(std::sqrt((0.25 + 0.25) / 2)).epsilon(1e-12));
    CHECK(std::isfinite(report.rmse));
}

TEST_CASE("zero-support predictions count as fallbacks") {
    RatingMatrix test = testsup::make_matrix({{1, 1, 3}, {2, 2, 3}});
    EvalReport report = evaluate(ConstantPredictor(3.0, 0), test);
    CHECK(report.coverage == 0.0);
    CHECK(report.fallbacks == 2);
    CHECK(report.rmse == 0.0);
}

TEST_CASE("evaluate rejects an empty test matrix") {
    CHECK_THROWS_AS(evaluate(ConstantPredictor(3.0), RatingMatrix::from_triples({})),
                    DomainError);
}

TEST_CASE("reports render in text and record form") {
    EvalReport report;
    report.predictor = "user-cf";
    report.n = 10;
    report.rmse = 1.25;
    report.mse = 1.5625;
    report.coverage = 0.9;
    report.fallbacks = 1;

    std::ostringstream text;
    print_report(text, report);
    CHECK(text.str().find("rmse: 1.250000") != std::string::npos);
    CHECK(text.str().find("coverage: 0.900000") != std::string::npos);

    std::ostringstream record;
    print_report_record(record, report);
    CHECK(record.str() ==
          "predictor=user-cf n=10 rmse=1.250000 mse=1.562500 coverage=0.900000 fallbacks=1\n");
}
