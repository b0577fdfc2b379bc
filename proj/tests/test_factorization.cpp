#include "doctest.h"

#include "recsys/errors.hpp"
#include "recsys/factorization.hpp"
#include "support/fixtures.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace recsys;

namespace {

RatingMatrix rank1_matrix() {
    // [[1,2],[2,4]] factors exactly as [1,2]^T [1,2]
    return testsup::make_matrix({{1, 1, 1}, {1, 2, 2}, {2, 1, 2}, {2, 2, 4}});
}

SgdConfig rank1_config() {
    SgdConfig cfg;
    cfg.k = 1;
    cfg.epochs = 500;
    cfg.learning_rate = 0.05;
    cfg.lambda = 0.0;
    cfg.seed = 7;
    return cfg;
}

} // namespace

TEST_CASE("sgd recovers an exactly factorable rank-1 matrix") {
    FactorModel m = train_factors(rank1_matrix(), rank1_config());
    REQUIRE_FALSE(m.sse_trace().empty());
    CHECK(m.sse_trace().back() < 1e-3);
}

TEST_CASE("training validates its configuration") {
    SgdConfig cfg = rank1_config();
    cfg.epochs = 0;
    CHECK_THROWS_AS(train_factors(rank1_matrix(), cfg), DomainError);
    cfg = rank1_config();
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(train_factors(rank1_matrix(), cfg), DomainError);
    cfg = rank1_config();
    cfg.k = 0;
    CHECK_THROWS_AS(train_factors(rank1_matrix(), cfg), DomainError);
    CHECK_THROWS_AS(train_factors(RatingMatrix::from_triples({}), rank1_config()),
                    DomainError);
}

TEST_CASE("training is bit-deterministic under a fixed seed") {
    std::mt19937_64 rng(73);
    RatingMatrix train = testsup::random_matrix(rng, 10, 12, 0.4);
    SgdConfig cfg;
    cfg.k = 4;
    cfg.epochs = 10;
    cfg.seed = 99;
    FactorModel a = train_factors(train, cfg);
    FactorModel b = train_factors(train, cfg);
    CHECK(a.p() == b.p());
    CHECK(a.q() == b.q());
    CHECK(a.sse_trace() == b.sse_trace());
}

TEST_CASE("prediction is the factor dot product") {
    RatingMatrix train = testsup::make_matrix({{1, 1, 3}});
    SgdConfig cfg;
    cfg.k = 3;
    FactorModel m = make_factor_model(train, cfg);
    auto p = m.user_factors_mut(0);
    auto q = m.item_factors_mut(0);
    p[0] = 2;
    p[1] = 1;
    p[2] = 1;
    q[0] = 1;
    q[1] = 0;
    q[2] = 2;
    CHECK(m.raw(0, 0) == 4.0);
    CHECK(m.predict(1, 1).value == 4.0);
    CHECK(m.predict(1, 1).support == 3);

    SUBCASE("zero item factors annihilate") {
        q[0] = q[1] = q[2] = 0;
        CHECK(m.raw(0, 0) == 0.0);
        CHECK(m.predict(1, 1).value == 1.0); // clamped for rating output
    }
    SUBCASE("k=1 passes the scalar product through") {
        SgdConfig c1;
        c1.k = 1;
        FactorModel s = make_factor_model(train, c1);
        s.user_factors_mut(0)[0] = 3.7;
        s.item_factors_mut(0)[0] = 1.0;
        CHECK(s.raw(0, 0) == 3.7);
    }
}

TEST_CASE("prediction rejects unknown ids and bad indices") {
    FactorModel m = train_factors(rank1_matrix(), rank1_config());
    CHECK_THROWS_AS(m.predict(99, 1), DomainError);
    CHECK_THROWS_AS(m.predict(1, 99), DomainError);
    CHECK_THROWS_AS(m.raw(-1, 0), DomainError);
    CHECK_THROWS_AS(m.raw(0, 5), DomainError);
}

TEST_CASE("sgd update direction equals the negative objective gradient") {
    // 3x3 instance; the objective is the sum of squared reconstruction
    // errors, so the accumulated unit-rate update must equal -1/2 of its
    // gradient, checked against central finite differences.
    RatingMatrix train = testsup::make_matrix({
        {1, 1, 4}, {1, 2, 2}, {1, 3, 5},
        {2, 1, 1}, {2, 2, 3},
        {3, 2, 5}, {3, 3, 2},
    });
    SgdConfig cfg;
    cfg.k = 2;
    cfg.seed = 5;
    FactorModel base = make_factor_model(train, cfg);

    // accumulated per-entry update deltas at learning rate 1
    std::vector<double> dp(base.p().size(), 0.0), dq(base.q().size(), 0.0);
    for (const auto& e : train.entries()) {
        std::vector<double> prow(base.user_factors(e.user).begin(),
                                 base.user_factors(e.user).end());
        std::vector<double> qrow(base.item_factors(e.item).begin(),
                                 base.item_factors(e.item).end());
        std::vector<double> p2 = prow, q2 = qrow;
        detail::sgd_update(p2, q2, e.rating, 1.0, 0.0);
        for (int d = 0; d < cfg.k; d++) {
            dp[e.user * cfg.k + d] += p2[d] - prow[d];
            dq[e.item * cfg.k + d] += q2[d] - qrow[d];
        }
    }

    // central finite differences of the SSE
    const double h = 1e-5;
    auto fd_check = [&](bool user_side, int row, int d, double delta) {
        FactorModel plus = base, minus = base;
        auto bump = [&](FactorModel& m, double eps) {
            auto span = user_side ? m.user_factors_mut(row) : m.item_factors_mut(row);
            span[d] += eps;
        };
        bump(plus, h);
        bump(minus, -h);
        double grad = (factor_sse(plus, train) - factor_sse(minus, train)) / (2 * h);
        double expected = -0.5 * grad;
        CHECK(std::abs(delta - expected) <= 1e-6 * std::max(1e-3, std::abs(expected)));
    };
    for (int u = 0; u < train.n_users(); u++) {
        for (int d = 0; d < cfg.k; d++) fd_check(true, u, d, dp[u * cfg.k + d]);
    }
    for (int i = 0; i < train.n_items(); i++) {
        for (int d = 0; d < cfg.k; d++) fd_check(false, i, d, dq[i * cfg.k + d]);
    }
}

TEST_CASE("per-epoch training SSE is essentially non-increasing") {
    std::mt19937_64 rng(79);
    for (int trial = 0; trial < 5; trial++) {
        std::vector<std::tuple<std::int64_t, std::int64_t, double>> cells;
        std::uniform_int_distribution<int> stars(1, 5);
        for (std::int64_t u = 1; u <= 4; u++) {
            for (std::int64_t i = 1; i <= 4; i++) cells.push_back({u, i, stars(rng)});
        }
        SgdConfig cfg;
        cfg.k = 2;
        cfg.epochs = 200;
        cfg.learning_rate = 0.005;
        cfg.seed = rng();
        FactorModel m = train_factors(testsup::make_matrix(cells), cfg);
        const auto& trace = m.sse_trace();
        REQUIRE(trace.size() == 200);
        int increases = 0;
        for (std::size_t e = 1; e < trace.size(); e++) {
            if (trace[e] > trace[e - 1] * (1 + 1e-12)) increases++;
        }
        CHECK(increases <= 2); // <= 1% transient increases
    }
}

TEST_CASE("divergent training reports the failing epoch") {
    SgdConfig cfg;
    cfg.k = 2;
    cfg.epochs = 50;
    cfg.learning_rate = 10.0;
    std::mt19937_64 rng(83);
    RatingMatrix train = testsup::random_matrix(rng, 6, 6, 0.8);
    CHECK_THROWS_WITH_AS(train_factors(train, cfg), doctest::Contains("epoch"),
                         TrainingError);
}

TEST_CASE("sweep_k produces one row per k and propagates errors") {
    std::mt19937_64 rng(89);
    RatingMatrix m = testsup::random_matrix(rng, 12, 12, 0.6);
    auto [train, test] = holdout_split(m, 0.25, 3);
    SgdConfig cfg;
    cfg.epochs = 5;
    auto rows = sweep_k(train, test, {3}, cfg);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].k == 3);
    CHECK(std::isfinite(rows[0].rmse));

    CHECK_THROWS_AS(sweep_k(train, test, {}, cfg), DomainError);

    SgdConfig bad = cfg;
    bad.learning_rate = 10.0;
    bad.epochs = 50;
    CHECK_THROWS_WITH_AS(sweep_k(train, test, {4}, bad), doctest::Contains("k=4"),
                         TrainingError);
}

TEST_CASE("factor models round-trip bit-exactly through serialization") {
    std::mt19937_64 rng(97);
    RatingMatrix train = testsup::random_matrix(rng, 9, 7, 0.5);
    SgdConfig cfg;
    cfg.k = 3;
    cfg.epochs = 8;
    cfg.lambda = 0.02;
    cfg.seed = 1234;
    FactorModel m = train_factors(train, cfg);

    std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
    save_factor_model(buf, m);
    FactorModel back = load_factor_model(buf);

    CHECK(back.p() == m.p());
    CHECK(back.q() == m.q());
    CHECK(back.sse_trace() == m.sse_trace());
    CHECK(back.n_users() == m.n_users());
    CHECK(back.n_items() == m.n_items());
    CHECK(back.k() == m.k());
    CHECK(back.config().seed == cfg.seed);
    CHECK(back.config().lambda == cfg.lambda);
    CHECK(back.train_global_mean() == m.train_global_mean());
    CHECK(back.user_ids() == m.user_ids());
    CHECK(back.item_ids() == m.item_ids());
    // loaded models predict by id exactly like the original
    CHECK(back.predict(m.user_ids()[0], m.item_ids()[0]).value ==
          m.predict(m.user_ids()[0], m.item_ids()[0]).value);

    std::istringstream junk("not a model");
    CHECK_THROWS_AS(load_factor_model(junk), ParseError);
}
