#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lse/error.hpp"
#include "lse/metrics.hpp"
#include "lse/rng.hpp"
#include "support/oracles.hpp"

using namespace lse;

TEST_CASE("r2 on hand-checked cases") {
    CHECK(r2({1, 2, 3}, {1, 2, 3}) == 1.0);
    CHECK(r2({1, 2, 3}, {2, 2, 2}) == doctest::Approx(0.0));
    CHECK(r2({1, 2, 3}, {5, -1, 7}) < 0.0);
    CHECK_THROWS_WITH_AS(r2({2, 2, 2}, {1, 2, 3}), doctest::Contains("constant"), Error);
}

TEST_CASE("mape excludes near-zero denominators and reports them") {
    CHECK(mape({100, 200}, {110, 180}) == doctest::Approx(10.0));
    CHECK(mape({5, 5}, {5, 5}) == 0.0);

    const MapeDetail detail = mape_detail({0, 100}, {5, 100});
    CHECK(detail.value == 0.0);
    CHECK(detail.excluded_count == 1);

    CHECK_THROWS_WITH_AS(mape({0, 0}, {1, 1}), doctest::Contains("excluded"), Error);
}

TEST_CASE("classification metrics on a hand confusion matrix") {
    const ClassificationMetrics all = classification_metrics({0, 1, 2}, {0, 1, 2}, 3);
    CHECK(all.accuracy == 100.0);
    CHECK(all.precision == 100.0);
    CHECK(all.recall == 100.0);

    const ClassificationMetrics m = classification_metrics({0, 0, 1, 1}, {0, 1, 1, 1}, 2);
    CHECK(m.accuracy == doctest::Approx(75.0));
    CHECK(m.precision == doctest::Approx(100.0 * (1.0 + 2.0 / 3.0) / 2.0));
    CHECK(m.recall == doctest::Approx(75.0));
    CHECK(m.confusion[0][1] == 1);

    // Class 2 never predicted: its precision term is 0 by the 0/0 guard.
    const ClassificationMetrics guard = classification_metrics({0, 2}, {0, 0}, 3);
    CHECK(guard.precision == doctest::Approx(100.0 * 0.5 / 3.0));

    CHECK_THROWS_AS(classification_metrics({0, 3}, {0, 0}, 3), Error);
}

TEST_CASE("reconstruction_report on hand-checked grids") {
    Matrix truth = Matrix::from_rows({{1.0, 2.0}, {1.0, 2.0}});
    CHECK(reconstruction_report(truth, truth).representation_error == 0.0);
    CHECK(reconstruction_report(truth, truth).correct_rate == 100.0);

    Matrix hat = truth;
    hat(0, 0) = 1.10;  // one cell 10% off
    const ReconstructionReport report = reconstruction_report(truth, hat);
    CHECK(report.representation_error == doctest::Approx(2.5));
    CHECK(report.correct_rate == doctest::Approx(75.0));
    CHECK(report.excluded_cell_count == 0);

    Matrix with_zero_feature = Matrix::from_rows({{0.0, 1.0}, {0.0, 1.0}});
    const ReconstructionReport excluded = reconstruction_report(with_zero_feature, with_zero_feature);
    CHECK(excluded.excluded_cell_count == 2);
    CHECK(std::isnan(excluded.per_feature_mape[0]));
    CHECK(excluded.correct_rate == 100.0);
}

TEST_CASE("metrics are invariant under simultaneous permutation") {
    Rng rng(404);
    std::vector<double> y(30), yhat(30);
    for (auto* v : {&y, &yhat})
        for (double& x : *v) x = 5.0 + rng.normal();
    const double base_r2 = r2(y, yhat);
    const double base_mape = mape(y, yhat);

    const std::vector<std::size_t> perm = rng.permutation(30);
    std::vector<double> yp(30), yhatp(30);
    for (std::size_t i = 0; i < 30; ++i) {
        yp[i] = y[perm[i]];
        yhatp[i] = yhat[perm[i]];
    }
    CHECK(r2(yp, yhatp) == doctest::Approx(base_r2).epsilon(1e-12));
    CHECK(mape(yp, yhatp) == doctest::Approx(base_mape).epsilon(1e-12));
}

TEST_CASE("r2 of the mean prediction is exactly zero") {
    std::vector<double> y{3, 7, 11, 19};
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= 4.0;
    CHECK(r2(y, {mean, mean, mean, mean}) == 0.0);
}

TEST_CASE("accuracy equals macro recall on balanced fixtures") {
    Rng rng(11);
    std::vector<int> truth, pred;
    for (int c = 0; c < 4; ++c)
        for (int i = 0; i < 25; ++i) {
            truth.push_back(c);
            pred.push_back(static_cast<int>(rng.below(4)));
        }
    const ClassificationMetrics m = classification_metrics(truth, pred, 4);
    CHECK(m.accuracy == doctest::Approx(m.recall).epsilon(1e-12));
}

TEST_CASE("every metric matches its naive oracle on random fixtures") {
    Rng rng(2025);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 5 + rng.below(40);

        std::vector<double> y(n), yhat(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = rng.normal() * 3.0 + 1.0;
            yhat[i] = y[i] + 0.5 * rng.normal();
        }
        CHECK(std::abs(r2(y, yhat) - oracles::naive_r2(y, yhat)) < 1e-12);
        CHECK(std::abs(mape(y, yhat) - oracles::naive_mape(y, yhat)) < 1e-12);

        const std::size_t k = 2 + rng.below(5);
        std::vector<int> truth(n), pred(n);
        for (std::size_t i = 0; i < n; ++i) {
            truth[i] = static_cast<int>(rng.below(k));
            pred[i] = static_cast<int>(rng.below(k));
        }
        const ClassificationMetrics cm = classification_metrics(truth, pred, k);
        const oracles::NaiveClassification nc = oracles::naive_classification(truth, pred, k);
        CHECK(std::abs(cm.accuracy - nc.accuracy) < 1e-12);
        CHECK(std::abs(cm.precision - nc.precision) < 1e-12);
        CHECK(std::abs(cm.recall - nc.recall) < 1e-12);

        const std::size_t d = 1 + rng.below(6);
        Matrix xt(n, d), xh(n, d);
        for (std::size_t i = 0; i < xt.size(); ++i) {
            xt.values()[i] = rng.uniform();
            xh.values()[i] = xt.values()[i] + 0.05 * rng.normal();
        }
        const ReconstructionReport rr = reconstruction_report(xt, xh);
        const oracles::NaiveRecon nr = oracles::naive_reconstruction(xt, xh);
        CHECK(std::abs(rr.representation_error - nr.representation_error) < 1e-12);
        CHECK(std::abs(rr.correct_rate - nr.correct_rate) < 1e-12);
        CHECK(rr.excluded_cell_count == nr.excluded);
    }
}
