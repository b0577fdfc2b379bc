#include "recsys/evaluation.hpp"
#include "recsys/errors.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace recsys {

double mse(const std::vector<double>& predictions, const std::vector<double>& truths) {
    if (predictions.size() != truths.size()) {
        throw DomainError("prediction/truth length mismatch: " +
                          std::to_string(predictions.size()) + " vs " +
                          std::to_string(truths.size()));
    }
    if (predictions.empty()) {
        throw DomainError("cannot compute error over zero pairs");
    }
    double sum = 0;
    for (std::size_t i = 0; i < predictions.size(); i++) {
        double d = predictions[i] - truths[i];
        sum += d * d;
    }
    return sum / static_cast<double>(predictions.size());
}

double rmse(const std::vector<double>& predictions, const std::vector<double>& truths) {
    return std::sqrt(mse(predictions, truths));
}

EvalReport evaluate(const RatingPredictor& predictor, const RatingMatrix& test) {
    if (test.size() == 0) {
        throw DomainError("test matrix is empty");
    }
    std::vector<double> predicted;
    std::vector<double> truth;
    predicted.reserve(test.size());
    truth.reserve(test.size());

    std::size_t fallbacks = 0;
    for (const auto& e : test.entries()) {
        std::int64_t user_id = test.user_id(e.user);
        std::int64_t item_id = test.item_id(e.item);
        double value;
        int support;
        try {
            Prediction p = predictor.predict(user_id, item_id);
            value = p.value;
            support = p.support;
        } catch (const std::exception&) {
            value = predictor.fallback_value();
            support = 0;
        }
        if (support == 0) fallbacks++;
        predicted.push_back(value);
        truth.push_back(e.rating);
    }

    EvalReport report;
    report.predictor = predictor.name();
    report.n = test.size();
    report.mse = mse(predicted, truth);
    report.rmse = std::sqrt(report.mse);
    report.fallbacks = fallbacks;
    report.coverage =
        1.0 - static_cast<double>(fallbacks) / static_cast<double>(report.n);
    return report;
}

void print_report(std::ostream& out, const EvalReport& report) {
    out << std::fixed << std::setprecision(6);
    out << "predictor: " << report.predictor << "\n"
        << "test pairs: " << report.n << "\n"
        << "rmse: " << report.rmse << "\n"
        << "mse: " << report.mse << "\n"
        << "coverage: " << report.coverage << " (fallbacks: " << report.fallbacks << ")\n";
    out.unsetf(std::ios::floatfield);
}

void print_report_record(std::ostream& out, const EvalReport& report) {
    out << std::fixed << std::setprecision(6);
    out << "predictor=" << report.predictor << " n=" << report.n << " rmse=" << report.rmse
        << " mse=" << report.mse << " coverage=" << report.coverage
        << " fallbacks=" << report.fallbacks << "\n";
    out.unsetf(std::ios::floatfield);
}

} // namespace recsys
