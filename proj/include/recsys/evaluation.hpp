#pragma once

#include "recsys/dataset.hpp"
#include "recsys/predictor.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace recsys {

/// Holdout metrics for one predictor.
struct EvalReport {
    std::string predictor;
    std::size_t n = 0;        // scored test pairs
    double rmse = 0.0;
    double mse = 0.0;
    double coverage = 0.0;    // fraction scored without fallback
    std::size_t fallbacks = 0;
};

/// Root mean squared error between predictions and truths.
double rmse(const std::vector<double>& predictions, const std::vector<double>& truths);

/// Mean squared error between predictions and truths.
double mse(const std::vector<double>& predictions, const std::vector<double>& truths);

/// Scores every test entry in stored order. A prediction with support 0,
/// or a predictor error (scored with the predictor's fallback value),
/// counts as a fallback; the run never aborts on a single pair.
EvalReport evaluate(const RatingPredictor& predictor, const RatingMatrix& test);

/// Human-readable report block.
void print_report(std::ostream& out, const EvalReport& report);
/// Single-line key=value record.
void print_report_record(std::ostream& out, const EvalReport& report);

} // namespace recsys
