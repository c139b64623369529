#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

namespace spreader_gnn::metrics {

struct Confusion {
    std::size_t tp = 0;
    std::size_t tn = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    std::size_t total() const noexcept { return tp + tn + fp + fn; }
    friend bool operator==(const Confusion&, const Confusion&) = default;
};

struct MetricsRecord {
    double accuracy = 0.0;
    double mcc = 0.0;
    // Empty when the evaluated set holds a single class.
    std::optional<double> roc_auc;
    Confusion confusion;
};

// Predictions and truth are 0/1 and of equal, non-zero length (ShapeError
// otherwise).
Confusion confusion(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> truth);

double accuracy(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> truth);
double accuracy(const Confusion& c);

// Matthews correlation; 0 when any marginal is empty.
double mcc(const Confusion& c);

// Mann-Whitney AUC with ties credited 1/2, via average ranks in O(n log n).
// Empty if either class is absent.
std::optional<double> roc_auc(std::span<const double> scores, std::span<const std::uint8_t> truth);

// Scores are probabilities; score >= threshold predicts the positive class.
MetricsRecord evaluate_scores(std::span<const double> scores, std::span<const std::uint8_t> truth,
                              double threshold = 0.5);

}  // namespace spreader_gnn::metrics
