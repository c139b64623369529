#include "spreader_gnn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "spreader_gnn/error.hpp"

namespace spreader_gnn::metrics {

Confusion confusion(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> truth) {
    if (pred.size() != truth.size()) {
        throw ShapeError("metrics: " + std::to_string(pred.size()) + " predictions vs " +
                         std::to_string(truth.size()) + " labels");
    }
    if (pred.empty()) {
        throw ShapeError("metrics: empty evaluation set");
    }
    Confusion c;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool p = pred[i] != 0;
        const bool t = truth[i] != 0;
        if (p && t) {
            ++c.tp;
        } else if (!p && !t) {
            ++c.tn;
        } else if (p) {
            ++c.fp;
        } else {
            ++c.fn;
        }
    }
    return c;
}

double accuracy(const Confusion& c) {
    if (c.total() == 0) {
        throw ShapeError("metrics: empty confusion matrix");
    }
    return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

double accuracy(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> truth) {
    return accuracy(confusion(pred, truth));
}

double mcc(const Confusion& c) {
    const auto tp = static_cast<double>(c.tp);
    const auto tn = static_cast<double>(c.tn);
    const auto fp = static_cast<double>(c.fp);
    const auto fn = static_cast<double>(c.fn);
    const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    if (denom == 0.0) {
        return 0.0;
    }
    return (tp * tn - fp * fn) / std::sqrt(denom);
}

std::optional<double> roc_auc(std::span<const double> scores, std::span<const std::uint8_t> truth) {
    if (scores.size() != truth.size()) {
        throw ShapeError("roc_auc: " + std::to_string(scores.size()) + " scores vs " + std::to_string(truth.size()) +
                         " labels");
    }
    const std::size_t n = scores.size();
    const auto n_pos = static_cast<std::size_t>(std::count_if(truth.begin(), truth.end(), [](auto t) { return t != 0; }));
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        return std::nullopt;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&scores](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Ranks are 1-based; a tie group spanning ranks [i+1, j] gets (i+1+j)/2.
    // Doubled ranks keep the sum integral.
    std::size_t doubled_rank_sum = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) {
            ++j;
        }
        const std::size_t doubled_rank = (i + 1) + j;
        for (std::size_t q = i; q < j; ++q) {
            if (truth[order[q]] != 0) {
                doubled_rank_sum += doubled_rank;
            }
        }
        i = j;
    }
    // U = R_pos - n_pos (n_pos + 1) / 2, all doubled.
    const std::size_t doubled_u = doubled_rank_sum - n_pos * (n_pos + 1);
    return static_cast<double>(doubled_u) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

MetricsRecord evaluate_scores(std::span<const double> scores, std::span<const std::uint8_t> truth, double threshold) {
    std::vector<std::uint8_t> pred(scores.size());
    std::transform(scores.begin(), scores.end(), pred.begin(),
                   [threshold](double s) { return static_cast<std::uint8_t>(s >= threshold ? 1 : 0); });
    MetricsRecord rec;
    rec.confusion = confusion(pred, truth);
    rec.accuracy = accuracy(rec.confusion);
    rec.mcc = mcc(rec.confusion);
    rec.roc_auc = roc_auc(scores, truth);
    return rec;
}

}  // namespace spreader_gnn::metrics
