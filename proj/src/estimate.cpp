#include "bermudan/estimate.hpp"

#include <cmath>
#include <stdexcept>

namespace bermudan {

BoundEstimate summarize(std::string kind, std::span<const double> samples, std::uint64_t seed) {
    if (samples.empty()) throw std::invalid_argument("cannot summarize an empty sample");
    const double n = static_cast<double>(samples.size());
    double sum = 0.0;
    for (double s : samples) sum += s;
    const double mean = sum / n;
    double ss = 0.0;
    for (double s : samples) ss += (s - mean) * (s - mean);
    const double var = samples.size() > 1 ? ss / (n - 1.0) : 0.0;

    BoundEstimate est;
    est.kind = std::move(kind);
    est.mean = mean;
    est.stderr_ = std::sqrt(var / n);
    est.ci95_halfwidth = 1.96 * est.stderr_;
    est.n_paths = samples.size();
    est.seed = seed;
    return est;
}

double joint_stderr(const BoundEstimate& a, const BoundEstimate& b) {
    return std::sqrt(a.stderr_ * a.stderr_ + b.stderr_ * b.stderr_);
}

}  // namespace bermudan
