#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace bermudan {

/// Monte Carlo estimate of one price bound.
struct BoundEstimate {
    std::string kind;         // "LB", "AB" or "TM"
    double mean = 0.0;
    double stderr_ = 0.0;
    double ci95_halfwidth = 0.0;
    std::size_t n_paths = 0;
    double wall_time_s = 0.0;
    std::uint64_t seed = 0;
};

/// Sample mean and standard error of `samples`, summed in index order.
BoundEstimate summarize(std::string kind, std::span<const double> samples, std::uint64_t seed);

/// sqrt(a.se^2 + b.se^2).
double joint_stderr(const BoundEstimate& a, const BoundEstimate& b);

}  // namespace bermudan
