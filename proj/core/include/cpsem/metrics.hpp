#pragma once

#include "cpsem/types.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace cpsem {

/// Empirical quantiles with linear interpolation between order statistics
/// (h = (n-1)p). Throws EmptyInput on an empty sample, InvalidArgument for
/// p outside [0, 1].
std::vector<double> quantile_summary(std::span<const double> values, std::span<const double> probs);
double quantile(std::span<const double> values, double p);

struct ReconstructionSummary {
    int t_begin = 1;  ///< first scored time index
    /// Indexed [t - t_begin][component].
    std::vector<std::vector<double>> mean;
    std::vector<std::vector<double>> lo;
    std::vector<std::vector<double>> hi;
    std::vector<std::vector<double>> truth;
    std::vector<double> rmse;  ///< per component
    std::vector<double> cp;    ///< per component, fraction in [0, 1]

    int dim() const { return static_cast<int>(rmse.size()); }
    int length() const { return static_cast<int>(mean.size()); }
};

/// Per-cell sample mean and empirical 2.5% / 97.5% band of the samples;
/// RMSE of the mean against the truth and coverage of the band (inclusive),
/// both over t = t_begin..T. The default skips the unobserved x_0.
/// Throws InvalidArgument for fewer than 2 samples, LengthMismatch on
/// differing lengths or dimensions.
ReconstructionSummary summarize_reconstruction(std::span<const Trajectory> samples, const Trajectory& truth,
                                               int t_begin = 1);

/// Rows `t,component,mean,lo,hi,truth` (component is 1-based).
void write_reconstruction_csv(std::ostream& out, const ReconstructionSummary& summary);

}  // namespace cpsem
