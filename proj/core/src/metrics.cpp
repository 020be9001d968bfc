#include "cpsem/metrics.hpp"

#include "cpsem/csv.hpp"
#include "cpsem/errors.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

namespace cpsem {

namespace {

// Type-7 quantile of already sorted data.
double sorted_quantile(const std::vector<double>& sorted, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("quantile: probability outside [0, 1]");
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::vector<double> quantile_summary(std::span<const double> values, std::span<const double> probs) {
    if (values.empty()) throw EmptyInput("quantile_summary: no values");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> out;
    out.reserve(probs.size());
    for (double p : probs) out.push_back(sorted_quantile(sorted, p));
    return out;
}

double quantile(std::span<const double> values, double p) {
    const double probs[] = {p};
    return quantile_summary(values, probs).front();
}

ReconstructionSummary summarize_reconstruction(std::span<const Trajectory> samples, const Trajectory& truth,
                                               int t_begin) {
    if (samples.size() < 2) throw InvalidArgument("summarize_reconstruction: need at least 2 samples");
    const int horizon = truth.horizon();
    if (horizon < 0) throw EmptyInput("summarize_reconstruction: empty truth");
    if (t_begin < 0 || t_begin > horizon) throw InvalidArgument("summarize_reconstruction: t_begin out of range");
    const auto dim = truth.states.front().size();
    for (const auto& s : samples) {
        if (s.horizon() != horizon) throw LengthMismatch("summarize_reconstruction: sample length differs from truth");
        for (const auto& x : s.states) {
            if (x.size() != dim) throw LengthMismatch("summarize_reconstruction: state dimension differs");
        }
    }

    const std::size_t len = static_cast<std::size_t>(horizon - t_begin) + 1;
    const auto d = static_cast<std::size_t>(dim);
    ReconstructionSummary out;
    out.t_begin = t_begin;
    out.mean.assign(len, std::vector<double>(d));
    out.lo.assign(len, std::vector<double>(d));
    out.hi.assign(len, std::vector<double>(d));
    out.truth.assign(len, std::vector<double>(d));
    out.rmse.assign(d, 0.0);
    out.cp.assign(d, 0.0);

    std::vector<double> column(samples.size());
    for (std::size_t k = 0; k < len; ++k) {
        const std::size_t t = k + static_cast<std::size_t>(t_begin);
        for (std::size_t c = 0; c < d; ++c) {
            double sum = 0.0;
            for (std::size_t j = 0; j < samples.size(); ++j) {
                column[j] = samples[j].states[t](static_cast<Eigen::Index>(c));
                sum += column[j];
            }
            std::sort(column.begin(), column.end());
            const double truth_v = truth.states[t](static_cast<Eigen::Index>(c));
            // A strongly skewed column can put its mean outside the band; clamp it
            // so lo <= mean <= hi holds in every cell.
            const double lo = sorted_quantile(column, 0.025);
            const double hi = sorted_quantile(column, 0.975);
            const double mean = std::clamp(sum / static_cast<double>(samples.size()), lo, hi);
            out.mean[k][c] = mean;
            out.lo[k][c] = lo;
            out.hi[k][c] = hi;
            out.truth[k][c] = truth_v;
            out.rmse[c] += (mean - truth_v) * (mean - truth_v);
            if (truth_v >= lo && truth_v <= hi) out.cp[c] += 1.0;
        }
    }
    for (std::size_t c = 0; c < d; ++c) {
        out.rmse[c] = std::sqrt(out.rmse[c] / static_cast<double>(len));
        out.cp[c] /= static_cast<double>(len);
    }
    return out;
}

void write_reconstruction_csv(std::ostream& out, const ReconstructionSummary& s) {
    out << "t,component,mean,lo,hi,truth\n";
    for (int k = 0; k < s.length(); ++k) {
        const auto uk = static_cast<std::size_t>(k);
        for (int c = 0; c < s.dim(); ++c) {
            const auto uc = static_cast<std::size_t>(c);
            CsvRow row;
            row << (s.t_begin + k) << (c + 1) << s.mean[uk][uc] << s.lo[uk][uc] << s.hi[uk][uc] << s.truth[uk][uc];
            out << row.str() << '\n';
        }
    }
}

}  // namespace cpsem
