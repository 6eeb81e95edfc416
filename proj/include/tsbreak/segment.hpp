#ifndef TSBREAK_SEGMENT_HPP
#define TSBREAK_SEGMENT_HPP

#include "tsbreak/admm.hpp"
#include "tsbreak/core.hpp"

#include <vector>

namespace tsbreak::segment {

/// Original times s with ||W^t||_F > threshold, t >= 2, s = t + K.
/// A break at s means the coefficients change between s - 1 and s.
std::vector<Index> detect_changepoints(const DiffPath& w, double threshold);

/// Same rule applied to precomputed block norms (norms[0] is step 1).
std::vector<Index> detect_changepoints(const std::vector<double>& norms, Index t_offset,
                                       double threshold);

/// OLS refit per segment. Segment i spans [b_i, b_{i+1} - 1] in original time
/// (b_0 = 1, b_{L+1} = N + 1); its regression rows are the targets whose K lags
/// also lie in the segment. Segments with fewer than pK + 1 rows get no
/// coefficients and a warning instead.
std::vector<SegmentFit> refit_segments(const TimeSeries& series,
                                       const std::vector<Index>& breakpoints, Index lag);

/// Refit plus the fused-path plug-in (mean of A^t over each segment).
std::vector<SegmentFit> refit_segments(const TimeSeries& series,
                                       const std::vector<Index>& breakpoints,
                                       const CoefficientPath& fused);

/// Solve, detect, refit.
SegmentationResult segment_series(const TimeSeries& series, const SolverConfig& config,
                                  const admm::SolveOptions& options = {});

}  // namespace tsbreak::segment

#endif  // TSBREAK_SEGMENT_HPP
