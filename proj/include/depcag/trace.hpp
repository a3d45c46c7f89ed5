#pragma once

#include <cstddef>
#include <ostream>
#include <vector>

#include "depcag/linear_system.hpp"

namespace depcag {

/// Sampled solution values on an increasing time grid with interval metadata.
struct SolutionTrace {
    std::vector<double> times;
    std::vector<Vector> values;
    std::vector<std::size_t> intervals;

    std::size_t size() const { return times.size(); }

    /// Value at time t by linear interpolation between samples;
    /// OutOfDomain outside the sampled range.
    Vector value_at(double t) const;

    /// CSV with header: t, interval, re_0, im_0, ..., re_{N-1}, im_{N-1}.
    /// Floating values printed with 12 significant digits.
    void write_csv(std::ostream& os) const;
};

} // namespace depcag
