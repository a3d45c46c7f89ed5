#include "depcag/trace.hpp"

#include <algorithm>
#include <cstdio>

namespace depcag {

Vector SolutionTrace::value_at(double t) const {
    if (times.empty()) raise(ErrorCode::OutOfDomain, "empty trace");
    if (t < times.front() || t > times.back()) {
        raise(ErrorCode::OutOfDomain, "time outside the traced range");
    }
    auto it = std::lower_bound(times.begin(), times.end(), t);
    const auto i = static_cast<std::size_t>(it - times.begin());
    if (i < times.size() && times[i] == t) return values[i];
    const double t0 = times[i - 1];
    const double t1 = times[i];
    const double w = (t - t0) / (t1 - t0);
    return (1.0 - w) * values[i - 1] + w * values[i];
}

void SolutionTrace::write_csv(std::ostream& os) const {
    const Eigen::Index n = values.empty() ? 0 : values.front().size();
    os << "t,interval";
    for (Eigen::Index j = 0; j < n; ++j) {
        os << ",re_" << j << ",im_" << j;
    }
    os << "\n";
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        os << buf;
    };
    for (std::size_t i = 0; i < times.size(); ++i) {
        put(times[i]);
        os << "," << intervals[i];
        for (Eigen::Index j = 0; j < n; ++j) {
            os << ",";
            put(values[i](j).real());
            os << ",";
            put(values[i](j).imag());
        }
        os << "\n";
    }
}

} // namespace depcag
