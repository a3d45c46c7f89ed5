#include "depcag/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace depcag {

namespace {

std::string format_time(double t) {
    std::ostringstream os;
    os << t;
    return os.str();
}

} // namespace

Grid::Grid(std::vector<double> nodes, std::vector<double> xi)
    : nodes_(std::move(nodes)), xi_(std::move(xi)) {
    if (nodes_.size() < 2) {
        raise(ErrorCode::ValidationError, "grid needs at least two nodes");
    }
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
        if (!(nodes_[i] < nodes_[i + 1])) {
            raise(ErrorCode::ValidationError,
                  "grid nodes must be strictly increasing at index " + std::to_string(i));
        }
    }
    if (xi_.size() != nodes_.size() - 1) {
        raise(ErrorCode::ValidationError, "xi count must equal interval count");
    }
    delayed_ = true;
    for (std::size_t n = 0; n < xi_.size(); ++n) {
        if (xi_[n] < nodes_[n] || xi_[n] > nodes_[n + 1]) {
            raise(ErrorCode::ValidationError,
                  "xi_" + std::to_string(n) + " lies outside its interval");
        }
        if (xi_[n] != nodes_[n]) delayed_ = false;
    }
}

Grid Grid::uniform(double start, double step, std::size_t node_count) {
    if (!(step > 0.0)) raise(ErrorCode::ValidationError, "uniform grid step must be positive");
    if (node_count < 2) raise(ErrorCode::ValidationError, "uniform grid needs at least two nodes");
    std::vector<double> nodes(node_count);
    for (std::size_t i = 0; i < node_count; ++i) nodes[i] = start + step * static_cast<double>(i);
    return from_nodes(std::move(nodes));
}

Grid Grid::from_nodes(std::vector<double> nodes) {
    std::vector<double> xi(nodes.empty() ? 0 : nodes.size() - 1);
    for (std::size_t n = 0; n + 1 < nodes.size(); ++n) xi[n] = nodes[n];
    return Grid(std::move(nodes), std::move(xi));
}

Grid Grid::from_nodes(std::vector<double> nodes, std::vector<double> xi) {
    return Grid(std::move(nodes), std::move(xi));
}

std::size_t Grid::locate_interval(double t) const {
    if (!(t >= nodes_.front()) || !(t < nodes_.back())) {
        raise(ErrorCode::OutOfDomain,
              "t=" + format_time(t) + " outside [" + format_time(nodes_.front()) + ", " +
                  format_time(nodes_.back()) + ")");
    }
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
    return static_cast<std::size_t>(it - nodes_.begin()) - 1;
}

std::size_t Grid::locate_closure(double t) const {
    if (t == nodes_.back()) return nodes_.size() - 2;
    return locate_interval(t);
}

std::size_t Grid::common_interval(double s, double t) const {
    const double lo = std::min(s, t);
    const double hi = std::max(s, t);
    if (!contains(lo) || !contains(hi)) {
        raise(ErrorCode::OutOfDomain, "arguments outside the grid domain");
    }
    const std::size_t n = (lo == nodes_.back()) ? nodes_.size() - 2 : locate_interval(lo);
    if (hi > nodes_[n + 1]) {
        raise(ErrorCode::DomainError,
              "s=" + format_time(s) + " and t=" + format_time(t) +
                  " do not share a grid interval");
    }
    return n;
}

DeviatingArgument DeviatingArgument::identity() {
    return DeviatingArgument{[](double t) { return t; }};
}

DeviatingArgument DeviatingArgument::piecewise_constant(const Grid& grid) {
    return DeviatingArgument{[grid](double t) { return grid.gamma(t); }};
}

DeviationReport validate_deviating(const Grid& grid, const DeviatingArgument& g,
                                   std::size_t samples_per_interval) {
    if (samples_per_interval < 2) {
        raise(ErrorCode::ValidationError, "need at least two samples per interval");
    }
    DeviationReport report;
    for (std::size_t n = 0; n < grid.interval_count(); ++n) {
        const double a = grid.node(n);
        const double b = grid.node(n + 1);
        // Samples cover [t_n, t_{n+1}) up to the last representable point below b.
        const double h = (b - a) / static_cast<double>(samples_per_interval);
        for (std::size_t i = 0; i < samples_per_interval; ++i) {
            const double s = a + h * static_cast<double>(i);
            const double image = g.g(s);
            if (image < a || image >= b) {
                report.pass = false;
                report.violations.push_back({n, s, image});
                break;
            }
        }
    }
    return report;
}

} // namespace depcag
