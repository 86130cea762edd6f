#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "iabplace/environment.hpp"

namespace iabplace {

/// Dense zero-initialised action-value table, one row per grid cell.
class QTable {
public:
    using Row = std::array<double, kActionCount>;

    QTable() = default;
    explicit QTable(const GridSpec& spec);

    std::size_t state_count() const { return rows_.size(); }
    int nx() const { return nx_; }
    int ny() const { return ny_; }

    std::size_t index(const Cell& c) const { return static_cast<std::size_t>(c.y) * nx_ + c.x; }

    const Row& row(const Cell& c) const { return rows_.at(index(c)); }
    Row& row(const Cell& c) { return rows_.at(index(c)); }
    double& at(const Cell& c, Action a) { return row(c)[static_cast<std::size_t>(a)]; }
    double at(const Cell& c, Action a) const { return row(c)[static_cast<std::size_t>(a)]; }

    double max_value(const Cell& c) const;

    std::span<const Row> rows() const { return rows_; }
    std::span<Row> rows() { return rows_; }

    friend bool operator==(const QTable&, const QTable&) = default;

private:
    int nx_ = 0;
    int ny_ = 0;
    std::vector<Row> rows_;
};

/// Q(s,a) <- (1 - mu) Q(s,a) + mu (r + gamma max_a' Q(s',a'))
void q_update(QTable& table, const Cell& s, Action a, double r, const Cell& s_next, double mu,
              double gamma);

}  // namespace iabplace
