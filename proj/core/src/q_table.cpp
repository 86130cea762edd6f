#include "iabplace/agent/q_table.hpp"

#include <algorithm>

namespace iabplace {

QTable::QTable(const GridSpec& spec)
    : nx_(spec.nx), ny_(spec.ny), rows_(spec.cell_count(), Row{}) {}

double QTable::max_value(const Cell& c) const {
    const Row& r = row(c);
    return *std::max_element(r.begin(), r.end());
}

void q_update(QTable& table, const Cell& s, Action a, double r, const Cell& s_next, double mu,
              double gamma) {
    const double bootstrap = table.max_value(s_next);
    double& q = table.at(s, a);
    q = (1.0 - mu) * q + mu * (r + gamma * bootstrap);
}

}  // namespace iabplace
