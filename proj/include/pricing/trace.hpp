// SPDX-License-Identifier: MIT
#pragma once

#include <string>
#include <vector>

namespace pricing {

// Per-step regret of one replication; cumulative[t] is the running sum.
struct RegretTrace {
    std::string policy;
    int rep = 0;
    std::vector<double> instant;
    std::vector<double> cumulative;

    void push(double r) {
        instant.push_back(r);
        cumulative.push_back((cumulative.empty() ? 0.0 : cumulative.back()) + r);
    }
    double final_regret() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
    long size() const { return static_cast<long>(instant.size()); }
};

}  // namespace pricing
