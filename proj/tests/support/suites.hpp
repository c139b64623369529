#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace suites {

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Finite-difference checks of every differentiable op and the three full
// models on random 8-12 node instances.
std::vector<Check> gradient_checks(std::uint64_t seed, double tolerance = 1e-4);

// Dense linear algebra, APSP and pair-enumeration oracles.
std::vector<Check> oracle_checks();

// Permutation equivariance/invariance, SortPooling pad/truncate/ties and
// ego monotonicity.
std::vector<Check> structural_checks();

bool all_pass(const std::vector<Check>& checks);

}  // namespace suites
