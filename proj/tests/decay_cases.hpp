#pragma once

#include <cstddef>
#include <vector>

namespace testing {

struct DecayCase {
    double bm25;
    std::size_t age;
    double lambda;
    std::vector<double> sims;
    double expected;
};

// Hand-computed: max(0, bm25 - lambda * age) * mean(clamp(sims, 0, 1)), empty sims -> 1.
inline const std::vector<DecayCase> kDecayCases = {
    {2.0, 0, 0.1, {0.5, 0.3}, 0.8},
    {0.05, 1, 0.1, {1, 1}, 0.0},
    {5.0, 0, 0.0, {1}, 5.0},
    {5.0, 3, 0.0, {1, 1, 1}, 5.0},
    {5.0, 3, 0.1, {1}, 4.7},
    {5.0, 3, 0.1, {0.2, 0.4, 0.6}, 1.88},
    {1.0, 10, 0.1, {1}, 0.0},
    {1.0, 11, 0.1, {1}, 0.0},
    {3.5, 2, 0.25, {0.8}, 2.4},
    {3.5, 2, 0.25, {-0.4, 0.8}, 1.2},
    {3.5, 2, 0.25, {1.7, 0.5}, 2.25},
    {0.0, 0, 0.1, {1}, 0.0},
    {7.25, 4, 0.5, {0.9, 0.1}, 2.625},
    {7.25, 4, 0.5, {0.0, 0.0}, 0.0},
    {12.0, 1, 1.0, {0.25, 0.5, 0.75}, 5.5},
    {12.0, 12, 1.0, {1}, 0.0},
    {0.3, 2, 0.1, {0.5}, 0.05},
    {9.0, 0, 2.0, {0.333}, 2.997},
    {4.0, 1, 0.1, {}, 3.9},
    {4.0, 2, 0.1, {}, 3.8},
};

}  // namespace testing
