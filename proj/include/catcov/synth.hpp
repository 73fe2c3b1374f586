#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "catcov/dataset.hpp"

namespace catcov {

/// Generative process: a latent class Z, uniform over `categories` classes,
/// is drawn per row. Each planted variable copies Z with probability
/// 1 - noise and is otherwise uniform. Background variables ignore Z and are
/// drawn from p_c proportional to 2^-c, so they carry less variance.
struct SynthOptions {
    std::uint64_t seed = 1;
    Eigen::Index rows = 2000;
    int variables = 10;
    int planted = 3;
    int categories = 3;
    double noise = 0.3;
};

struct SyntheticData {
    CategoricalDataset data;
    std::vector<std::size_t> planted; // dataset indices, ascending
};

/// Variables are named v01, v02, ...; category labels are x1..xk. Planted
/// column positions come from a seeded shuffle.
SyntheticData generate_planted(const SynthOptions& options);

} // namespace catcov
