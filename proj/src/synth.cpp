#include "catcov/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "catcov/error.hpp"
#include "catcov/random.hpp"

namespace catcov {

SyntheticData generate_planted(const SynthOptions& options) {
    if (options.rows < 1) throw InputError("synth: rows must be positive");
    if (options.variables < 1) throw InputError("synth: need at least one variable");
    if (options.planted < 0 || options.planted > options.variables)
        throw InputError("synth: planted count must be in [0, variables]");
    if (options.categories < 2) throw InputError("synth: need at least two categories");
    if (!(options.noise >= 0 && options.noise <= 1)) throw InputError("synth: noise must be in [0, 1]");

    Rng rng(options.seed);
    const auto n_vars = static_cast<std::size_t>(options.variables);
    const auto k = static_cast<std::uint64_t>(options.categories);

    // Fisher-Yates over column positions; the first `planted` become planted.
    std::vector<std::size_t> positions(n_vars);
    std::iota(positions.begin(), positions.end(), std::size_t{0});
    for (std::size_t i = n_vars; i > 1; --i) std::swap(positions[i - 1], positions[rng.index(i)]);
    std::vector<bool> is_planted(n_vars, false);
    std::vector<std::size_t> planted(positions.begin(), positions.begin() + options.planted);
    std::sort(planted.begin(), planted.end());
    for (std::size_t p : planted) is_planted[p] = true;

    std::vector<double> skewed_cdf(k);
    double total = 0;
    for (std::uint64_t c = 0; c < k; ++c) total += std::ldexp(1.0, -static_cast<int>(c));
    double acc = 0;
    for (std::uint64_t c = 0; c < k; ++c) {
        acc += std::ldexp(1.0, -static_cast<int>(c)) / total;
        skewed_cdf[c] = acc;
    }
    skewed_cdf.back() = 1.0;

    std::vector<CategoricalVariable> vars(n_vars);
    for (std::size_t i = 0; i < n_vars; ++i) {
        const std::string idx = std::to_string(i + 1);
        vars[i].name = "v" + std::string(idx.size() < 2 ? 2 - idx.size() : 0, '0') + idx;
        for (std::uint64_t c = 0; c < k; ++c) vars[i].categories.push_back("x" + std::to_string(c + 1));
        vars[i].codes.reserve(static_cast<std::size_t>(options.rows));
    }
    for (Eigen::Index r = 0; r < options.rows; ++r) {
        const auto latent = rng.index(k);
        for (std::size_t i = 0; i < n_vars; ++i) {
            std::uint64_t code;
            if (is_planted[i]) {
                code = rng.uniform() < options.noise ? rng.index(k) : latent;
            } else {
                const double u = rng.uniform();
                code = static_cast<std::uint64_t>(std::upper_bound(skewed_cdf.begin(), skewed_cdf.end(), u) -
                                                  skewed_cdf.begin());
                code = std::min(code, k - 1);
            }
            vars[i].codes.push_back(static_cast<int>(code));
        }
    }
    return {CategoricalDataset(std::move(vars)), std::move(planted)};
}

} // namespace catcov
