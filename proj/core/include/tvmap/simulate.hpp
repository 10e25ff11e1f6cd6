#pragma once

#include "tvmap/lattice.hpp"
#include "tvmap/rng.hpp"
#include "tvmap/tracks.hpp"

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace tvmap {

enum class ProfileName { lake, river, lake_corner };

ProfileName parse_profile(const std::string& name);
std::string profile_name(ProfileName name);

// Binary test profile on an N0 x N0 grid: a feature region at `high`, the
// rest at `low`. Geometry is fixed: lake = disk of radius 0.22 N0 at the
// center; river = band of width 0.12 N0 along the main diagonal;
// lake_corner = the lake disk plus a 0.2 N0 square block in the
// bottom-right corner.
struct ProfileMap {
    ProfileName name = ProfileName::lake;
    int n0 = 0;
    double low = 0.0;
    double high = 1.0;
    Eigen::VectorXd values;       // row-major n0*n0
    std::vector<char> is_high;    // feature geometry

    int high_count() const;
};

ProfileMap make_profile(ProfileName name, int n0, double low, double high);

// Full-population walk data: locations of n0 individuals over T steps on
// the N0 grid, herd flags, and (after generate_infections) outcomes.
struct PopulationData {
    int n0 = 0;
    int T = 0;
    int N0 = 0;
    std::vector<std::int32_t> loc;   // n0 * T cell ids, row-major per individual
    std::vector<std::uint8_t> herd;  // 0 = uniform mover, 1 = biased mover
    Eigen::VectorXd y0;

    std::int32_t at(int i, int t) const {
        return loc[static_cast<std::size_t>(i) * T + t];
    }
};

// One lattice walk: start uniform on the grid; each step proposes stay +
// the in-grid 4-neighbors. A biased mover doubles the weight of proposals
// whose destination propensity strictly exceeds the current cell's.
std::vector<std::int32_t> simulate_walk(const ProfileMap& profile, int T, bool biased,
                                        Rng& rng);

// First half of the individuals move uniformly, second half with the bias.
// Walks derive per-individual seeds, so any worker count gives identical
// populations.
PopulationData simulate_population(const ProfileMap& profile, int n0, int T,
                                   std::uint64_t seed, int workers = 1);

// Sets the profile amplitudes to (low, high) = (offset - a, offset + a) and
// draws y0 ~ Bernoulli(sigma(x_i . mu0)). With signal_spread == 0 the offset
// stays 0 and a alone is bisected until the population prevalence hits the
// target (only targets <= 1/2 are then reachable: walkers spend most of
// their time in the low region). With signal_spread > 0, a is bisected
// against the spread target first and the offset second, which unlocks any
// prevalence in (0, 1); prevalence is strictly increasing in the offset.
struct Amplitudes {
    double a = 0.0;
    double b = 0.0;
    double offset = 0.0;
};

Amplitudes generate_infections(PopulationData& pop, const ProfileMap& profile,
                               double target_prevalence, std::uint64_t seed,
                               double signal_spread = 0.0);

// (n, N, t) subsampling: n individuals balanced across herds, every t-th
// location, cells mapped to the coarse N grid by center containment.
// X entries are sample counts times t, so row sums stay within [T-t+1, T].
Dataset subsample_dataset(const PopulationData& pop, int n, int N, int t,
                          std::uint64_t seed);

} // namespace tvmap
