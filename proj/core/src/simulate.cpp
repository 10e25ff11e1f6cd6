#include "tvmap/simulate.hpp"

#include "tvmap/errors.hpp"
#include "tvmap/model.hpp"
#include "tvmap/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tvmap {

ProfileName parse_profile(const std::string& name) {
    if (name == "lake") return ProfileName::lake;
    if (name == "river") return ProfileName::river;
    if (name == "lake_corner" || name == "lake+corner") return ProfileName::lake_corner;
    throw data_error("unknown profile '" + name + "' (expected lake, river, lake_corner)");
}

std::string profile_name(ProfileName name) {
    switch (name) {
        case ProfileName::lake: return "lake";
        case ProfileName::river: return "river";
        case ProfileName::lake_corner: return "lake_corner";
    }
    return "unknown";
}

int ProfileMap::high_count() const {
    int count = 0;
    for (char h : is_high) count += (h != 0);
    return count;
}

ProfileMap make_profile(ProfileName name, int n0, double low, double high) {
    if (n0 < 10) throw data_error("make_profile: N0 must be at least 10");
    if (high < low) throw data_error("make_profile: high must not be below low");

    ProfileMap profile;
    profile.name = name;
    profile.n0 = n0;
    profile.low = low;
    profile.high = high;
    profile.is_high.assign(static_cast<std::size_t>(n0) * n0, 0);

    const double center = 0.5 * n0;
    const double disk_r2 = (0.22 * n0) * (0.22 * n0);
    const double band_half = 0.06 * n0;
    const int corner = static_cast<int>(std::lround(0.2 * n0));

    for (int r = 0; r < n0; ++r) {
        for (int c = 0; c < n0; ++c) {
            const double cy = r + 0.5, cx = c + 0.5;
            bool inside = false;
            switch (name) {
                case ProfileName::lake:
                    inside = (cy - center) * (cy - center) + (cx - center) * (cx - center) <=
                             disk_r2;
                    break;
                case ProfileName::river:
                    // Perpendicular distance from the main diagonal y = x.
                    inside = std::abs(cy - cx) / std::sqrt(2.0) <= band_half;
                    break;
                case ProfileName::lake_corner:
                    inside = (cy - center) * (cy - center) + (cx - center) * (cx - center) <=
                                 disk_r2 ||
                             (r >= n0 - corner && c >= n0 - corner);
                    break;
            }
            profile.is_high[static_cast<std::size_t>(r) * n0 + c] = inside ? 1 : 0;
        }
    }

    profile.values.resize(static_cast<Eigen::Index>(n0) * n0);
    for (Eigen::Index l = 0; l < profile.values.size(); ++l)
        profile.values[l] = profile.is_high[static_cast<std::size_t>(l)] ? high : low;
    return profile;
}

std::vector<std::int32_t> simulate_walk(const ProfileMap& profile, int T, bool biased,
                                        Rng& rng) {
    const int n0 = profile.n0;
    std::vector<std::int32_t> loc(static_cast<std::size_t>(T));
    std::int32_t cell = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(n0) * n0));
    loc[0] = cell;

    double weight[5];
    std::int32_t dest[5];
    for (int t = 1; t < T; ++t) {
        const int r = cell / n0, c = cell % n0;
        const double here = profile.values[cell];
        int k = 0;
        dest[k] = cell;
        weight[k++] = 1.0; // stay never strictly increases propensity
        if (r > 0) { dest[k] = cell - n0; ++k; }
        if (r + 1 < n0) { dest[k] = cell + n0; ++k; }
        if (c > 0) { dest[k] = cell - 1; ++k; }
        if (c + 1 < n0) { dest[k] = cell + 1; ++k; }
        double total = 1.0;
        for (int j = 1; j < k; ++j) {
            weight[j] = (biased && profile.values[dest[j]] > here) ? 2.0 : 1.0;
            total += weight[j];
        }
        double pick = rng.uniform() * total;
        int chosen = k - 1;
        for (int j = 0; j < k; ++j) {
            pick -= weight[j];
            if (pick < 0.0) { chosen = j; break; }
        }
        cell = dest[chosen];
        loc[static_cast<std::size_t>(t)] = cell;
    }
    return loc;
}

PopulationData simulate_population(const ProfileMap& profile, int n0_individuals, int T,
                                   std::uint64_t seed, int workers) {
    if (n0_individuals <= 0 || n0_individuals % 2 != 0)
        throw data_error("simulate_population: n0 must be positive and even (two equal herds)");
    if (T < 1) throw data_error("simulate_population: T must be at least 1");

    PopulationData pop;
    pop.n0 = n0_individuals;
    pop.T = T;
    pop.N0 = profile.n0;
    pop.loc.resize(static_cast<std::size_t>(n0_individuals) * T);
    pop.herd.resize(static_cast<std::size_t>(n0_individuals));

    parallel_for(static_cast<std::size_t>(n0_individuals), workers, [&](std::size_t i) {
        const bool biased = static_cast<int>(i) >= n0_individuals / 2;
        pop.herd[i] = biased ? 1 : 0;
        Rng rng(derive_seed(seed, i));
        const auto walk = simulate_walk(profile, T, biased, rng);
        std::copy(walk.begin(), walk.end(), pop.loc.begin() + static_cast<std::ptrdiff_t>(i * T));
    });
    return pop;
}

namespace {

// Bisects a on mean(sigma(a d_i)) = target. Only targets between the
// prevalence limits of the symmetric model are reachable.
double bisect_spread(const Eigen::VectorXd& d, double target, double d_max) {
    const auto prevalence = [&](double a) {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < d.size(); ++i) sum += sigmoid(a * d[i]);
        return sum / static_cast<double>(d.size());
    };
    const double p0 = 0.5; // prevalence at a = 0
    if (std::abs(p0 - target) <= 1e-12) return 0.0;
    if (d_max == 0.0)
        throw data_error("generate_infections: walks never distinguish the feature; only "
                         "prevalence 0.5 is reachable");
    double lo = 0.0, flo = p0 - target;
    double hi = 0.125 / d_max, fhi = prevalence(hi) - target;
    while (flo * fhi > 0.0) {
        lo = hi;
        flo = fhi;
        hi *= 2.0;
        fhi = prevalence(hi) - target;
        if (hi * d_max > 1e9) {
            throw data_error("generate_infections: target prevalence " + std::to_string(target) +
                             " unreachable with symmetric amplitudes; achieved bracket [" +
                             std::to_string(std::min(p0, prevalence(hi))) + ", " +
                             std::to_string(std::max(p0, prevalence(hi))) + "]");
        }
    }
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = prevalence(mid) - target;
        if (std::abs(fmid) <= 1e-6) return mid;
        if ((fmid > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Bisects the baseline offset c on mean(sigma(c T + a d_i)) = target, which
// is strictly increasing in c.
double bisect_offset(const Eigen::VectorXd& d, double a, double T, double target) {
    const auto prevalence = [&](double c) {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < d.size(); ++i) sum += sigmoid(c * T + a * d[i]);
        return sum / static_cast<double>(d.size());
    };
    double lo = -1.0 / T, hi = 1.0 / T;
    while (prevalence(lo) > target) lo *= 2.0;
    while (prevalence(hi) < target) hi *= 2.0;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = prevalence(mid) - target;
        if (std::abs(fmid) <= 1e-6) return mid;
        (fmid < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

Amplitudes generate_infections(PopulationData& pop, const ProfileMap& profile,
                               double target_prevalence, std::uint64_t seed,
                               double signal_spread) {
    if (!(target_prevalence > 0.05 && target_prevalence < 0.95))
        throw data_error("generate_infections: target prevalence must lie in (0.05, 0.95)");
    if (signal_spread < 0.0 || signal_spread > 0.5)
        throw data_error("generate_infections: signal_spread must lie in [0, 0.5]");

    // d_i = (time in the high region) - (time in the low region); with
    // amplitudes (offset -/+ a) the logit of individual i is offset*T + a*d_i.
    Eigen::VectorXd d(pop.n0);
    for (int i = 0; i < pop.n0; ++i) {
        long high = 0;
        for (int t = 0; t < pop.T; ++t)
            high += profile.is_high[static_cast<std::size_t>(pop.at(i, t))];
        d[i] = static_cast<double>(2 * high - pop.T);
    }
    const double d_max = d.cwiseAbs().maxCoeff();

    Amplitudes amp;
    if (signal_spread > 0.0) {
        amp.a = amp.b = bisect_spread(d, signal_spread, d_max);
        amp.offset = bisect_offset(d, amp.a, static_cast<double>(pop.T), target_prevalence);
    } else {
        amp.a = amp.b = bisect_spread(d, target_prevalence, d_max);
    }

    Rng rng(derive_seed(seed, 0x79300dULL));
    pop.y0.resize(pop.n0);
    for (int i = 0; i < pop.n0; ++i)
        pop.y0[i] =
            rng.bernoulli(sigmoid(amp.offset * pop.T + amp.a * d[i])) ? 1.0 : 0.0;
    return amp;
}

Dataset subsample_dataset(const PopulationData& pop, int n, int N, int t,
                          std::uint64_t seed) {
    if (n < 1 || n > pop.n0)
        throw data_error("subsample_dataset: n must lie in [1, n0]");
    if (N < 1 || N > pop.N0)
        throw data_error("subsample_dataset: N must lie in [1, N0]");
    if (t < 1 || t > pop.T)
        throw data_error("subsample_dataset: t must lie in [1, T]");
    if (pop.y0.size() != pop.n0)
        throw data_error("subsample_dataset: population has no outcomes; call "
                         "generate_infections first");

    // Balanced selection: half the rows from each herd, ascending ids.
    const int half = pop.n0 / 2;
    const int from_uniform = (n + 1) / 2;
    const int from_biased = n - from_uniform;
    if (from_uniform > half || from_biased > half)
        throw data_error("subsample_dataset: n exceeds a herd's size under balanced sampling");

    Rng rng(derive_seed(seed, 0x5e1ecULL));
    const auto pick = [&](int offset, int pool, int count) {
        std::vector<int> ids(static_cast<std::size_t>(pool));
        std::iota(ids.begin(), ids.end(), offset);
        for (int k = 0; k < count; ++k) {
            const auto j = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(pool - k)));
            std::swap(ids[static_cast<std::size_t>(k)], ids[static_cast<std::size_t>(j)]);
        }
        ids.resize(static_cast<std::size_t>(count));
        return ids;
    };
    std::vector<int> selected = pick(0, half, from_uniform);
    const std::vector<int> biased = pick(half, pop.n0 - half, from_biased);
    selected.insert(selected.end(), biased.begin(), biased.end());
    std::sort(selected.begin(), selected.end());

    const int kept_cols = pop.T / t;
    Dataset ds;
    ds.lattice = LatticeSpec::full(N, N);
    ds.step_units = static_cast<double>(t);
    ds.X = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(N) * N);
    ds.y.resize(n);
    ds.animal_ids.reserve(static_cast<std::size_t>(n));

    for (int row = 0; row < n; ++row) {
        const int i = selected[static_cast<std::size_t>(row)];
        for (int k = 0; k < kept_cols; ++k) {
            const std::int32_t fine = pop.at(i, k * t);
            const int fr = fine / pop.N0, fc = fine % pop.N0;
            const int cr = std::min(static_cast<int>((fr + 0.5) * N / pop.N0), N - 1);
            const int cc = std::min(static_cast<int>((fc + 0.5) * N / pop.N0), N - 1);
            ds.X(row, static_cast<Eigen::Index>(cr) * N + cc) += static_cast<double>(t);
        }
        ds.y[row] = pop.y0[i];
        ds.animal_ids.push_back("sim" + std::to_string(i));
    }
    return ds;
}

} // namespace tvmap
