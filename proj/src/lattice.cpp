#include "spinlattice/lattice.hpp"

#include <numeric>
#include <utility>

#include "spinlattice/errors.hpp"

namespace spinlattice {

void LatticeConfig::validate() const {
    if (num_sites < 2) {
        throw ArgumentError("lattice needs at least 2 sites");
    }
}

OccupancyMask::OccupancyMask(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    atom_index_.assign(bits_.size(), -1);
    for (std::size_t i = 0; i < bits_.size(); ++i) {
        if (bits_[i] != 0) {
            bits_[i] = 1;
            atom_index_[i] = atom_count_++;
        }
    }
}

OccupancyMask OccupancyMask::full(int num_sites) {
    return OccupancyMask(std::vector<std::uint8_t>(static_cast<std::size_t>(num_sites), 1));
}

OccupancyMask OccupancyMask::empty(int num_sites) {
    return OccupancyMask(std::vector<std::uint8_t>(static_cast<std::size_t>(num_sites), 0));
}

OccupancyMask OccupancyMask::from_string(std::string_view bits) {
    std::vector<std::uint8_t> v;
    v.reserve(bits.size());
    for (char c : bits) {
        if (c != '0' && c != '1') {
            throw ArgumentError("occupancy string must contain only '0' and '1'");
        }
        v.push_back(c == '1' ? 1 : 0);
    }
    return OccupancyMask(std::move(v));
}

std::vector<int> OccupancyMask::occupied_sites() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(atom_count_));
    for (std::size_t i = 0; i < bits_.size(); ++i) {
        if (bits_[i]) {
            out.push_back(static_cast<int>(i));
        }
    }
    return out;
}

std::string OccupancyMask::to_string() const {
    std::string s;
    s.reserve(bits_.size());
    for (auto b : bits_) {
        s.push_back(b ? '1' : '0');
    }
    return s;
}

std::uint64_t CounterRng::below(std::uint64_t bound) noexcept {
    // Reject the top partial block so every residue is equally likely.
    const std::uint64_t limit = max() - (max() % bound + 1) % bound;
    std::uint64_t r = (*this)();
    while (r > limit) {
        r = (*this)();
    }
    return r % bound;
}

std::uint64_t realization_key(std::uint64_t master_seed, std::uint64_t realization_index) noexcept {
    return CounterRng::mix(CounterRng::mix(master_seed) ^ CounterRng::mix(realization_index + 0x632be59bd9b4e019ULL));
}

OccupancyMask sample_occupancy(const LatticeConfig &lattice, int atom_count, std::uint64_t seed) {
    lattice.validate();
    if (lattice.num_sites > kMaxLatticeSites) {
        throw CapacityError("lattice of " + std::to_string(lattice.num_sites) + " sites exceeds cap of " +
                            std::to_string(kMaxLatticeSites));
    }
    if (atom_count < 0 || atom_count > lattice.num_sites) {
        throw InfeasibleError("cannot place " + std::to_string(atom_count) + " atoms on " +
                              std::to_string(lattice.num_sites) + " sites");
    }
    // Partial Fisher-Yates: the first atom_count entries are a uniform subset.
    std::vector<int> sites(static_cast<std::size_t>(lattice.num_sites));
    std::iota(sites.begin(), sites.end(), 0);
    CounterRng rng(seed);
    const auto m = static_cast<std::uint64_t>(lattice.num_sites);
    for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(atom_count); ++i) {
        const std::uint64_t j = i + rng.below(m - i);
        std::swap(sites[i], sites[j]);
    }
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(lattice.num_sites), 0);
    for (int i = 0; i < atom_count; ++i) {
        bits[static_cast<std::size_t>(sites[static_cast<std::size_t>(i)])] = 1;
    }
    return OccupancyMask(std::move(bits));
}

std::vector<SitePair> displacement_pairs(const LatticeConfig &lattice, const OccupancyMask &mask, int d) {
    lattice.validate();
    const int m = lattice.num_sites;
    if (mask.num_sites() != m) {
        throw ValidationError("mask size does not match lattice");
    }
    if (d == 0 || d <= -m || d >= m) {
        throw ArgumentError("displacement must satisfy 1 <= |d| < M");
    }
    std::vector<SitePair> pairs;
    for (int k = 0; k < m; ++k) {
        if (!mask.occupied(k)) {
            continue;
        }
        int l = k + d;
        if (lattice.boundary == Boundary::periodic) {
            l = ((l % m) + m) % m;
        } else if (l < 0 || l >= m) {
            continue;
        }
        if (mask.occupied(l)) {
            pairs.push_back({k, l});
        }
    }
    return pairs;
}

double pair_correlation(std::span<const OccupancyMask> masks, int k, int l) {
    if (masks.empty()) {
        throw ArgumentError("pair correlation needs at least one mask");
    }
    double sum = 0;
    for (const auto &mask : masks) {
        if (mask.occupied(k) && mask.occupied(l)) {
            sum += 1;
        }
    }
    return sum / static_cast<double>(masks.size());
}

} // namespace spinlattice
