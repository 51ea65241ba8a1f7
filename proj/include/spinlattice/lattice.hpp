#pragma once

/**
 * @file
 * One-dimensional lattice geometry, random partial filling and the pairs of
 * atoms brought together by a lattice displacement.
 */

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spinlattice {

enum class Boundary { periodic, open };

struct LatticeConfig {
    int num_sites = 2;
    Boundary boundary = Boundary::periodic;

    /// Throws ArgumentError unless num_sites >= 2.
    void validate() const;
};

/// Largest lattice accepted for occupancy sampling. The register only holds
/// occupied sites, so this is far larger than the register cap.
inline constexpr int kMaxLatticeSites = 4096;

class OccupancyMask {
  public:
    OccupancyMask() = default;
    explicit OccupancyMask(std::vector<std::uint8_t> bits);

    static OccupancyMask full(int num_sites);
    static OccupancyMask empty(int num_sites);
    /// '1' = occupied, '0' = empty; character i is site i.
    static OccupancyMask from_string(std::string_view bits);

    [[nodiscard]] int num_sites() const noexcept { return static_cast<int>(bits_.size()); }
    [[nodiscard]] int atom_count() const noexcept { return atom_count_; }
    [[nodiscard]] bool occupied(int site) const { return bits_.at(static_cast<std::size_t>(site)) != 0; }
    [[nodiscard]] bool is_full() const noexcept { return atom_count_ == num_sites(); }

    /// Register index of an occupied site (rank among occupied sites), -1 if empty.
    [[nodiscard]] int atom_index(int site) const { return atom_index_.at(static_cast<std::size_t>(site)); }
    [[nodiscard]] std::vector<int> occupied_sites() const;
    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const OccupancyMask &a, const OccupancyMask &b) { return a.bits_ == b.bits_; }

  private:
    std::vector<std::uint8_t> bits_;
    std::vector<int> atom_index_;
    int atom_count_ = 0;
};

/**
 * Counter-based generator: output n is a SplitMix64 finalizer of
 * key + n * golden-ratio increment. Streams keyed by different values are
 * independent of evaluation order.
 */
class CounterRng {
  public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    result_type operator()() noexcept { return mix(key_ + kGamma * ++counter_); }

    /// Uniform integer in [0, bound) by rejection; bound > 0.
    std::uint64_t below(std::uint64_t bound) noexcept;

    static std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

  private:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Stream key for one ensemble member.
std::uint64_t realization_key(std::uint64_t master_seed, std::uint64_t realization_index) noexcept;

/// Exactly `atom_count` distinct sites, uniformly at random, reproducible per seed.
OccupancyMask sample_occupancy(const LatticeConfig &lattice, int atom_count, std::uint64_t seed);

struct SitePair {
    int first = 0;
    int second = 0;
    friend bool operator==(const SitePair &, const SitePair &) = default;
};

/**
 * Ordered pairs (k, k + d) with both sites occupied. Periodic lattices wrap
 * the index; open lattices drop pairs that leave the chain. Negative d gives
 * the opposite displacement direction.
 */
std::vector<SitePair> displacement_pairs(const LatticeConfig &lattice, const OccupancyMask &mask, int d);

/// Ensemble average of h_k h_l over the masks.
double pair_correlation(std::span<const OccupancyMask> masks, int k, int l);

} // namespace spinlattice
