#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace labavs {

/// Set of predictor indices (0-based internally, printed 1-based), d <= 64.
class VarSet {
public:
    static constexpr std::size_t max_dim = 64;

    constexpr VarSet() = default;
    constexpr explicit VarSet(std::uint64_t bits) : bits_(bits) {}

    static constexpr VarSet all(std::size_t d) {
        return VarSet(d >= max_dim ? ~std::uint64_t{0} : (std::uint64_t{1} << d) - 1);
    }
    static constexpr VarSet none() { return VarSet(); }

    constexpr bool contains(std::size_t j) const { return (bits_ >> j) & 1u; }
    constexpr void insert(std::size_t j) { bits_ |= std::uint64_t{1} << j; }
    constexpr void erase(std::size_t j) { bits_ &= ~(std::uint64_t{1} << j); }
    constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(bits_)); }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr bool subset_of(VarSet other) const { return (bits_ & ~other.bits_) == 0; }
    constexpr std::uint64_t bits() const { return bits_; }

    /// Complement relative to {0..d-1}.
    constexpr VarSet complement(std::size_t d) const { return VarSet(~bits_ & all(d).bits_); }

    std::vector<std::size_t> indices() const {
        std::vector<std::size_t> out;
        for (std::uint64_t b = bits_; b != 0; b &= b - 1) {
            out.push_back(static_cast<std::size_t>(std::countr_zero(b)));
        }
        return out;
    }

    /// Canonical 1-based form, e.g. "{1,2}" or "{}".
    std::string to_string() const {
        std::string s = "{";
        bool first = true;
        for (auto j : indices()) {
            if (!first) s += ',';
            s += std::to_string(j + 1);
            first = false;
        }
        return s + "}";
    }

    friend constexpr bool operator==(VarSet, VarSet) = default;
    friend constexpr VarSet operator|(VarSet a, VarSet b) { return VarSet(a.bits_ | b.bits_); }
    friend constexpr VarSet operator&(VarSet a, VarSet b) { return VarSet(a.bits_ & b.bits_); }

private:
    std::uint64_t bits_ = 0;
};

}  // namespace labavs
