#ifndef BG2LAB_CONFIGURATION_HPP
#define BG2LAB_CONFIGURATION_HPP

#include <bit>
#include <cstdint>
#include <vector>

#include "bg2lab/errors.hpp"

namespace bg2lab {

enum class LatticeKind { Exclusion, Energy };

/// Lattice configuration on a periodic ring of n sites.  Exclusion
/// occupancies are bit-packed (one bit per site), energies are stored as a
/// dense array of positive reals.  Plain value type: copy freely, no shared
/// state.
class Configuration {
 public:
  Configuration() = default;

  static Configuration exclusion(int n) {
    Configuration c;
    c.kind_ = LatticeKind::Exclusion;
    c.n_ = n;
    c.bits_.assign(static_cast<std::size_t>((n + 63) / 64), 0);
    return c;
  }

  static Configuration exclusion_from(const std::vector<int>& occ) {
    Configuration c = exclusion(static_cast<int>(occ.size()));
    for (int x = 0; x < c.n_; ++x)
      if (occ[static_cast<std::size_t>(x)]) c.set_occ(x, 1);
    return c;
  }

  static Configuration energy(std::vector<double> vals) {
    Configuration c;
    c.kind_ = LatticeKind::Energy;
    c.n_ = static_cast<int>(vals.size());
    c.vals_ = std::move(vals);
    return c;
  }

  LatticeKind kind() const { return kind_; }
  int size() const { return n_; }

  /// Reduces an arbitrary integer to a valid site index.
  int site(long long x) const {
    long long m = x % n_;
    return static_cast<int>(m < 0 ? m + n_ : m);
  }

  // Occupancy accessors take an already-reduced index (hot path).
  int occ(int x) const {
    return static_cast<int>((bits_[static_cast<std::size_t>(x >> 6)] >> (x & 63)) & 1u);
  }
  void set_occ(int x, int v) {
    std::uint64_t mask = 1ull << (x & 63);
    auto& w = bits_[static_cast<std::size_t>(x >> 6)];
    w = v ? (w | mask) : (w & ~mask);
  }

  double energy_at(int x) const { return vals_[static_cast<std::size_t>(x)]; }
  void set_energy(int x, double v) { vals_[static_cast<std::size_t>(x)] = v; }

  /// Value at a reduced site index, either kind.
  double value(int x) const {
    return kind_ == LatticeKind::Exclusion ? static_cast<double>(occ(x))
                                           : vals_[static_cast<std::size_t>(x)];
  }

  /// Swaps the values at sites z and z+1 (periodic).  Involution.
  void swap_sites(int z) {
    int z1 = z + 1 == n_ ? 0 : z + 1;
    if (kind_ == LatticeKind::Exclusion) {
      int a = occ(z), b = occ(z1);
      if (a != b) {
        set_occ(z, b);
        set_occ(z1, a);
      }
    } else {
      std::swap(vals_[static_cast<std::size_t>(z)], vals_[static_cast<std::size_t>(z1)]);
    }
  }

  double total_mass() const {
    if (kind_ == LatticeKind::Exclusion) {
      std::uint64_t count = 0;
      for (std::uint64_t w : bits_) count += static_cast<std::uint64_t>(std::popcount(w));
      return static_cast<double>(count);
    }
    double s = 0;
    for (double v : vals_) s += v;
    return s;
  }

  std::vector<double>& raw_energies() { return vals_; }
  const std::vector<double>& raw_energies() const { return vals_; }

 private:
  LatticeKind kind_ = LatticeKind::Exclusion;
  int n_ = 0;
  std::vector<std::uint64_t> bits_;
  std::vector<double> vals_;
};

struct BlockSpec {
  enum class Side { Right, Left };
  int center = 0;
  int len = 1;
  Side side = Side::Right;
};

/// Centered value at site x: value(x mod n) - rho.
inline double centered(const Configuration& c, double rho, long long x) {
  return c.value(c.site(x)) - rho;
}

/// Empirical average of centered values over the block to the right
/// (x+1..x+len) or to the left (x-len..x-1) of the block center.
double block_avg(const Configuration& c, double rho, const BlockSpec& block);

/// Returns a copy with sites z and z+1 swapped.
Configuration exchange(const Configuration& c, int z);

}  // namespace bg2lab

#endif
