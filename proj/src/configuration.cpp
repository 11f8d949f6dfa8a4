#include "bg2lab/configuration.hpp"

namespace bg2lab {

double block_avg(const Configuration& c, double rho, const BlockSpec& block) {
  const int n = c.size();
  if (block.len < 1 || block.len > n / 4)
    throw ValidationError("block length must be in [1, n/4], got " +
                          std::to_string(block.len) + " with n=" + std::to_string(n));
  const int x = c.site(block.center);
  double sum = 0;
  if (block.side == BlockSpec::Side::Right) {
    for (int j = 1; j <= block.len; ++j) sum += c.value(c.site(x + j)) - rho;
  } else {
    for (int j = 1; j <= block.len; ++j) sum += c.value(c.site(x - j)) - rho;
  }
  return sum / block.len;
}

Configuration exchange(const Configuration& c, int z) {
  Configuration out = c;
  out.swap_sites(out.site(z));
  return out;
}

}  // namespace bg2lab
