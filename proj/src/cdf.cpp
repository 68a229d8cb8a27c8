#include "latc/cdf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace latc {

size_t QuantizedCdf::lookup(uint32_t value) const {
  if (value >= total()) throw DataError("cumulative value outside table");
  const auto it = std::upper_bound(cum.begin(), cum.end(), value);
  return size_t(it - cum.begin()) - 1;
}

QuantizedCdf quantize_cdf(const std::vector<double>& masses, int precision) {
  if (precision < 1 || precision > 16) {
    throw UsageError("cdf precision outside [1, 16]");
  }
  const size_t n = masses.size();
  const uint32_t scale = 1u << precision;
  if (n < 2) throw UsageError("cdf needs at least two symbols");
  if (n > scale) throw UsageError("cdf precision too small for alphabet");

  double total = 0.0;
  for (double m : masses) {
    if (!(m >= 0.0) || !std::isfinite(m)) {
      throw NumericError("cdf mass must be finite and nonnegative");
    }
    total += m;
  }
  if (!(total > 0.0)) throw NumericError("cdf mass vanished");

  // Largest-remainder rounding keeps the counts summing to the scale.
  std::vector<uint32_t> counts(n);
  std::vector<std::pair<double, size_t>> remainders(n);
  uint64_t assigned = 0;
  for (size_t i = 0; i < n; ++i) {
    const double target = masses[i] / total * double(scale);
    counts[i] = uint32_t(std::min(std::floor(target), double(scale)));
    assigned += counts[i];
    remainders[i] = {target - std::floor(target), i};
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (size_t i = 0; assigned < scale; ++i) {
    counts[remainders[i % n].second] += 1;
    ++assigned;
  }

  // Every symbol must stay codable; lift empty cells at the expense of the
  // fullest one.
  for (size_t i = 0; i < n; ++i) {
    if (counts[i] > 0) continue;
    const size_t donor =
        size_t(std::max_element(counts.begin(), counts.end()) - counts.begin());
    if (counts[donor] < 2) throw NumericError("cdf fixup ran out of counts");
    counts[donor] -= 1;
    counts[i] = 1;
  }

  QuantizedCdf cdf;
  cdf.precision = precision;
  cdf.cum.assign(n + 1, 0);
  for (size_t i = 0; i < n; ++i) cdf.cum[i + 1] = cdf.cum[i] + counts[i];
  return cdf;
}

QuantizedCdf build_tail_cdf(double sigma, int support_cap, int precision) {
  if (support_cap < 2) throw UsageError("tail cdf needs support cap >= 2");
  std::vector<double> masses;
  masses.reserve(size_t(support_cap));
  for (int k = 2; k <= support_cap; ++k) {
    masses.push_back(explicit_conditional_prob(k, sigma));
  }
  masses.push_back(explicit_tail_remainder(support_cap, sigma));
  return quantize_cdf(masses, precision);
}

QuantizedCdf build_model_cdf(const DiscretePmf& pmf, int precision) {
  std::vector<double> masses = pmf.probs;
  masses.push_back(pmf.tail_mass);
  return quantize_cdf(masses, precision);
}

}  // namespace latc
