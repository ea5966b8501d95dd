#include "uniseq/random.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "uniseq/errors.hpp"

namespace uniseq {

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw ContractError("Rng::below(0)");
  // Reject the tail that would bias the modulo.
  std::uint64_t rem = (std::numeric_limits<std::uint64_t>::max() % n + 1) % n;  // 2^64 mod n
  std::uint64_t r;
  do {
    r = next_u64();
  } while (rem != 0 && r >= std::numeric_limits<std::uint64_t>::max() - rem + 1);
  return r % n;
}

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 1.0 - uniform();  // (0, 1]
  double u2 = uniform();
  double mag = std::sqrt(-2.0 * std::log(u1));
  double ang = 2.0 * std::numbers::pi * u2;
  spare_ = mag * std::sin(ang);
  has_spare_ = true;
  return mag * std::cos(ang);
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  if (k >= n) return pool;
  // Partial Fisher-Yates: the first k slots end up with the sample.
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

std::string Rng::save_state() const {
  std::ostringstream out;
  out << engine_ << ' ' << (has_spare_ ? 1 : 0);
  if (has_spare_) {
    out.precision(17);
    out << ' ' << spare_;
  }
  return out.str();
}

void Rng::load_state(const std::string& state) {
  std::istringstream in(state);
  int spare_flag = 0;
  in >> engine_ >> spare_flag;
  if (!in) throw ParseError("malformed RNG state");
  has_spare_ = spare_flag != 0;
  if (has_spare_) {
    in >> spare_;
    if (!in) throw ParseError("malformed RNG state (missing spare)");
  }
}

}  // namespace uniseq
