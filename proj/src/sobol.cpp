#include <bit>
#include <charconv>
#include <mutex>
#include <string_view>
#include <vector>

#include "spdesign/sampling.hpp"

namespace spd {

namespace detail {
extern const std::string_view joe_kuo_table;
}

namespace {

struct DirectionEntry {
  unsigned degree = 0;
  unsigned coeffs = 0;
  std::vector<unsigned> m;
};

std::vector<DirectionEntry> parse_table(std::string_view text) {
  std::vector<DirectionEntry> out;
  std::size_t pos = 0;
  bool header = true;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (header) {
      header = false;
      continue;
    }
    std::vector<unsigned> fields;
    const char* p = line.data();
    const char* last = line.data() + line.size();
    while (p < last) {
      while (p < last && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
      if (p == last) break;
      unsigned v = 0;
      auto res = std::from_chars(p, last, v);
      if (res.ec != std::errc{}) throw Error("corrupt direction-number table");
      fields.push_back(v);
      p = res.ptr;
    }
    if (fields.empty()) continue;
    if (fields.size() < 4 || fields.size() != 3 + fields[1]) throw Error("corrupt direction-number table");
    DirectionEntry e;
    e.degree = fields[1];
    e.coeffs = fields[2];
    e.m.assign(fields.begin() + 3, fields.end());
    out.push_back(std::move(e));
  }
  return out;
}

const std::vector<DirectionEntry>& table() {
  static const std::vector<DirectionEntry> t = parse_table(detail::joe_kuo_table);
  return t;
}

}  // namespace

Eigen::Index SobolGenerator::max_dimension() { return static_cast<Eigen::Index>(table().size()) + 1; }

SobolGenerator::SobolGenerator(Eigen::Index p) : p_(p) {
  if (p < 1) throw InputError("Sobol dimension must be >= 1");
  if (p > max_dimension()) {
    throw InputError("Sobol dimension " + std::to_string(p) + " exceeds direction-number table (" +
                     std::to_string(max_dimension()) + ")");
  }
  directions_.assign(static_cast<std::size_t>(p) * kBits, 0u);
  for (int b = 0; b < kBits; ++b) directions_[static_cast<std::size_t>(b)] = 1u << (31 - b);

  for (Eigen::Index l = 1; l < p; ++l) {
    const auto& e = table()[static_cast<std::size_t>(l - 1)];
    std::uint32_t* v = directions_.data() + l * kBits;
    const unsigned s = e.degree;
    for (unsigned b = 0; b < s && b < kBits; ++b) v[b] = e.m[b] << (31 - b);
    for (unsigned b = s; b < kBits; ++b) {
      v[b] = v[b - s] ^ (v[b - s] >> s);
      for (unsigned k = 1; k < s; ++k) {
        if ((e.coeffs >> (s - 1 - k)) & 1u) v[b] ^= v[b - k];
      }
    }
  }
}

std::vector<std::uint32_t> SobolGenerator::integers(Eigen::Index n) const {
  if (n < 0 || static_cast<std::uint64_t>(n) > (std::uint64_t{1} << kBits)) {
    throw InputError("Sobol point count out of range");
  }
  const auto p = static_cast<std::size_t>(p_);
  std::vector<std::uint32_t> out(static_cast<std::size_t>(n) * p);
  std::vector<std::uint32_t> state(p, 0u);
  for (Eigen::Index k = 1; k < n; ++k) {
    // Gray code: flip the direction number indexed by the lowest zero bit of k-1.
    const auto c = static_cast<std::size_t>(std::countr_one(static_cast<std::uint64_t>(k - 1)));
    for (std::size_t l = 0; l < p; ++l) state[l] ^= directions_[l * kBits + c];
    std::copy(state.begin(), state.end(), out.begin() + static_cast<std::ptrdiff_t>(k * p_));
  }
  return out;
}

}  // namespace spd
