#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <vector>

namespace spd {

/// Worker count used by parallel_for; 0 selects the hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Splits [0, count) into contiguous chunks and runs body(begin, end) on each,
/// possibly concurrently. Callers write results into per-index slots and
/// reduce afterwards in index order, so results do not depend on the
/// thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body);

/// Sum of f(begin, end) over fixed-size chunks of [0, count). Chunk
/// boundaries do not depend on the thread count and partials are added in
/// chunk order, so the result is bitwise reproducible.
template <class F>
double chunked_sum(std::size_t count, std::size_t chunk, F&& f) {
  if (count == 0) return 0.0;
  const std::size_t chunks = (count + chunk - 1) / chunk;
  std::vector<double> partial(chunks, 0.0);
  parallel_for(chunks, [&](std::size_t b, std::size_t e) {
    for (std::size_t c = b; c < e; ++c) partial[c] = f(c * chunk, std::min(count, (c + 1) * chunk));
  });
  double s = 0.0;
  for (double v : partial) s += v;
  return s;
}

}  // namespace spd
