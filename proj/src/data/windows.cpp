#include "egostereo/data/windows.hpp"

#include <cmath>

#include "egostereo/errors.hpp"

namespace egostereo::data {

std::vector<std::vector<int>> sample_windows(int seq_len, int t_window,
                                             int skip) {
  if (seq_len < 0) throw ConfigError("sample_windows: negative length");
  if (t_window < 1 || skip < 1) {
    throw ConfigError("sample_windows: window and skip must be >= 1");
  }
  std::vector<std::vector<int>> out;
  out.reserve(seq_len);
  for (int t = 0; t < seq_len; ++t) {
    std::vector<int> w(t_window);
    for (int k = 0; k < t_window; ++k) {
      w[k] = std::max(0, t - (t_window - 1 - k) * skip);
    }
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<std::pair<int, int>> reconstruction_windows(int seq_len,
                                                        double window_seconds,
                                                        double fps) {
  if (seq_len < 0) throw ConfigError("reconstruction_windows: negative length");
  const int chunk = static_cast<int>(std::floor(window_seconds * fps));
  if (chunk < 1) {
    throw ConfigError("reconstruction_windows: window shorter than one frame");
  }
  std::vector<std::pair<int, int>> out;
  for (int start = 0; start < seq_len; start += chunk) {
    out.emplace_back(start, std::min(chunk, seq_len - start));
  }
  return out;
}

}  // namespace egostereo::data
