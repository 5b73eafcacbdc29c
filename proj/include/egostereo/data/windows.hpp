#pragma once

#include <utility>
#include <vector>

namespace egostereo::data {

// One window of frame indices per target frame t: the window covers
// { t-(T-1)*skip, ..., t-skip, t } with indices clamped at 0, so early
// frames repeat the first frame instead of peeking into the future. The
// last entry is always t itself and every entry is <= t.
std::vector<std::vector<int>> sample_windows(int seq_len, int t_window,
                                             int skip);

// Consecutive (start, count) chunks of floor(window_seconds * fps) frames.
// A short tail keeps its own chunk. Used to split a sequence into
// independent reconstruction jobs.
std::vector<std::pair<int, int>> reconstruction_windows(int seq_len,
                                                        double window_seconds,
                                                        double fps);

}  // namespace egostereo::data
