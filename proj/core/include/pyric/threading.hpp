// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace pyric {

/// Resolve an effective worker count: explicit request > PYRIC_THREADS
/// env var > hardware concurrency. Always >= 1.
int resolve_threads(int requested);

/// Run fn(i) for i in [0, n). Work items must write only to their own
/// output slots; completion order is unspecified but results must not
/// depend on it. Exceptions from workers are rethrown on the caller.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn);

} // namespace pyric
