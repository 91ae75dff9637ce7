// Small deterministic job pool for ensemble runs: jobs are indexed, each job
// writes only its own slot, so aggregation order never depends on scheduling.
// Thread count comes from SMAG_THREADS (default 1).
#pragma once

#include <functional>

namespace smag {

// Number of worker threads to use: SMAG_THREADS clamped to [1, hardware].
int worker_count();

// Runs job(0), ..., job(count - 1), distributing over worker_count() threads
// (serially when that is 1). Exceptions from jobs are rethrown on the caller
// thread after all jobs finish or are abandoned.
void run_jobs(int count, const std::function<void(int)>& job);

}  // namespace smag
