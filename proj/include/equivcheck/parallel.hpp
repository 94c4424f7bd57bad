#pragma once

#include <cstddef>

namespace equivcheck {

/// Selects between the OpenMP kernel and its serial reference. Both paths
/// write results into index-addressed slots and reduce in index order, so
/// they produce bit-identical output for any thread count.
enum class Exec { serial, parallel };

/// Worker count for parallel kernels; 0 means the OpenMP default.
void set_jobs(int jobs);
int jobs();

/// Resolve the job count from a CLI value (may be 0 = unset) and the
/// EQUIVCHECK_JOBS environment fallback.
int resolve_jobs(int cli_jobs);

}  // namespace equivcheck
