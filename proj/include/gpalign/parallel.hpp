#ifndef GPALIGN_PARALLEL_HPP
#define GPALIGN_PARALLEL_HPP

#include <exception>
#include <functional>

namespace gpalign {

/// Worker count used by parallel loops. Resolution order: explicit
/// set_workers(), the GPALIGN_WORKERS environment variable, then the
/// OpenMP default. Always >= 1; 1 selects the serial reference path.
int workers();
void set_workers(int count);

/// Runs fn(i) for i in [0, count). With workers() == 1 this is a plain
/// serial loop (the reference implementation); otherwise iterations are
/// distributed over an OpenMP team. Results must be written to disjoint,
/// index-addressed slots so the outcome is identical on every path; the
/// first exception (lowest index) is rethrown after the loop.
void parallel_for(int count, const std::function<void(int)>& fn);

}  // namespace gpalign

#endif
