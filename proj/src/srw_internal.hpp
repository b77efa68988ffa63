#pragma once

#include "srwrate/srw.hpp"

namespace srwrate::detail {

// Primal-dual interior point on the epigraph form of min_pi topk(V_pi):
//   min k z + tr Z  s.t.  Z + z I - V_pi = S,  S, Z >= 0,  z >= 0,  pi in Pi(mu, nu).
// The rounded primal coupling gives the upper bound; the dual matrix, clipped
// to {0 <= Omega <= I, tr Omega <= k}, gives a certified lower bound through
// one exact OT solve.
SrwResult srw_interior_point(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int k,
                             const SrwOptions& opts);

}  // namespace srwrate::detail
