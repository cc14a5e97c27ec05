#pragma once

#include <optional>

#include "ehpush/catalog.hpp"
#include "ehpush/rng.hpp"
#include "ehpush/zipf.hpp"

namespace ehpush {

/// Bernoulli request arrivals: at most one user request per period.
struct RequestProcess {
  double request_probability = 0.0;
};

/// Draws the period's request: with probability p_r (and a non-empty
/// catalog) the content at rank i is requested with its Zipf probability,
/// via inverse CDF over the rank order; otherwise no request. The rank
/// uses a single uniform variate.
inline std::optional<ContentId> sample_request(const Catalog& catalog,
                                               const ZipfPopularity& popularity,
                                               const RequestProcess& process,
                                               RngStream& rng) {
  if (!rng.bernoulli(process.request_probability)) return std::nullopt;
  const std::size_t m = catalog.size();
  if (m == 0) return std::nullopt;
  const std::size_t rank = popularity.sample_rank(m, rng.uniform());
  return catalog.id_at(rank);
}

}  // namespace ehpush
