#pragma once

#include <algorithm>
#include <cstdint>
#include <string>

#include "ehpush/errors.hpp"
#include "ehpush/rng.hpp"

namespace ehpush {

/// Whole multiples of the unit energy. Non-negative everywhere; the
/// integer representation keeps the battery ledger exact.
using Energy = std::int64_t;

/// Finite battery. Level moves only through deposit() and spend(), and
/// 0 <= level <= capacity holds at all times.
class Battery {
 public:
  Battery(Energy level, Energy capacity) : level_(level), capacity_(capacity) {
    if (capacity < 0) throw ConfigError("battery capacity must be >= 0");
    if (level < 0 || level > capacity)
      throw ConfigError("battery level must be in [0, capacity]");
  }

  Energy level() const { return level_; }
  Energy capacity() const { return capacity_; }

  /// Adds harvested energy, clipping at capacity. Returns the clipped
  /// (wasted) amount.
  Energy deposit(Energy amount) {
    const Energy room = capacity_ - level_;
    const Energy stored = std::min(amount, room);
    level_ += stored;
    return amount - stored;
  }

  /// Removes energy. Spending more than the current level is a caller
  /// bug (energy causality), reported as InsufficientEnergy.
  void spend(Energy amount) {
    if (amount < 0) throw InsufficientEnergy("negative spend amount");
    if (amount > level_)
      throw InsufficientEnergy("spend of " + std::to_string(amount) +
                               " exceeds battery level " + std::to_string(level_));
    level_ -= amount;
  }

  bool can_afford(Energy amount) const { return amount <= level_; }

  friend bool operator==(const Battery&, const Battery&) = default;

 private:
  Energy level_;
  Energy capacity_;
};

/// Bernoulli energy arrivals: a fixed amount with a fixed per-period
/// probability.
struct EnergyProcess {
  double arrival_probability = 0.0;
  Energy arrival_amount = 0;
};

/// Per-action energy prices. Transmitting (push or unicast) always moves
/// one content; fetching may batch several, each at fetch_cost.
struct EnergyCosts {
  Energy fetch_cost = 1;
  Energy transmit_cost = 2;
};

struct HarvestResult {
  Energy arrived = 0;
  Energy wasted = 0;
};

/// One period of the arrival process applied to the battery. Consumes one
/// draw when 0 < p < 1 and none otherwise.
inline HarvestResult harvest(Battery& battery, const EnergyProcess& process,
                             RngStream& rng) {
  if (!rng.bernoulli(process.arrival_probability)) return {};
  HarvestResult r;
  r.arrived = process.arrival_amount;
  r.wasted = battery.deposit(process.arrival_amount);
  return r;
}

}  // namespace ehpush
