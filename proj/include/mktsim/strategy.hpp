#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mktsim/message.hpp"

namespace mktsim {

struct OrderIntent {
  bool isBuy = true;
  std::int64_t quantity = 0;
  Cents limitPrice = 0;
  bool operator==(const OrderIntent&) const = default;
};

struct LineFit {
  double slope = 0;
  double intercept = 0;
};

/// Least-squares line through (i, ys[i]) for i = 0..n-1. Needs n >= 2.
LineFit fitLine(std::span<const double> ys);

/// Momentum rule on a full window of the most recent last-trade prices:
/// extrapolate one step past the window (x = n) and take a market position of
/// +size if the projection exceeds `last`, otherwise -size. Returns nullopt if
/// the window is not yet full or the position is already at target.
std::optional<OrderIntent> momentumStep(std::span<const Cents> window, std::size_t lookback, Cents last,
                                        std::int64_t holdings, std::int64_t size = 100);

struct ValueBelief {
  double mean = 0;      // cents
  double variance = 0;  // cents^2
};

/// Precision-weighted combination of a prior and a noisy observation. With no
/// prior the observation itself becomes the belief.
ValueBelief mixBelief(const std::optional<ValueBelief>& prior, double observation, double observationVariance);

/// Background-agent direction rule: trade toward +target if the belief is
/// above the last trade, toward -target if below, at the rounded belief.
std::optional<OrderIntent> backgroundOrder(double beliefMean, Cents lastTrade, std::int64_t holdings,
                                           std::int64_t target);

/// floor(greed * total volume over the first `window` levels).
std::int64_t impactQuantity(const std::vector<PriceVolume>& levels, double greed, std::size_t window);

}  // namespace mktsim
