#include "mktsim/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mktsim {

LineFit fitLine(std::span<const double> ys) {
  const auto n = ys.size();
  if (n < 2) throw std::invalid_argument("line fit needs at least two points");
  const double xMean = static_cast<double>(n - 1) / 2.0;
  double yMean = 0;
  for (double y : ys) yMean += y;
  yMean /= static_cast<double>(n);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i) - xMean;
    sxy += dx * (ys[i] - yMean);
    sxx += dx * dx;
  }
  const double slope = sxy / sxx;
  return {slope, yMean - slope * xMean};
}

std::optional<OrderIntent> momentumStep(std::span<const Cents> window, std::size_t lookback, Cents last,
                                        std::int64_t holdings, std::int64_t size) {
  if (lookback < 2) throw std::invalid_argument("momentum lookback must be at least 2");
  if (window.size() < lookback) return std::nullopt;
  std::vector<double> ys(window.end() - static_cast<std::ptrdiff_t>(lookback), window.end());
  const auto fit = fitLine(ys);
  const double projected = static_cast<double>(lookback) * fit.slope + fit.intercept;
  if (projected > static_cast<double>(last)) {
    if (size - holdings <= 0) return std::nullopt;
    return OrderIntent{true, size - holdings, kMarketBuyPrice};
  }
  if (size + holdings <= 0) return std::nullopt;
  return OrderIntent{false, size + holdings, kMarketSellPrice};
}

ValueBelief mixBelief(const std::optional<ValueBelief>& prior, double observation, double observationVariance) {
  if (!(observationVariance > 0)) throw std::invalid_argument("observation variance must be positive");
  if (!prior) return {observation, observationVariance};
  if (!(prior->variance > 0)) throw std::invalid_argument("prior variance must be positive");
  const double total = prior->variance + observationVariance;
  return {(observationVariance * prior->mean + prior->variance * observation) / total,
          prior->variance * observationVariance / total};
}

std::optional<OrderIntent> backgroundOrder(double beliefMean, Cents lastTrade, std::int64_t holdings,
                                           std::int64_t target) {
  const auto price = static_cast<Cents>(std::llround(beliefMean));
  if (price > lastTrade && target - holdings > 0) return OrderIntent{true, target - holdings, price};
  if (price < lastTrade && target + holdings > 0) return OrderIntent{false, target + holdings, std::max<Cents>(price, 1)};
  return std::nullopt;
}

std::int64_t impactQuantity(const std::vector<PriceVolume>& levels, double greed, std::size_t window) {
  if (greed < 0) throw std::invalid_argument("greed must be non-negative");
  std::int64_t visible = 0;
  for (std::size_t i = 0; i < levels.size() && i < window; ++i) visible += levels[i].volume;
  // Small epsilon so products like 0.1 * 12320 land on the intended integer.
  return static_cast<std::int64_t>(std::floor(greed * static_cast<double>(visible) + 1e-9));
}

}  // namespace mktsim
