#ifndef LOGNLOGS_DATA_HPP
#define LOGNLOGS_DATA_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lognlogs/errors.hpp"

namespace lognlogs {

/// One detected source: photon count y ~ Poisson(a * S + b) given flux S.
struct ObservedSource {
  std::uint64_t y = 0;
  double a = 1.0;  // effective area, counts per unit flux
  double b = 0.0;  // expected background counts

  friend bool operator==(const ObservedSource&, const ObservedSource&) = default;
};

class Dataset {
public:
  Dataset() = default;
  explicit Dataset(std::vector<ObservedSource> sources) : sources_(std::move(sources)) {
    if (sources_.empty()) throw DomainError("Dataset: no sources");
    for (std::size_t i = 0; i < sources_.size(); ++i) {
      const auto& s = sources_[i];
      if (!(s.a > 0.0) || !std::isfinite(s.a)) {
        throw DomainError("Dataset: source " + std::to_string(i + 1) + " has nonpositive area");
      }
      if (!(s.b >= 0.0) || !std::isfinite(s.b)) {
        throw DomainError("Dataset: source " + std::to_string(i + 1) + " has negative background");
      }
    }
  }

  std::size_t size() const noexcept { return sources_.size(); }
  const std::vector<ObservedSource>& sources() const noexcept { return sources_; }
  const ObservedSource& operator[](std::size_t i) const { return sources_[i]; }

  bool background_free() const noexcept {
    return std::all_of(sources_.begin(), sources_.end(),
                       [](const ObservedSource& s) { return s.b == 0.0; });
  }

  /// Plug-in fluxes max(y - b, 0.5) / a.
  std::vector<double> naive_fluxes() const {
    std::vector<double> out(sources_.size());
    for (std::size_t i = 0; i < sources_.size(); ++i) {
      const auto& s = sources_[i];
      out[i] = std::max(static_cast<double>(s.y) - s.b, 0.5) / s.a;
    }
    return out;
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;

private:
  std::vector<ObservedSource> sources_;
};

}  // namespace lognlogs

#endif  // LOGNLOGS_DATA_HPP
