#pragma once

// Unit-suffixed configuration keys. Rates are s^-1 and Hamiltonian coefficients rad/s internally;
// table values convert as gamma = 1e3 * kHz and omega = 2 pi * Hz.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qvdp::experiments {

enum class Dimension { rate, angular, time, angle, dimensionless };

struct UnitSuffix {
  std::string_view suffix;  // including the leading underscore
  Dimension dimension;
  double to_si;
};

/// _khz, _per_s (rate); _hz_over_2pi, _per_s (angular); _us (time); _rad (angle).
const std::vector<UnitSuffix>& unit_suffixes();

struct SplitKey {
  std::string base;
  std::string_view suffix;  // empty for bare keys
};

/// Splits "gamma1_plus_khz" into ("gamma1_plus", "_khz"); bare keys return an empty suffix.
SplitKey split_unit_suffix(std::string_view key);

/// SI factor for a suffix applied to a quantity of the given dimension; nullopt when they do not fit.
std::optional<double> si_factor(std::string_view suffix, Dimension dimension);

/// Accepted suffixes for a dimension, for error messages ("_khz or _per_s").
std::string accepted_suffixes(Dimension dimension);

/// SI unit label used in CSV headers and preset listings.
std::string_view si_label(Dimension dimension);

}  // namespace qvdp::experiments
