#pragma once

// Phase-space observables. Wigner functions are normalized so that the integral over the
// complex plane is 1 (vacuum W(0) = 2/pi); polar grids use dimensionless alpha = r e^{i phi}.

#include <Eigen/Core>

#include <optional>
#include <vector>

#include "qvdp/fock.hpp"

namespace qvdp {

struct GridSpec {
  double r_max = 4.0;
  int n_r = 60;
  int n_phi = 120;
};

struct WignerGrid {
  std::vector<double> r_axis;    // uniform, r_axis.front() = 0, r_axis.back() = r_max
  std::vector<double> phi_axis;  // 2 pi j / n_phi
  Eigen::MatrixXd values;        // values(i, j) = W(r_i, phi_j)

  double dr() const { return r_axis.size() > 1 ? r_axis[1] - r_axis[0] : 0.0; }
  double dphi() const { return phi_axis.size() > 1 ? phi_axis[1] - phi_axis[0] : 0.0; }
  /// Integral of W r dr dphi: trapezoid in r, periodic rectangle rule in phi.
  double mass() const;
};

struct PhaseDistribution {
  std::vector<double> phi_axis;
  std::vector<double> p;

  double total() const;
};

struct SyncMeasure {
  double s = 0.0;
  std::optional<double> mean_phase;  // absent when s < 1e-6
  Complex resultant{};

  double circular_variance() const { return 1.0 - s; }
};

inline constexpr double kMeanPhaseThreshold = 1e-6;

/// W(alpha) = (2/pi) sum_n (-1)^n <n| D^dag(alpha) rho D(alpha) |n>, evaluated with exact
/// Laguerre matrix elements of D(2 alpha) per Fourier order in phi. Flags r_max^2 > n_max
/// and a grid mass off by more than 0.01.
WignerGrid wigner_polar(const DensityMatrix& rho, const GridSpec& grid = {}, Flags* flags = nullptr);
WignerGrid wigner_polar(const DensityMatrix& rho, double r_max, int n_r, int n_phi, Flags* flags = nullptr);

double wigner_at(const DensityMatrix& rho, Complex alpha);

/// P(phi) = int W r dr (trapezoid). Flags negative excursions beyond 0.05 max P.
PhaseDistribution phase_distribution(const WignerGrid& w, Flags* flags = nullptr);

/// S = |int e^{i phi} P dphi|, mean_phase = arg of the same integral.
SyncMeasure sync_measure(const PhaseDistribution& p);

Complex mean_amplitude(const DensityMatrix& rho);

/// 2 sqrt((g1p - g1m) / g2). Throws when g1p < g1m or g2 <= 0.
double classical_limit_radius(double gamma1_plus, double gamma1_minus, double gamma2);

/// Peak of the angle-averaged Wigner profile, refined by a parabola through the grid maximum.
/// Flags grids whose S exceeds 0.05 (radius of a non-ring state).
double ring_radius(const WignerGrid& w, Flags* flags = nullptr);

struct Lobe {
  double r = 0.0;
  double phi = 0.0;
  double value = 0.0;

  Complex position() const { return std::polar(r, phi); }
};

/// Local maxima of W above threshold * max(W), merged when closer than merge_distance in the
/// plane. Sorted by decreasing value.
std::vector<Lobe> find_lobes(const WignerGrid& w, double threshold = 0.5, double merge_distance = 0.3);

}  // namespace qvdp
