#include "qvdp/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace qvdp {

namespace {

constexpr double kPi = std::numbers::pi;

void require_phonon(const DensityMatrix& rho, const char* where) {
  if (rho.tag().space != Space::phonon)
    throw DimensionError(std::string(where) + ": expected a phonon state, got " + to_string(rho.tag()));
}

// a[k] = sum_n (-1)^n rho(n, n + k) g_n^(k)(x) for k = 0..N-1
std::vector<Complex> fourier_orders(const MatrixXc& rho, double x) {
  const int n_levels = static_cast<int>(rho.rows());
  std::vector<Complex> a(static_cast<std::size_t>(n_levels));
  std::vector<double> g;
  for (int k = 0; k < n_levels; ++k) {
    g.assign(static_cast<std::size_t>(n_levels - k), 0.0);
    displaced_laguerre(k, x, g);
    Complex acc = 0.0;
    for (int n = 0; n + k < n_levels; ++n) {
      const double term = (n % 2 == 0 ? 1.0 : -1.0) * g[static_cast<std::size_t>(n)];
      acc += term * rho(n, n + k);
    }
    a[static_cast<std::size_t>(k)] = acc;
  }
  return a;
}

// (2/pi)[a0 + 2 Re sum_k e^{i k phi} a_k]; real by Hermiticity of rho
double assemble(const std::vector<Complex>& a, double phi) {
  double w = a[0].real();
  const Complex step = std::polar(1.0, phi);
  Complex phase = 1.0;
  for (std::size_t k = 1; k < a.size(); ++k) {
    phase *= step;
    w += 2.0 * (phase * a[k]).real();
  }
  return 2.0 / kPi * w;
}

}  // namespace

double WignerGrid::mass() const {
  const double h = dr();
  double total = 0.0;
  for (Eigen::Index j = 0; j < values.cols(); ++j)
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      const double weight = (i == 0 || i + 1 == values.rows()) ? 0.5 : 1.0;
      total += weight * h * r_axis[static_cast<std::size_t>(i)] * values(i, j);
    }
  return total * dphi();
}

double PhaseDistribution::total() const {
  const double h = phi_axis.size() > 1 ? phi_axis[1] - phi_axis[0] : 0.0;
  double sum = 0.0;
  for (double v : p) sum += v;
  return sum * h;
}

WignerGrid wigner_polar(const DensityMatrix& rho, const GridSpec& grid, Flags* flags) {
  require_phonon(rho, "wigner_polar");
  if (!(grid.r_max > 0.0)) throw Error("wigner_polar: r_max must be > 0");
  if (grid.n_r < 2 || grid.n_phi < 1) throw Error("wigner_polar: need n_r >= 2 and n_phi >= 1");
  const int n_max = rho.tag().n_levels - 1;
  if (grid.r_max * grid.r_max > n_max)
    raise_flag(flags, "wigner_polar: r_max^2 = " + std::to_string(grid.r_max * grid.r_max) + " exceeds n_max = " +
                          std::to_string(n_max));

  WignerGrid w;
  w.r_axis.resize(static_cast<std::size_t>(grid.n_r));
  w.phi_axis.resize(static_cast<std::size_t>(grid.n_phi));
  for (int i = 0; i < grid.n_r; ++i) w.r_axis[static_cast<std::size_t>(i)] = grid.r_max * i / (grid.n_r - 1);
  for (int j = 0; j < grid.n_phi; ++j) w.phi_axis[static_cast<std::size_t>(j)] = 2.0 * kPi * j / grid.n_phi;
  w.values.resize(grid.n_r, grid.n_phi);
  for (int i = 0; i < grid.n_r; ++i) {
    const double r = w.r_axis[static_cast<std::size_t>(i)];
    const auto a = fourier_orders(rho.matrix(), 4.0 * r * r);
    for (int j = 0; j < grid.n_phi; ++j) w.values(i, j) = assemble(a, w.phi_axis[static_cast<std::size_t>(j)]);
  }
  const double mass = w.mass();
  if (std::abs(mass - 1.0) > 0.01)
    raise_flag(flags, "wigner_polar: grid mass " + std::to_string(mass) + " differs from 1 by more than 0.01; "
                      "raise r_max or n_r");
  return w;
}

WignerGrid wigner_polar(const DensityMatrix& rho, double r_max, int n_r, int n_phi, Flags* flags) {
  return wigner_polar(rho, GridSpec{r_max, n_r, n_phi}, flags);
}

double wigner_at(const DensityMatrix& rho, Complex alpha) {
  require_phonon(rho, "wigner_at");
  const double r = std::abs(alpha);
  return assemble(fourier_orders(rho.matrix(), 4.0 * r * r), r > 0.0 ? std::arg(alpha) : 0.0);
}

PhaseDistribution phase_distribution(const WignerGrid& w, Flags* flags) {
  PhaseDistribution out;
  out.phi_axis = w.phi_axis;
  out.p.assign(w.phi_axis.size(), 0.0);
  const double h = w.dr();
  const Eigen::Index last = w.values.rows() - 1;
  for (Eigen::Index j = 0; j < w.values.cols(); ++j) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i <= last; ++i) {
      const double weight = (i == 0 || i == last) ? 0.5 : 1.0;
      acc += weight * w.r_axis[static_cast<std::size_t>(i)] * w.values(i, j);
    }
    out.p[static_cast<std::size_t>(j)] = h * acc;
  }
  if (!out.p.empty()) {
    const auto [lo, hi] = std::minmax_element(out.p.begin(), out.p.end());
    if (*lo < -0.05 * *hi)
      raise_flag(flags, "phase_distribution: negative excursion " + std::to_string(*lo) + " beyond 0.05 max P");
  }
  return out;
}

SyncMeasure sync_measure(const PhaseDistribution& p) {
  const double h = p.phi_axis.size() > 1 ? p.phi_axis[1] - p.phi_axis[0] : 0.0;
  Complex z = 0.0;
  for (std::size_t j = 0; j < p.p.size(); ++j) z += std::polar(p.p[j], p.phi_axis[j]);
  z *= h;
  SyncMeasure out;
  out.resultant = z;
  out.s = std::abs(z);
  if (out.s >= kMeanPhaseThreshold) out.mean_phase = std::arg(z);
  return out;
}

Complex mean_amplitude(const DensityMatrix& rho) {
  require_phonon(rho, "mean_amplitude");
  const MatrixXc& m = rho.matrix();
  Complex acc = 0.0;
  for (Eigen::Index n = 1; n < m.rows(); ++n) acc += std::sqrt(static_cast<double>(n)) * m(n, n - 1);
  return acc;
}

double classical_limit_radius(double gamma1_plus, double gamma1_minus, double gamma2) {
  if (!(gamma2 > 0.0)) throw Error("classical_limit_radius: gamma2 must be > 0");
  if (gamma1_plus < gamma1_minus)
    throw Error("classical_limit_radius: gamma1_plus < gamma1_minus, no classical limit cycle");
  return 2.0 * std::sqrt((gamma1_plus - gamma1_minus) / gamma2);
}

double ring_radius(const WignerGrid& w, Flags* flags) {
  const double s = sync_measure(phase_distribution(w)).s;
  if (s > 0.05) raise_flag(flags, "ring_radius: state is not phase symmetric (S = " + std::to_string(s) + ")");
  const Eigen::VectorXd profile = w.values.rowwise().mean();
  Eigen::Index best = 0;
  profile.maxCoeff(&best);
  const double r = w.r_axis[static_cast<std::size_t>(best)];
  if (best == 0 || best + 1 == profile.size()) return r;
  const double f0 = profile(best - 1), f1 = profile(best), f2 = profile(best + 1);
  const double curvature = f0 - 2.0 * f1 + f2;
  if (curvature >= 0.0) return r;
  return r + 0.5 * w.dr() * (f0 - f2) / curvature;
}

std::vector<Lobe> find_lobes(const WignerGrid& w, double threshold, double merge_distance) {
  const Eigen::Index nr = w.values.rows();
  const Eigen::Index np = w.values.cols();
  std::vector<Lobe> peaks;
  if (nr == 0 || np == 0) return peaks;
  const double cut = threshold * w.values.maxCoeff();
  // r = 0 is one point shared by every angle
  const double origin = w.values(0, 0);
  if (origin >= cut && (nr < 2 || origin >= w.values.row(1).maxCoeff())) peaks.push_back({0.0, 0.0, origin});
  for (Eigen::Index i = 1; i < nr; ++i)
    for (Eigen::Index j = 0; j < np; ++j) {
      const double v = w.values(i, j);
      if (v < cut) continue;
      bool is_max = true;
      for (Eigen::Index di = -1; di <= 1 && is_max; ++di)
        for (Eigen::Index dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          const Eigen::Index ii = i + di;
          if (ii < 0 || ii >= nr) continue;
          const Eigen::Index jj = (j + dj + np) % np;
          const double other = ii == 0 ? origin : w.values(ii, jj);
          if (other > v) {
            is_max = false;
            break;
          }
        }
      if (is_max) peaks.push_back({w.r_axis[static_cast<std::size_t>(i)], w.phi_axis[static_cast<std::size_t>(j)], v});
    }
  std::sort(peaks.begin(), peaks.end(), [](const Lobe& a, const Lobe& b) { return a.value > b.value; });
  std::vector<Lobe> lobes;
  for (const Lobe& p : peaks) {
    const bool merged = std::any_of(lobes.begin(), lobes.end(), [&](const Lobe& l) {
      return std::abs(l.position() - p.position()) < merge_distance;
    });
    if (!merged) lobes.push_back(p);
  }
  return lobes;
}

}  // namespace qvdp
