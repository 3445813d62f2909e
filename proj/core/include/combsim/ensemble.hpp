#pragma once
// Deterministic orientation and rf-field ensembles: quadrature powder
// schemes, truncated rf inhomogeneity distributions, and a reproducible
// (worker-count-independent) parallel averaging helper.

#include "combsim/interactions.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace combsim {

struct RfNode {
  double scale_I = 1.0;
  double scale_S = 1.0;
  double weight = 1.0;
};

struct EnsembleSpec {
  std::vector<CrystalliteOrientation> crystallites;
  std::vector<RfNode> rf_nodes;
  void validate(double tol = 1e-12) const;  // weights nonnegative, each set sums to 1
};

enum class PowderKind { beta_gauss_legendre, zcw3, grid };

// beta_gauss_legendre(n): n Gauss-Legendre nodes in cos(beta), alpha=gamma=0.
// zcw3(n): three-angle Fibonacci lattice, n snapped up to a Fibonacci number.
// grid(n): n^3 points, beta midpoints on (0, pi/2) weighted by sin(beta),
// alpha/gamma uniform; grid(1) is the single orientation (0, pi/4, 0).
std::vector<CrystalliteOrientation> powder_scheme(PowderKind kind, int n);

// "beta_gl:32", "zcw3:4180", "grid:8", or "file:path" (whitespace columns
// alpha beta gamma weight in degrees; weights renormalized).
std::vector<CrystalliteOrientation> parse_powder_spec(const std::string& spec);
std::vector<CrystalliteOrientation> load_crystallites(const std::string& path);

int snap_to_fibonacci(int n);

// Gauss-Legendre nodes/weights on [-1, 1].
std::vector<std::pair<double, double>> gauss_legendre(int n);

enum class RfDistShape { delta, lorentzian, gaussian };
enum class WidthConvention { fwhm, hwhm };

struct RfDistSpec {
  RfDistShape shape = RfDistShape::delta;
  double width_percent = 0.0;        // of the nominal field, per `convention`
  int n_nodes = 21;                  // per channel axis
  bool correlated = true;            // same scale on both channels
  WidthConvention convention = WidthConvention::fwhm;
  double span_fwhm = 1.5;            // truncation half-range in FWHM units
};

// Gauss-Legendre nodes over the truncated distribution, weights proportional
// to the density and renormalized to sum 1 (mean scale stays 1 by symmetry).
// correlated=false produces the n^2 product grid of two independent axes.
std::vector<RfNode> rf_distribution(const RfDistSpec& spec);

// "delta", "lorentzian:5", "gaussian:10:correlated", "lorentzian:2:product",
// optional 4th field = node count.
RfDistSpec parse_rf_dist(const std::string& spec);
std::string rf_dist_label(const RfDistSpec& spec);

// Weighted average of fn over the ensemble product set. Deterministic:
// results land in indexed slots and are reduced in fixed order, so the value
// is bit-identical for any worker count.
double average(const std::function<double(const CrystalliteOrientation&, const RfNode&)>& fn,
               const EnsembleSpec& spec, bool parallel = true);

// Worker count from COMBSIM_WORKERS (>=1) or hardware concurrency.
int worker_count();
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  bool parallel = true);

}  // namespace combsim
