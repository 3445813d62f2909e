#include "combsim/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace combsim {

void EnsembleSpec::validate(double tol) const {
  auto check = [&](double sum, bool any_negative, const char* what) {
    if (any_negative) throw std::invalid_argument(std::string(what) + ": negative weight");
    if (std::abs(sum - 1.0) > tol)
      throw std::invalid_argument(std::string(what) + ": weights do not sum to 1");
  };
  double s = 0.0;
  bool neg = false;
  for (const auto& c : crystallites) {
    s += c.weight;
    neg = neg || c.weight < 0.0;
  }
  check(s, neg, "crystallites");
  s = 0.0;
  neg = false;
  for (const auto& n : rf_nodes) {
    s += n.weight;
    neg = neg || n.weight < 0.0;
  }
  check(s, neg, "rf_nodes");
}

std::vector<std::pair<double, double>> gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  std::vector<std::pair<double, double>> out(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Chebyshev-like initial guess, Newton on P_n
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    out[i] = {-x, w};  // store ascending; initial guesses start near +1
    out[n - 1 - i] = {x, w};
  }
  return out;
}

int snap_to_fibonacci(int n) {
  if (n < 1) throw std::invalid_argument("snap_to_fibonacci: n must be >= 1");
  long a = 1, b = 1;
  while (b < n) {
    const long c = a + b;
    a = b;
    b = c;
  }
  return static_cast<int>(b);
}

std::vector<CrystalliteOrientation> powder_scheme(PowderKind kind, int n) {
  if (n < 1) throw std::invalid_argument("powder_scheme: n must be >= 1");
  std::vector<CrystalliteOrientation> out;
  switch (kind) {
    case PowderKind::beta_gauss_legendre: {
      for (const auto& [x, w] : gauss_legendre(n))
        out.push_back({0.0, std::acos(x), 0.0, 0.5 * w});
      break;
    }
    case PowderKind::zcw3: {
      const int nf = snap_to_fibonacci(n);
      // g2 = previous Fibonacci number, g1 = the one before that
      long g1 = 1, g2 = 1;
      while (g1 + g2 < nf) {
        const long c = g1 + g2;
        g1 = g2;
        g2 = c;
      }
      if (nf == 1) g1 = g2 = 1;
      for (int j = 0; j < nf; ++j) {
        const double u = (j + 0.5) / nf;
        const double alpha = 2.0 * M_PI * std::fmod(double(j) * g1 / nf, 1.0);
        const double gamma = 2.0 * M_PI * std::fmod(double(j) * g2 / nf, 1.0);
        out.push_back({alpha, std::acos(1.0 - 2.0 * u), gamma, 1.0 / nf});
      }
      break;
    }
    case PowderKind::grid: {
      double wsum = 0.0;
      std::vector<double> betas(n), wb(n);
      for (int j = 0; j < n; ++j) {
        betas[j] = (j + 0.5) * M_PI / (2.0 * n);
        wb[j] = std::sin(betas[j]);
        wsum += wb[j];
      }
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            out.push_back({2.0 * M_PI * i / n, betas[j], 2.0 * M_PI * k / n,
                           wb[j] / (wsum * n * n)});
      break;
    }
  }
  return out;
}

std::vector<CrystalliteOrientation> load_crystallites(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open crystallite file: " + path);
  std::vector<CrystalliteOrientation> out;
  std::string line;
  int lineno = 0;
  const double d2r = M_PI / 180.0;
  double wsum = 0.0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double a, b, g, w;
    if (!(ls >> a)) continue;
    if (!(ls >> b >> g >> w))
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected 'alpha beta gamma weight' in degrees");
    if (w < 0.0)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": negative weight");
    out.push_back({a * d2r, b * d2r, g * d2r, w});
    wsum += w;
  }
  if (out.empty() || wsum <= 0.0) throw std::runtime_error(path + ": no usable crystallites");
  for (auto& c : out) c.weight /= wsum;
  return out;
}

std::vector<CrystalliteOrientation> parse_powder_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "file") {
    if (arg.empty()) throw std::invalid_argument("powder spec 'file:' needs a path");
    return load_crystallites(arg);
  }
  int n = 0;
  try {
    n = std::stoi(arg);
  } catch (const std::exception&) {
    throw std::invalid_argument("powder spec '" + spec + "': bad count");
  }
  if (kind == "beta_gl") return powder_scheme(PowderKind::beta_gauss_legendre, n);
  if (kind == "zcw3") return powder_scheme(PowderKind::zcw3, n);
  if (kind == "grid") return powder_scheme(PowderKind::grid, n);
  throw std::invalid_argument("unknown powder scheme '" + kind +
                              "' (expected beta_gl, zcw3, grid or file)");
}

namespace {

double fwhm_fraction(const RfDistSpec& spec) {
  const double w = spec.width_percent / 100.0;
  return spec.convention == WidthConvention::fwhm ? w : 2.0 * w;
}

std::vector<std::pair<double, double>> axis_nodes(const RfDistSpec& spec) {
  const double fwhm = fwhm_fraction(spec);
  const double half_span = spec.span_fwhm * fwhm;
  std::vector<std::pair<double, double>> nodes;
  double wsum = 0.0;
  for (const auto& [x, w] : gauss_legendre(spec.n_nodes)) {
    const double s = 1.0 + half_span * x;
    double rho = 0.0;
    if (spec.shape == RfDistShape::lorentzian) {
      const double g = 0.5 * fwhm;
      rho = 1.0 / (1.0 + (s - 1.0) * (s - 1.0) / (g * g));
    } else {  // gaussian
      const double sigma = fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
      rho = std::exp(-0.5 * (s - 1.0) * (s - 1.0) / (sigma * sigma));
    }
    nodes.push_back({s, w * rho});
    wsum += w * rho;
  }
  for (auto& [s, w] : nodes) w /= wsum;
  return nodes;
}

}  // namespace

std::vector<RfNode> rf_distribution(const RfDistSpec& spec) {
  if (spec.shape == RfDistShape::delta || spec.width_percent == 0.0) return {RfNode{1, 1, 1}};
  if (spec.n_nodes < 1) throw std::invalid_argument("rf_distribution: n_nodes must be >= 1");
  if (spec.width_percent < 0.0) throw std::invalid_argument("rf_distribution: negative width");
  const auto axis = axis_nodes(spec);
  std::vector<RfNode> out;
  if (spec.correlated) {
    for (const auto& [s, w] : axis) out.push_back({s, s, w});
  } else {
    for (const auto& [si, wi] : axis)
      for (const auto& [ss, ws] : axis) out.push_back({si, ss, wi * ws});
  }
  return out;
}

RfDistSpec parse_rf_dist(const std::string& spec) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : spec) {
    if (ch == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);
  RfDistSpec d;
  const std::string& shape = parts[0];
  if (shape == "delta") {
    d.shape = RfDistShape::delta;
    if (parts.size() > 1) throw std::invalid_argument("rf dist 'delta' takes no arguments");
    return d;
  }
  if (shape == "lorentzian")
    d.shape = RfDistShape::lorentzian;
  else if (shape == "gaussian")
    d.shape = RfDistShape::gaussian;
  else
    throw std::invalid_argument("unknown rf distribution '" + shape + "'");
  if (parts.size() < 2) throw std::invalid_argument("rf dist '" + shape + "' needs a width");
  try {
    d.width_percent = std::stod(parts[1]);
  } catch (const std::exception&) {
    throw std::invalid_argument("rf dist width '" + parts[1] + "' is not a number");
  }
  if (parts.size() > 2) {
    if (parts[2] == "correlated")
      d.correlated = true;
    else if (parts[2] == "product")
      d.correlated = false;
    else
      throw std::invalid_argument("rf dist mode must be 'correlated' or 'product', got '" +
                                  parts[2] + "'");
  }
  if (parts.size() > 3) {
    try {
      d.n_nodes = std::stoi(parts[3]);
    } catch (const std::exception&) {
      throw std::invalid_argument("rf dist node count '" + parts[3] + "' is not a number");
    }
  }
  if (parts.size() > 4) throw std::invalid_argument("rf dist spec has too many fields");
  return d;
}

std::string rf_dist_label(const RfDistSpec& spec) {
  if (spec.shape == RfDistShape::delta || spec.width_percent == 0.0) return "delta";
  std::ostringstream out;
  out << (spec.shape == RfDistShape::lorentzian ? "lorentzian" : "gaussian") << ":"
      << spec.width_percent << (spec.correlated ? ":correlated" : ":product");
  return out.str();
}

int worker_count() {
  if (const char* env = std::getenv("COMBSIM_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, bool parallel) {
  const int workers = parallel ? std::min<std::size_t>(worker_count(), n) : 1;
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mu;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(error_mu);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double average(const std::function<double(const CrystalliteOrientation&, const RfNode&)>& fn,
               const EnsembleSpec& spec, bool parallel) {
  spec.validate(1e-9);
  const std::size_t nc = spec.crystallites.size();
  const std::size_t nn = spec.rf_nodes.size();
  std::vector<double> slot(nc * nn, 0.0);
  parallel_for(nc * nn,
               [&](std::size_t idx) {
                 const auto& cr = spec.crystallites[idx / nn];
                 const auto& node = spec.rf_nodes[idx % nn];
                 slot[idx] = cr.weight * node.weight * fn(cr, node);
               },
               parallel);
  double acc = 0.0;
  for (double v : slot) acc += v;  // fixed order => worker-count independent
  return acc;
}

}  // namespace combsim
