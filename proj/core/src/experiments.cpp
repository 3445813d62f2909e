#include "combsim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace combsim {

namespace {

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': bad numeric value '" + v + "'");
  }
}

int parse_int(const std::string& key, const std::string& v) {
  const double x = parse_double(key, v);
  const int n = static_cast<int>(std::lround(x));
  if (std::abs(x - n) > 1e-9)
    throw std::invalid_argument("config key '" + key + "': expected integer, got '" + v + "'");
  return n;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trimmed(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  const auto b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw std::invalid_argument("grid needs >= 1 point");
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = 0.5 * (lo + hi);
    return v;
  }
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  return v;
}

}  // namespace

void ExperimentConfig::apply_override(const std::string& key, const std::string& value) {
  using C = ExperimentConfig;
  using Setter = std::function<void(C&, const std::string&)>;
  auto str = [](std::string C::* f) {
    return Setter([f](C& c, const std::string& v) { c.*f = v; });
  };
  auto dbl = [](double C::* f) {
    return Setter([f](C& c, const std::string& v) { c.*f = parse_double("", v); });
  };
  auto integer = [](int C::* f) {
    return Setter([f](C& c, const std::string& v) { c.*f = parse_int("", v); });
  };
  static const std::map<std::string, Setter> setters = {
      {"system", str(&C::system_path)},
      {"sequence", str(&C::sequence)},
      {"engine", str(&C::engine)},
      {"powder", str(&C::powder)},
      {"rf_dist", str(&C::rf_dist)},
      {"width_convention", str(&C::width_convention)},
      {"rf_span_fwhm", dbl(&C::rf_span_fwhm)},
      {"time_points", integer(&C::time_points)},
      {"t_max_factor", dbl(&C::t_max_factor)},
      {"match_p", dbl(&C::match_p)},
      {"match_q", dbl(&C::match_q)},
      {"slices_per_rotor", integer(&C::slices_per_rotor)},
      {"pulse_model", str(&C::pulse_model)},
      {"dipole_min", dbl(&C::dipole_min)},
      {"dipole_max", dbl(&C::dipole_max)},
      {"dipole_points", integer(&C::dipole_points)},
      {"rf_scale_min", dbl(&C::rf_scale_min)},
      {"rf_scale_max", dbl(&C::rf_scale_max)},
      {"rf_scale_points", integer(&C::rf_scale_points)},
      {"rf_delta_max", dbl(&C::rf_delta_max)},
      {"rf_delta_points", integer(&C::rf_delta_points)},
      {"offset_max_hz", dbl(&C::offset_max_hz)},
      {"offset_points", integer(&C::offset_points)},
      {"rf_I_min_khz", dbl(&C::rf_I_min_khz)},
      {"rf_I_max_khz", dbl(&C::rf_I_max_khz)},
      {"rf_I_points", integer(&C::rf_I_points)},
      {"rf_S_khz", dbl(&C::rf_S_khz)},
      {"mixing_ms", str(&C::mixing_ms)},
      {"gamma_list_deg", str(&C::gamma_list_deg)},
      {"samples_per_quarter", integer(&C::samples_per_quarter)},
      {"kappa_scale", dbl(&C::kappa_scale)},
      {"out", str(&C::out)},
  };
  const auto it = setters.find(key);
  if (it == setters.end()) throw std::invalid_argument("unknown config key '" + key + "'");
  try {
    it->second(*this, value);
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("config key '" + key + "': bad value '" + value + "'");
  }
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trimmed(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key=value");
    cfg.apply_override(trimmed(line.substr(0, eq)), trimmed(line.substr(eq + 1)));
  }
  return cfg;
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::echo() const {
  auto d = [](double v) { return fmt9(v); };
  auto i = [](int v) { return std::to_string(v); };
  return {
      {"system", system_path.empty() ? "<builtin>" : system_path},
      {"sequence", sequence},
      {"engine", engine},
      {"powder", powder},
      {"rf_dist", rf_dist},
      {"width_convention", width_convention},
      {"rf_span_fwhm", d(rf_span_fwhm)},
      {"time_points", i(time_points)},
      {"t_max_factor", d(t_max_factor)},
      {"match_p", d(match_p)},
      {"match_q", d(match_q)},
      {"slices_per_rotor", i(slices_per_rotor)},
      {"pulse_model", pulse_model},
      {"dipole_min", d(dipole_min)},
      {"dipole_max", d(dipole_max)},
      {"dipole_points", i(dipole_points)},
      {"rf_scale_min", d(rf_scale_min)},
      {"rf_scale_max", d(rf_scale_max)},
      {"rf_scale_points", i(rf_scale_points)},
      {"rf_delta_max", d(rf_delta_max)},
      {"rf_delta_points", i(rf_delta_points)},
      {"offset_max_hz", d(offset_max_hz)},
      {"offset_points", i(offset_points)},
      {"rf_I_min_khz", d(rf_I_min_khz)},
      {"rf_I_max_khz", d(rf_I_max_khz)},
      {"rf_I_points", i(rf_I_points)},
      {"rf_S_khz", d(rf_S_khz)},
      {"mixing_ms", mixing_ms},
      {"gamma_list_deg", gamma_list_deg},
      {"samples_per_quarter", i(samples_per_quarter)},
      {"kappa_scale", d(kappa_scale)},
  };
}

SpinSystem ExperimentConfig::system() const {
  return system_path.empty() ? glycine_reference() : load_spin_system(system_path);
}

std::vector<SequenceDescriptor> ExperimentConfig::sequence_list() const {
  std::vector<SequenceDescriptor> out;
  for (const auto& raw : split(sequence, ',')) {
    const std::string tok = trimmed(raw);
    if (tok.empty()) continue;
    const bool looks_like_path =
        tok.find('/') != std::string::npos || tok.find(".seq") != std::string::npos;
    out.push_back(looks_like_path ? load_sequence(tok) : sequence_by_name(tok));
  }
  if (out.empty()) throw std::invalid_argument("no sequences given");
  return out;
}

std::vector<CrystalliteOrientation> ExperimentConfig::powder_set() const {
  return parse_powder_spec(powder);
}

RfDistSpec ExperimentConfig::rf_dist_spec() const {
  RfDistSpec spec = parse_rf_dist(rf_dist);
  if (width_convention == "fwhm")
    spec.convention = WidthConvention::fwhm;
  else if (width_convention == "hwhm")
    spec.convention = WidthConvention::hwhm;
  else
    throw std::invalid_argument("width_convention must be fwhm or hwhm");
  spec.span_fwhm = rf_span_fwhm;
  return spec;
}

MatchSpec ExperimentConfig::match() const {
  MatchSpec m;
  m.p = match_p;
  m.q = match_q;
  m.slices_per_rotor = slices_per_rotor;
  return m;
}

PulseModel ExperimentConfig::pulse() const {
  PulseModel pm;
  if (pulse_model == "instantaneous") return pm;
  const auto parts = split(pulse_model, ':');
  if (parts[0] != "finite" || parts.size() > 2)
    throw std::invalid_argument("pulse_model must be 'instantaneous' or 'finite[:kHz]'");
  pm.instantaneous = false;
  if (parts.size() == 2) pm.amp_hz = 1e3 * parse_double("pulse_model", parts[1]);
  if (pm.amp_hz <= 0.0) throw std::invalid_argument("finite pulse amplitude must be positive");
  return pm;
}

std::vector<double> ExperimentConfig::gamma_values_rad() const {
  std::vector<double> out;
  for (const auto& tok : split(gamma_list_deg, ','))
    if (!trimmed(tok).empty()) out.push_back(parse_double("gamma_list_deg", trimmed(tok)) * M_PI / 180.0);
  if (out.empty()) throw std::invalid_argument("gamma_list_deg is empty");
  return out;
}

double ExperimentConfig::mixing_time_s(const SequenceDescriptor& seq, std::size_t index) const {
  if (mixing_ms == "auto") {
    if (seq.name == "dcp") return 1.8e-3;
    if (seq.name == "comb3dcp") return 4.0e-3;
    if (seq.name == "comb6dcp" || seq.name == "comb6dcp_mirror") return 12.8e-3;
    throw std::invalid_argument("no default mixing time for sequence '" + seq.name +
                                "'; set mixing_ms");
  }
  const auto parts = split(mixing_ms, ',');
  const std::string tok =
      trimmed(parts.size() == 1 ? parts[0] : parts.at(std::min(index, parts.size() - 1)));
  return 1e-3 * parse_double("mixing_ms", tok);
}

std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void write_csv(std::ostream& out, const CsvTable& table) {
  for (const auto& [k, v] : table.metadata) out << "# " << k << " = " << v << "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    out << table.columns[i] << (i + 1 < table.columns.size() ? "," : "");
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << row[i] << (i + 1 < row.size() ? "," : "");
    out << "\n";
  }
  for (const auto& line : table.footer) out << "# " << line << "\n";
}

namespace {

// Effective per-crystallite parameters for a sequence of the given subspace.
struct EffectiveModel {
  double kappa_nom = 0.0;  // schedule-defining nominal strength
  double omega_rf_I = 0.0, omega_rf_S = 0.0;

  EffectiveModel(const SpinSystem& sys, Subspace sub, const MatchSpec& match) {
    const double b = sys.b_IS_rad();
    kappa_nom = std::abs(sub == Subspace::minus ? dcp_kappa(b, M_PI / 4)
                                                : horror_kappa(b, M_PI / 4));
    omega_rf_I = match.p * sys.omega_r();
    omega_rf_S = match.q * sys.omega_r();
  }

  double crystallite_kappa(const SpinSystem& sys, const CrystalliteOrientation& cr,
                           Subspace sub) const {
    const double b = sys.b_IS_rad();
    return sub == Subspace::minus ? dcp_kappa(b, cr.beta) : horror_kappa(b, cr.beta);
  }

  // rf error fields for channel scale factors, Eq-style combinations
  void delta_fields(double scale_I, double scale_S, double& d_minus, double& d_plus) const {
    const double di = (scale_I - 1.0) * omega_rf_I;
    const double ds = (scale_S - 1.0) * omega_rf_S;
    d_minus = 0.5 * (di - ds);
    d_plus = 0.5 * (di + ds);
  }
};

double weighted_reduce(const std::vector<double>& slot,
                       const std::vector<double>& weight) {
  double acc = 0.0;
  for (std::size_t i = 0; i < slot.size(); ++i) acc += slot[i] * weight[i];
  return acc;
}

}  // namespace

EfficiencyCurves run_efficiency_vs_time(const ExperimentConfig& cfg) {
  const SpinSystem sys = cfg.system();
  const auto seqs = cfg.sequence_list();
  const auto powder = cfg.powder_set();
  const auto nodes = rf_distribution(cfg.rf_dist_spec());
  const MatchSpec match = cfg.match();
  const PulseModel pm = cfg.pulse();
  const bool exact = cfg.engine == "exact";
  if (!exact && cfg.engine != "effective")
    throw std::invalid_argument("engine must be 'exact' or 'effective'");

  EfficiencyCurves result;
  for (const auto& seq : seqs) {
    EfficiencyCurve curve;
    curve.sequence = seq.name;

    const std::size_t ntask = powder.size() * nodes.size();
    std::vector<double> weights(ntask);
    std::vector<std::vector<double>> slot(ntask);

    std::vector<double> times_s;
    if (exact) {
      const TimeGrid grid = mixing_time_grid(sys, seq, match, cfg.time_points, cfg.t_max_factor);
      times_s = grid.time_s;
      const int s_max = grid.slices_per_quarter.back();
      parallel_for(ntask, [&](std::size_t idx) {
        const auto& cr = powder[idx / nodes.size()];
        const auto& node = nodes[idx % nodes.size()];
        weights[idx] = cr.weight * node.weight;
        ExactSequenceEvaluator ev(sys, cr, seq, match, RfErrorSpec{},
                                  ChannelMult{node.scale_I, node.scale_S}, pm, s_max);
        auto& dst = slot[idx];
        dst.reserve(grid.slices_per_quarter.size());
        for (int s : grid.slices_per_quarter) dst.push_back(ev.efficiency(s));
      });
    } else {
      const EffectiveModel model(sys, seq.subspace, match);
      const double t_nom = seq.total_quarter_turns() * 0.5 * M_PI / model.kappa_nom;
      const auto fractions = linspace(0.0, cfg.t_max_factor, cfg.time_points);
      for (double f : fractions)
        if (f > 0.0) times_s.push_back(f * t_nom);
      parallel_for(ntask, [&](std::size_t idx) {
        const auto& cr = powder[idx / nodes.size()];
        const auto& node = nodes[idx % nodes.size()];
        weights[idx] = cr.weight * node.weight;
        const double k_cr = model.crystallite_kappa(sys, cr, seq.subspace);
        double dm = 0.0, dp = 0.0;
        model.delta_fields(node.scale_I, node.scale_S, dm, dp);
        auto& dst = slot[idx];
        dst.reserve(times_s.size());
        for (double t : times_s) {
          const double f = t / t_nom;
          EffectiveParams p;
          p.kappa = model.kappa_nom;
          p.gamma_angle = cr.gamma;
          p.subspace = seq.subspace;
          p.delta_rf_minus = dm * f;
          p.delta_rf_plus = dp * f;
          dst.push_back(effective_efficiency(seq, p, (k_cr / model.kappa_nom) * f));
        }
      });
    }

    curve.time_ms.push_back(0.0);
    curve.eff.push_back(0.0);
    for (std::size_t j = 0; j < times_s.size(); ++j) {
      std::vector<double> column(ntask);
      for (std::size_t i = 0; i < ntask; ++i) column[i] = slot[i][j];
      const double e = weighted_reduce(column, weights);
      curve.time_ms.push_back(times_s[j] * 1e3);
      curve.eff.push_back(e);
      if (e > curve.peak_eff) {
        curve.peak_eff = e;
        curve.peak_time_ms = times_s[j] * 1e3;
      }
    }
    result.curves.push_back(std::move(curve));
  }
  return result;
}

CsvTable to_csv(const EfficiencyCurves& r, const ExperimentConfig& cfg) {
  CsvTable t;
  t.metadata = cfg.echo();
  t.metadata.emplace_back("operation", "efficiency_vs_time");
  t.columns = {"sequence", "time_ms", "efficiency"};
  for (const auto& c : r.curves)
    for (std::size_t j = 0; j < c.time_ms.size(); ++j)
      t.rows.push_back({c.sequence, fmt9(c.time_ms[j]), fmt9(c.eff[j])});
  for (const auto& c : r.curves)
    t.footer.push_back("peak sequence=" + c.sequence + " efficiency=" + fmt9(c.peak_eff) +
                       " time_ms=" + fmt9(c.peak_time_ms));
  return t;
}

std::vector<RobustnessMap> run_map_rf_vs_dipole(const ExperimentConfig& cfg) {
  const SpinSystem sys = cfg.system();
  const auto seqs = cfg.sequence_list();
  const MatchSpec match = cfg.match();
  const auto rf_axis = linspace(cfg.rf_scale_min, cfg.rf_scale_max, cfg.rf_scale_points);
  const auto dip_axis = linspace(cfg.dipole_min, cfg.dipole_max, cfg.dipole_points);
  const bool exact = cfg.engine == "exact";
  if (!exact && cfg.engine != "effective")
    throw std::invalid_argument("engine must be 'exact' or 'effective'");

  std::vector<RobustnessMap> maps;
  for (std::size_t is = 0; is < seqs.size(); ++is) {
    const auto& seq = seqs[is];
    RobustnessMap m;
    m.sequence = seq.name;
    m.rf_scale = rf_axis;
    m.dipole_scale = dip_axis;
    m.eff.assign(rf_axis.size(), std::vector<double>(dip_axis.size(), 0.0));

    if (!exact) {
      const EffectiveModel model(sys, seq.subspace, match);
      m.mixing_ms = seq.total_quarter_turns() * 0.5 * M_PI / model.kappa_nom * 1e3;
      parallel_for(rf_axis.size(), [&](std::size_t ir) {
        double dm = 0.0, dp = 0.0;
        model.delta_fields(rf_axis[ir], rf_axis[ir], dm, dp);
        EffectiveParams p;
        p.kappa = model.kappa_nom;
        p.subspace = seq.subspace;
        p.delta_rf_minus = dm;
        p.delta_rf_plus = dp;
        for (std::size_t id = 0; id < dip_axis.size(); ++id)
          m.eff[ir][id] = effective_efficiency(seq, p, dip_axis[id]);
      });
    } else {
      const auto powder = cfg.powder_set();
      const double t_mix = cfg.mixing_time_s(seq, is);
      m.mixing_ms = t_mix * 1e3;
      const int s_q = slices_per_quarter_for_time(sys, seq, match, t_mix);
      const PulseModel pm = cfg.pulse();
      const std::size_t ncell = rf_axis.size() * dip_axis.size();
      std::vector<double> cells(ncell * powder.size());
      parallel_for(ncell * powder.size(), [&](std::size_t idx) {
        const std::size_t cell = idx / powder.size();
        const auto& cr = powder[idx % powder.size()];
        const double rf = rf_axis[cell / dip_axis.size()];
        const double dip = dip_axis[cell % dip_axis.size()];
        ExactSequenceEvaluator ev(sys, cr, seq, match, RfErrorSpec{}, ChannelMult{rf, rf}, pm,
                                  s_q, dip);
        cells[idx] = cr.weight * ev.efficiency(s_q);
      });
      for (std::size_t cell = 0; cell < ncell; ++cell) {
        double acc = 0.0;
        for (std::size_t ic = 0; ic < powder.size(); ++ic)
          acc += cells[cell * powder.size() + ic];
        m.eff[cell / dip_axis.size()][cell % dip_axis.size()] = acc;
      }
    }
    maps.push_back(std::move(m));
  }
  return maps;
}

CsvTable to_csv(const std::vector<RobustnessMap>& r, const ExperimentConfig& cfg) {
  CsvTable t;
  t.metadata = cfg.echo();
  t.metadata.emplace_back("operation", "map_rf_vs_dipole");
  t.columns = {"sequence", "rf_scale", "dipole_scale", "efficiency"};
  for (const auto& m : r)
    for (std::size_t i = 0; i < m.rf_scale.size(); ++i)
      for (std::size_t j = 0; j < m.dipole_scale.size(); ++j)
        t.rows.push_back(
            {m.sequence, fmt9(m.rf_scale[i]), fmt9(m.dipole_scale[j]), fmt9(m.eff[i][j])});
  for (const auto& m : r)
    t.footer.push_back("mixing_ms sequence=" + m.sequence + " value=" + fmt9(m.mixing_ms));
  return t;
}

OffsetRfProfiles run_offset_rf_profiles(const ExperimentConfig& cfg) {
  if (cfg.engine != "exact")
    throw std::invalid_argument(
        "offset and independent-channel rf profiles require the exact engine");
  const SpinSystem sys = cfg.system();
  const auto seqs = cfg.sequence_list();
  const auto powder = cfg.powder_set();
  const MatchSpec match = cfg.match();
  const PulseModel pm = cfg.pulse();

  OffsetRfProfiles result;
  for (std::size_t is = 0; is < seqs.size(); ++is) {
    const auto& seq = seqs[is];
    const double t_mix = cfg.mixing_time_s(seq, is);
    const int s_q = slices_per_quarter_for_time(sys, seq, match, t_mix);

    auto make_grid = [&](const std::string& mode, const std::vector<double>& axis,
                         auto make_err) {
      ProfileGrid g;
      g.sequence = seq.name;
      g.mode = mode;
      g.x1 = g.x2 = axis;
      g.mixing_ms = t_mix * 1e3;
      g.eff.assign(axis.size(), std::vector<double>(axis.size(), 0.0));
      const std::size_t ncell = axis.size() * axis.size();
      std::vector<double> cells(ncell * powder.size());
      parallel_for(ncell * powder.size(), [&](std::size_t idx) {
        const std::size_t cell = idx / powder.size();
        const auto& cr = powder[idx % powder.size()];
        const RfErrorSpec err = make_err(axis[cell / axis.size()], axis[cell % axis.size()]);
        cells[idx] =
            cr.weight * simulate_sequence_exact(sys, cr, seq, match, err, s_q, pm);
      });
      for (std::size_t cell = 0; cell < ncell; ++cell) {
        double acc = 0.0;
        for (std::size_t ic = 0; ic < powder.size(); ++ic)
          acc += cells[cell * powder.size() + ic];
        g.eff[cell / axis.size()][cell % axis.size()] = acc;
      }
      return g;
    };

    const auto rf_axis = linspace(-cfg.rf_delta_max, cfg.rf_delta_max, cfg.rf_delta_points);
    result.grids.push_back(make_grid("rf", rf_axis, [](double a, double b) {
      RfErrorSpec e;
      e.delta_I = a;
      e.delta_S = b;
      return e;
    }));
    const auto off_axis = linspace(-cfg.offset_max_hz, cfg.offset_max_hz, cfg.offset_points);
    result.grids.push_back(make_grid("offset", off_axis, [](double a, double b) {
      RfErrorSpec e;
      e.offset_I_hz = a;
      e.offset_S_hz = b;
      return e;
    }));
  }
  return result;
}

CsvTable to_csv(const OffsetRfProfiles& r, const ExperimentConfig& cfg) {
  CsvTable t;
  t.metadata = cfg.echo();
  t.metadata.emplace_back("operation", "offset_rf_profiles");
  t.columns = {"sequence", "mode", "x1", "x2", "efficiency"};
  for (const auto& g : r.grids)
    for (std::size_t i = 0; i < g.x1.size(); ++i)
      for (std::size_t j = 0; j < g.x2.size(); ++j)
        t.rows.push_back({g.sequence, g.mode, fmt9(g.x1[i]), fmt9(g.x2[j]), fmt9(g.eff[i][j])});
  return t;
}

double profile_fwhm(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3) return 0.0;
  std::size_t imax = 0;
  for (std::size_t i = 1; i < y.size(); ++i)
    if (y[i] > y[imax]) imax = i;
  const double half = 0.5 * y[imax];
  if (half <= 0.0) return 0.0;
  double left = 0.0, right = 0.0;
  bool has_left = false, has_right = false;
  for (std::size_t i = imax; i-- > 0;) {
    if (y[i] <= half) {
      const double f = (half - y[i]) / (y[i + 1] - y[i]);
      left = x[i] + f * (x[i + 1] - x[i]);
      has_left = true;
      break;
    }
  }
  for (std::size_t i = imax + 1; i < y.size(); ++i) {
    if (y[i] <= half) {
      const double f = (half - y[i - 1]) / (y[i] - y[i - 1]);
      right = x[i - 1] + f * (x[i] - x[i - 1]);
      has_right = true;
      break;
    }
  }
  return (has_left && has_right) ? right - left : 0.0;
}

MatchingProfiles run_matching_profile(const ExperimentConfig& cfg) {
  if (cfg.engine != "exact")
    throw std::invalid_argument("matching profiles require the exact engine");
  const SpinSystem sys = cfg.system();
  const auto seqs = cfg.sequence_list();
  const auto powder = cfg.powder_set();
  const PulseModel pm = cfg.pulse();
  const auto rf_axis = linspace(cfg.rf_I_min_khz, cfg.rf_I_max_khz, cfg.rf_I_points);

  MatchingProfiles result;
  for (std::size_t is = 0; is < seqs.size(); ++is) {
    const auto& seq = seqs[is];
    MatchingProfile prof;
    prof.sequence = seq.name;
    prof.rf_I_khz = rf_axis;
    const double t_mix = cfg.mixing_time_s(seq, is);
    prof.mixing_ms = t_mix * 1e3;

    std::vector<double> cells(rf_axis.size() * powder.size());
    parallel_for(rf_axis.size() * powder.size(), [&](std::size_t idx) {
      const std::size_t ir = idx / powder.size();
      const auto& cr = powder[idx % powder.size()];
      MatchSpec match = cfg.match();
      match.p = rf_axis[ir] * 1e3 / sys.spin_rate_hz;
      match.q = cfg.rf_S_khz * 1e3 / sys.spin_rate_hz;
      const int s_q = slices_per_quarter_for_time(sys, seq, match, t_mix);
      cells[idx] =
          cr.weight * simulate_sequence_exact(sys, cr, seq, match, RfErrorSpec{}, s_q, pm);
    });
    prof.eff.resize(rf_axis.size());
    for (std::size_t ir = 0; ir < rf_axis.size(); ++ir) {
      double acc = 0.0;
      for (std::size_t ic = 0; ic < powder.size(); ++ic)
        acc += cells[ir * powder.size() + ic];
      prof.eff[ir] = acc;
    }
    prof.fwhm_khz = profile_fwhm(prof.rf_I_khz, prof.eff);
    result.profiles.push_back(std::move(prof));
  }
  return result;
}

CsvTable to_csv(const MatchingProfiles& r, const ExperimentConfig& cfg) {
  CsvTable t;
  t.metadata = cfg.echo();
  t.metadata.emplace_back("operation", "matching_profile");
  t.columns = {"sequence", "rf_I_khz", "efficiency"};
  for (const auto& p : r.profiles)
    for (std::size_t i = 0; i < p.rf_I_khz.size(); ++i)
      t.rows.push_back({p.sequence, fmt9(p.rf_I_khz[i]), fmt9(p.eff[i])});
  for (const auto& p : r.profiles)
    t.footer.push_back("fwhm_khz sequence=" + p.sequence + " value=" + fmt9(p.fwhm_khz) +
                       " mixing_ms=" + fmt9(p.mixing_ms));
  return t;
}

TrajectorySet run_trajectory(const ExperimentConfig& cfg) {
  const auto seqs = cfg.sequence_list();
  TrajectorySet result;
  for (const auto& seq : seqs) {
    for (double gamma : cfg.gamma_values_rad()) {
      EffectiveParams p;
      p.kappa = 1.0;  // duration scale only; the trajectory depends on angles
      p.gamma_angle = gamma;
      p.subspace = seq.subspace;
      TrajectorySet::Item item;
      item.sequence = seq.name;
      item.gamma_deg = gamma * 180.0 / M_PI;
      item.points = trajectory_export(seq, p, cfg.samples_per_quarter, cfg.kappa_scale);
      result.items.push_back(std::move(item));
    }
  }
  return result;
}

CsvTable to_csv(const TrajectorySet& r, const ExperimentConfig& cfg) {
  CsvTable t;
  t.metadata = cfg.echo();
  t.metadata.emplace_back("operation", "trajectory");
  t.columns = {"sequence", "gamma_deg", "phase_index", "segment_label", "progress", "x", "y", "z"};
  for (const auto& item : r.items)
    for (const auto& pt : item.points)
      t.rows.push_back({item.sequence, fmt9(item.gamma_deg), std::to_string(pt.phase_index),
                        pt.label, fmt9(pt.progress), fmt9(pt.v.x), fmt9(pt.v.y), fmt9(pt.v.z)});
  return t;
}

}  // namespace combsim
