#include "siwsim/antenna.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace siwsim::antenna {
namespace {

constexpr double kPi = std::numbers::pi;

// Fabrication limits for a solid post wall.
constexpr double kMinDiameterPitchRatio = 0.5;
constexpr double kMaxDiameterWavelengthRatio = 0.1;

// Ratio of long meander runs to the straight slot wavelength.
constexpr int kLongDivisor = 16;
constexpr int kShortDivisor = 32;
constexpr double kWidthFraction = 0.1;

}  // namespace

void SubstrateSpec::validate() const {
  if (!(eps_r >= 1.0)) {
    throw ValidationError("substrate eps_r must be >= 1");
  }
  if (!(tan_delta >= 0.0)) {
    throw ValidationError("substrate tan_delta must be >= 0");
  }
  if (!(h_mm > 0.0)) {
    throw ValidationError("substrate thickness must be positive");
  }
}

SubstrateSpec duroid_5880() { return SubstrateSpec{2.2, 0.0009, 1.575}; }

std::string Mode::label() const {
  return "TE" + std::to_string(m) + "0" + std::to_string(l);
}

double cutoff_te10_hz(double a_mm, double eps_r) {
  if (!(a_mm > 0.0)) {
    throw ValidationError("guide width must be positive");
  }
  if (!(eps_r >= 1.0)) {
    throw ValidationError("eps_r must be >= 1");
  }
  return kSpeedOfLightMps / (2.0 * m_from_mm(a_mm) * std::sqrt(eps_r));
}

double resonant_freq_hz(double a_mm, double d_mm, double eps_r, Mode mode) {
  if (!(a_mm > 0.0) || !(d_mm > 0.0)) {
    throw ValidationError("cavity dimensions must be positive");
  }
  if (!(eps_r >= 1.0)) {
    throw ValidationError("eps_r must be >= 1");
  }
  if (mode.m < 1 || mode.l < 1) {
    throw ValidationError("mode indices must be >= 1");
  }
  double a = m_from_mm(a_mm);
  double d = m_from_mm(d_mm);
  double mx = mode.m / a;
  double lz = mode.l / d;
  return kSpeedOfLightMps / (2.0 * std::sqrt(eps_r)) *
         std::sqrt(mx * mx + lz * lz);
}

CavityDesign design_cavity(double f0_hz, double delta_hz,
                           const SubstrateSpec& substrate) {
  substrate.validate();
  if (!(f0_hz > 0.0)) {
    throw ValidationError("operating frequency must be positive");
  }
  if (!(delta_hz > 0.0) || !(delta_hz < f0_hz)) {
    throw ValidationError("cutoff offset must lie in (0, f0)");
  }

  double fc_hz = f0_hz - delta_hz;
  double root_eps = std::sqrt(substrate.eps_r);
  double a = kSpeedOfLightMps / (2.0 * fc_hz * root_eps);

  // Propagation constant of the TE10 guide at f0; the cavity length is half
  // a guided wavelength, which pins the TE101 resonance to f0 exactly.
  double k = 2.0 * kPi * f0_hz * root_eps / kSpeedOfLightMps;
  double beta = std::sqrt(k * k - (kPi / a) * (kPi / a));
  double d = kPi / beta;

  CavityDesign out;
  out.a_mm = mm_from_m(a);
  out.d_mm = mm_from_m(d);
  out.substrate = substrate;
  out.f0_hz = f0_hz;
  out.fc_hz = fc_hz;
  return out;
}

std::vector<ModeProximity> mode_chart(double f0_hz,
                                      const std::vector<double>& deltas_hz,
                                      const SubstrateSpec& substrate) {
  std::vector<ModeProximity> out;
  out.reserve(deltas_hz.size());
  for (double delta : deltas_hz) {
    CavityDesign cavity = design_cavity(f0_hz, delta, substrate);
    ModeProximity row;
    row.delta_hz = delta;
    row.a_mm = cavity.a_mm;
    row.d_mm = cavity.d_mm;
    bool first = true;
    for (int m = 1; m <= 4; ++m) {
      for (int l = 1; l <= 4; ++l) {
        if (m == 1 && l == 1) continue;
        Mode mode{m, l};
        double f = resonant_freq_hz(cavity.a_mm, cavity.d_mm, substrate.eps_r, mode);
        // Ties (square cavity) resolve to the lower mode indices.
        if (first || std::abs(f - f0_hz) < std::abs(row.f_mode_hz - f0_hz)) {
          row.nearest = mode;
          row.f_mode_hz = f;
          first = false;
        }
      }
    }
    row.spacing_hz = row.f_mode_hz - f0_hz;
    out.push_back(row);
  }
  return out;
}

void check_via_constraints(double diameter_mm, double pitch_mm, double f0_hz) {
  if (!(diameter_mm > 0.0) || !(pitch_mm > 0.0)) {
    throw ValidationError("via diameter and pitch must be positive");
  }
  if (!(f0_hz > 0.0)) {
    throw ValidationError("operating frequency must be positive");
  }
  if (diameter_mm / pitch_mm < kMinDiameterPitchRatio) {
    std::ostringstream os;
    os << "via diameter/pitch = " << diameter_mm / pitch_mm
       << " is below the minimum " << kMinDiameterPitchRatio
       << "; use pitch <= " << diameter_mm / kMinDiameterPitchRatio
       << " mm for this diameter";
    throw ConstraintViolation("via_pitch_ratio", os.str());
  }
  double lambda0_mm = mm_from_m(kSpeedOfLightMps / f0_hz);
  double max_diameter_mm = kMaxDiameterWavelengthRatio * lambda0_mm;
  if (diameter_mm > max_diameter_mm) {
    std::ostringstream os;
    os << "via diameter " << diameter_mm << " mm exceeds "
       << kMaxDiameterWavelengthRatio << " x free-space wavelength ("
       << lambda0_mm << " mm); use diameter <= " << max_diameter_mm << " mm";
    throw ConstraintViolation("via_diameter_ratio", os.str());
  }
}

ViaLayout synth_via_wall(const CavityDesign& cavity, double diameter_mm,
                         double pitch_mm) {
  check_via_constraints(diameter_mm, pitch_mm, cavity.f0_hz);

  ViaLayout layout;
  layout.diameter_mm = diameter_mm;
  layout.pitch_mm = pitch_mm;

  // Walk each wall from its corner; the next wall supplies the far corner,
  // so strides that land exactly on it are dropped.
  auto place = [&](double x0, double y0, double dx, double dy, double len) {
    int k = static_cast<int>(std::ceil(len / pitch_mm - 1e-9)) - 1;
    for (int i = 0; i <= k; ++i) {
      double s = i * pitch_mm;
      layout.positions_mm.emplace_back(x0 + dx * s, y0 + dy * s);
    }
  };
  place(0.0, 0.0, 1.0, 0.0, cavity.a_mm);
  place(cavity.a_mm, 0.0, 0.0, 1.0, cavity.d_mm);
  place(cavity.a_mm, cavity.d_mm, -1.0, 0.0, cavity.a_mm);
  place(0.0, cavity.d_mm, 0.0, -1.0, cavity.d_mm);
  return layout;
}

MeanderSlot design_meander(double f0_hz, double eps_eff) {
  if (!(f0_hz > 0.0)) {
    throw ValidationError("operating frequency must be positive");
  }
  if (!(eps_eff >= 1.0)) {
    throw ValidationError("effective permittivity must be >= 1");
  }
  double lambda_mm =
      mm_from_m(kSpeedOfLightMps / (f0_hz * std::sqrt(eps_eff)));

  MeanderSlot slot;
  slot.total_mm = lambda_mm / 2.0;
  slot.long_mm = lambda_mm / kLongDivisor;
  slot.short_mm = lambda_mm / kShortDivisor;
  slot.width_mm = slot.long_mm * kWidthFraction;

  double remaining = slot.total_mm;
  bool long_next = true;
  while (remaining > 0.0) {
    double nominal = long_next ? slot.long_mm : slot.short_mm;
    double len = std::min(nominal, remaining);
    slot.segments.push_back(
        {len, long_next ? SlotAxis::longitudinal : SlotAxis::transverse});
    remaining -= len;
    long_next = !long_next;
  }
  return slot;
}

std::string to_string(Pattern p) {
  return p == Pattern::isotropic ? "isotropic" : "hemispheric";
}

Pattern pattern_from_string(const std::string& s) {
  if (s == "isotropic") return Pattern::isotropic;
  if (s == "hemispheric") return Pattern::hemispheric;
  throw ValidationError("unknown antenna pattern '" + s +
                        "' (expected isotropic or hemispheric)");
}

void AntennaSpec::validate() const {
  if (!(f0_hz > 0.0)) {
    throw ValidationError("antenna f0 must be positive");
  }
  if (!(bandwidth_hz > 0.0)) {
    throw ValidationError("antenna bandwidth must be positive");
  }
  if (!std::isfinite(gain_dbi)) {
    throw ValidationError("antenna gain must be finite");
  }
}

double AntennaSpec::gain_dbi_toward(double elevation_rad,
                                    double back_attenuation_db) const {
  if (pattern == Pattern::isotropic) return gain_dbi;
  return elevation_rad <= 0.0 ? gain_dbi : gain_dbi - back_attenuation_db;
}

AntennaSpec export_antenna_spec(const AntennaOverrides& overrides) {
  AntennaSpec spec;
  if (overrides.f0_hz) spec.f0_hz = *overrides.f0_hz;
  if (overrides.bandwidth_hz) spec.bandwidth_hz = *overrides.bandwidth_hz;
  if (overrides.gain_dbi) spec.gain_dbi = *overrides.gain_dbi;
  if (overrides.pattern) spec.pattern = *overrides.pattern;
  spec.validate();
  return spec;
}

kvdoc::Document to_document(const DesignReport& report) {
  kvdoc::Document doc;
  auto& top = doc.top();
  top.set_double("f0_hz", report.spec.f0_hz);
  top.set_double("bandwidth_hz", report.spec.bandwidth_hz);
  top.set_double("gain_dbi", report.spec.gain_dbi);
  top.set("pattern", to_string(report.spec.pattern));
  top.set_double("fc_hz", report.cavity.fc_hz);

  auto& sub = doc.add_section("substrate");
  sub.set_double("eps_r", report.cavity.substrate.eps_r);
  sub.set_double("tan_delta", report.cavity.substrate.tan_delta);
  sub.set_double("h_mm", report.cavity.substrate.h_mm);

  auto& cav = doc.add_section("cavity");
  cav.set_double("a_mm", report.cavity.a_mm);
  cav.set_double("d_mm", report.cavity.d_mm);

  auto& vias = doc.add_section("vias");
  vias.set_double("diameter_mm", report.vias.diameter_mm);
  vias.set_double("pitch_mm", report.vias.pitch_mm);
  vias.set_int("count", static_cast<std::int64_t>(report.vias.positions_mm.size()));

  auto& meander = doc.add_section("meander");
  meander.set_double("total_mm", report.meander.total_mm);
  meander.set_double("long_mm", report.meander.long_mm);
  meander.set_double("short_mm", report.meander.short_mm);
  meander.set_double("width_mm", report.meander.width_mm);
  meander.set_int("segments", static_cast<std::int64_t>(report.meander.segments.size()));
  return doc;
}

AntennaSpec read_antenna_spec(const kvdoc::Document& doc) {
  AntennaSpec spec;
  spec.f0_hz = doc.top().get_double("f0_hz");
  spec.gain_dbi = doc.top().get_double("gain_dbi");
  spec.bandwidth_hz = doc.top().get_double_or("bandwidth_hz", spec.bandwidth_hz);
  spec.pattern = pattern_from_string(doc.top().get_or("pattern", "hemispheric"));
  spec.validate();
  return spec;
}

AntennaSpec load_antenna_spec(const std::string& path) {
  return read_antenna_spec(kvdoc::Document::load(path));
}

namespace {

// Dimension table of the fabricated reference antenna (mm).
constexpr const char* kReferenceTable =
    "W = 59.550818\n"
    "LW = 4.9\n"
    "L1 = 44.609\n"
    "CW = 0.4\n"
    "S = 1.972\n"
    "Saw = 1.25\n"
    "Sav11 = 4.95\n"
    "Sav12 = 6.2\n"
    "Sav13 = 7.46\n"
    "Sav14 = 7.4\n"
    "Sav15 = 6.21\n"
    "Sav16 = 11.161\n"
    "Sav17 = 12\n"
    "Sav18 = 10.76\n"
    "Sav19 = 9.92\n"
    "Cs = 28.025\n"
    "C1 = 29.61\n"
    "Se1 = 15\n"
    "D = 1\n";

}  // namespace

const ReferenceDimensions& ReferenceDimensions::builtin() {
  static const ReferenceDimensions table = parse(kReferenceTable);
  return table;
}

ReferenceDimensions ReferenceDimensions::parse(std::string_view text) {
  kvdoc::Document doc = kvdoc::Document::parse(text, "reference dimensions");
  if (!doc.sections().empty()) {
    throw ValidationError("reference dimension table must not contain sections");
  }
  ReferenceDimensions out;
  out.rows_ = doc.top().entries();
  return out;
}

double ReferenceDimensions::value_mm(const std::string& label) const {
  for (const auto& [k, v] : rows_) {
    if (k == label) {
      std::size_t used = 0;
      double value = std::stod(v, &used);
      if (used != v.size()) {
        throw ValidationError("dimension '" + label + "' is not a number: " + v);
      }
      return value;
    }
  }
  throw ValidationError("unknown dimension label '" + label + "'");
}

std::string ReferenceDimensions::serialize() const {
  std::string out;
  for (const auto& [k, v] : rows_) {
    out += k;
    out += " = ";
    out += v;
    out += "\n";
  }
  return out;
}

}  // namespace siwsim::antenna
