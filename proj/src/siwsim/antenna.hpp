#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "siwsim/errors.hpp"
#include "siwsim/kvdoc.hpp"
#include "siwsim/units.hpp"

// Closed-form design calculator for a substrate-integrated-waveguide cavity
// resonator with a meandered radiating slot, plus the via fence that forms
// the cavity walls. Frequencies are Hz, lengths are mm throughout.
namespace siwsim::antenna {

struct SubstrateSpec {
  double eps_r = 2.2;
  double tan_delta = 0.0009;
  double h_mm = 1.575;

  void validate() const;
};

// Rogers RT/duroid 5880, the laminate the reference design is built on.
SubstrateSpec duroid_5880();

// TE_m0l cavity mode (no field variation across the substrate thickness).
struct Mode {
  int m = 1;
  int l = 1;

  std::string label() const;  // e.g. "TE102"
};

struct CavityDesign {
  double a_mm = 0;  // broad wall width (sets the TE10 cutoff)
  double d_mm = 0;  // cavity length along the guide axis
  SubstrateSpec substrate;
  double f0_hz = 0;  // TE101 resonance the cavity was designed for
  double fc_hz = 0;  // TE10 cutoff
};

// TE10 cutoff of a dielectric-filled guide of width a.
double cutoff_te10_hz(double a_mm, double eps_r);

// Resonance of the a x d cavity for the given TE_m0l mode.
double resonant_freq_hz(double a_mm, double d_mm, double eps_r, Mode mode);

// Closed-form synthesis: place the TE10 cutoff delta_hz below the wanted
// resonance, derive the width from the cutoff and the length as half a
// guided wavelength at f0. The synthesized cavity resonates at exactly
// f0_hz in TE101 (the relation is algebraically exact).
CavityDesign design_cavity(double f0_hz, double delta_hz,
                           const SubstrateSpec& substrate);

struct ModeProximity {
  double delta_hz = 0;
  double a_mm = 0;
  double d_mm = 0;
  Mode nearest;          // higher-order mode closest to f0
  double f_mode_hz = 0;  // its resonance
  double spacing_hz = 0; // f_mode - f0, positive for any valid design
};

// Sweep the cutoff offset and report how far the nearest higher-order mode
// sits from the operating frequency. Candidate modes are TE_m0l for
// m,l in [1,4] excluding the fundamental.
std::vector<ModeProximity> mode_chart(double f0_hz,
                                      const std::vector<double>& deltas_hz,
                                      const SubstrateSpec& substrate);

// Fabrication rules for the via fence. Throws ConstraintViolation with
// rule "via_pitch_ratio" when diameter/pitch < 0.5 (leaky wall) and
// "via_diameter_ratio" when diameter exceeds a tenth of the free-space
// wavelength at f0.
void check_via_constraints(double diameter_mm, double pitch_mm, double f0_hz);

struct ViaLayout {
  double diameter_mm = 0;
  double pitch_mm = 0;
  // Via centres tracing the cavity perimeter, wall by wall starting at the
  // origin corner. Each wall starts at its corner and steps by the pitch;
  // the leftover gap before the next corner never exceeds one pitch.
  std::vector<std::pair<double, double>> positions_mm;
};

ViaLayout synth_via_wall(const CavityDesign& cavity, double diameter_mm,
                         double pitch_mm);

enum class SlotAxis { longitudinal, transverse };

struct MeanderSegment {
  double length_mm = 0;
  SlotAxis axis = SlotAxis::longitudinal;
};

struct MeanderSlot {
  double total_mm = 0;  // electrical half wavelength in the dielectric
  double long_mm = 0;   // nominal straight run, lambda/16
  double short_mm = 0;  // nominal connecting run, lambda/32
  double width_mm = 0;  // slot width, a tenth of the long run
  // Alternating long/short runs; the final run is truncated so segment
  // lengths sum to total_mm exactly.
  std::vector<MeanderSegment> segments;
};

MeanderSlot design_meander(double f0_hz, double eps_eff);

enum class Pattern { isotropic, hemispheric };

std::string to_string(Pattern p);
Pattern pattern_from_string(const std::string& s);

// What the radio layer consumes: centre frequency, usable bandwidth, peak
// gain and the pattern shape.
struct AntennaSpec {
  double f0_hz = hz_from_ghz(2.398);
  double bandwidth_hz = hz_from_mhz(20.0);
  double gain_dbi = 4.0;
  Pattern pattern = Pattern::hemispheric;

  void validate() const;

  // Gain toward a direction given its elevation above the antenna's
  // horizontal plane. The hemispheric pattern radiates downward: full gain
  // at and below the horizon, back_attenuation_db less above it.
  double gain_dbi_toward(double elevation_rad, double back_attenuation_db) const;
};

struct AntennaOverrides {
  std::optional<double> f0_hz;
  std::optional<double> bandwidth_hz;
  std::optional<double> gain_dbi;
  std::optional<Pattern> pattern;
};

// Measured figures of the fabricated reference antenna, override as needed.
AntennaSpec export_antenna_spec(const AntennaOverrides& overrides = {});

// Full design output: everything a spec file carries.
struct DesignReport {
  CavityDesign cavity;
  ViaLayout vias;
  MeanderSlot meander;
  AntennaSpec spec;
};

kvdoc::Document to_document(const DesignReport& report);
AntennaSpec read_antenna_spec(const kvdoc::Document& doc);
AntennaSpec load_antenna_spec(const std::string& path);

// Published dimension table of the fabricated design, keyed by the original
// drawing labels. Raw strings are preserved so serialization is byte-stable.
class ReferenceDimensions {
 public:
  static const ReferenceDimensions& builtin();
  static ReferenceDimensions parse(std::string_view text);

  double value_mm(const std::string& label) const;
  const std::vector<std::pair<std::string, std::string>>& rows() const {
    return rows_;
  }
  std::string serialize() const;

 private:
  std::vector<std::pair<std::string, std::string>> rows_;
};

}  // namespace siwsim::antenna
