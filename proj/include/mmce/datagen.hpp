#pragma once

// Synthetic rider population with exact ground-truth response curves and a
// controllable confounded assignment policy (high-ability riders get small
// incentives as bias_strength -> 1).

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mmce/heads.hpp"
#include "mmce/train.hpp"

namespace mmce {

struct GenConfig {
  std::size_t n_riders = 1000;
  std::size_t feature_width = 8;
  double bias_strength = 0.9;   // beta in [0,1]; 0 = random assignment
  double blank_fraction = 0.2;  // in (0,1)
  double t_max = 5.0;           // grid [0, t_max] at 0.1 resolution
  double noise_scale = 0.1;
  std::uint64_t seed = 42;

  void validate() const;
  TreatmentGrid grid() const { return TreatmentGrid::uniform(t_max); }
};

struct Rider {
  std::int64_t id = 0;
  double ability = 0.0;  // latent, in [0,1]
  std::vector<double> x;
  // Ground-truth curve parameters. Natural value rises with ability, the
  // incremental ceilings fall with it, and increments are concave in t.
  double att_base = 0.0;  // attendance prob at t=0
  double att_inc = 0.0;   // attendance increment ceiling
  double ord_base = 0.0;  // post-attendance orders at t=0
  double ord_inc = 0.0;   // orders increment ceiling
  double rate = 0.8;      // saturation rate of 1-exp(-rate*t)
};

std::vector<Rider> gen_population(const GenConfig& cfg);

double true_attendance(const Rider& r, double t, const GenConfig& cfg);
double true_orders_pa(const Rider& r, double t, const GenConfig& cfg);
double true_orders(const Rider& r, double t, const GenConfig& cfg);

double assign_treatment(const Rider& r, const GenConfig& cfg, std::mt19937_64& rng);

struct Outcome {
  double attendance = 0.0;
  double orders = 0.0;
};
Outcome sample_outcome(const Rider& r, double t, const GenConfig& cfg, std::mt19937_64& rng);

struct GroundTruthRow {
  std::int64_t id = 0;
  double ability = 0.0;
  double t = 0.0;
  double true_attendance = 0.0;
  double true_orders_pa = 0.0;
  double true_orders = 0.0;
};

struct Generated {
  std::vector<Rider> riders;
  Dataset dataset;
  std::vector<GroundTruthRow> truth;  // full grid per rider
};

Generated build_dataset(const GenConfig& cfg);

// Writes the dataset CSV and the ground-truth sidecar CSV.
void emit_dataset(const GenConfig& cfg, const std::string& data_path,
                  const std::string& truth_path);

}  // namespace mmce
