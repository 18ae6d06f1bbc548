#pragma once

#include <cstdint>
#include <optional>

#include "labelsearch/embeddings.hpp"
#include "labelsearch/types.hpp"

namespace labelsearch {

/// Parameters of a paired-space fixture with a planted labeling.
struct SynthSpec {
  int n_samples = 2000;
  int num_classes = 5;
  int latent_dim = 8;
  int d1 = 32;
  int d2 = 32;
  double cluster_separation = 6.0;  // pairwise distance between latent class means
  double noise_sigma = 1.0;         // per-coordinate latent spread within a class
  double ambient_sigma = 0.1;       // isotropic noise added in each output space
  double offset = 8.0;              // norm of a shared mean shift in both spaces
  bool spurious = false;
  double spurious_separation = 6.0;
  double min_probe_accuracy = 0.99;  // required train accuracy of planted probes
  std::uint64_t seed = 0;

  void validate() const;
};

/// Probe accuracies measured while certifying a fixture.
struct SynthDiagnostics {
  int attempts = 0;
  double planted_phi1 = 0.0;  // train accuracy
  double planted_phi2 = 0.0;  // train accuracy
  std::optional<double> spurious_phi1;          // train accuracy
  std::optional<double> spurious_phi2_heldout;  // fit on one half, scored on the other
};

struct SynthData {
  EmbeddingSpace phi1;
  EmbeddingSpace phi2;
  GroundTruthLabels truth;
  std::optional<GroundTruthLabels> spurious;
  SynthDiagnostics diagnostics;
};

/// Latent blobs z ~ N(c_y, sigma^2 I) mapped as phi1 = A1 z + e1 and
/// phi2 = A2 rho(R z) + e2 with random full-rank A1, A2, a random rotation
/// R and the monotone warp rho(u) = u + tanh(u)/2. With `spurious`, phi1
/// also carries an independent balanced labeling that phi2 does not see.
/// Each attempt is certified by linear probes; after 5 failed attempts a
/// data error is thrown.
SynthData generate(const SynthSpec& spec);

/// Train accuracy of a standardized linear probe with bias, fit by gradient
/// descent. Used to certify fixtures.
double probe_train_accuracy(const Matrix& features, const HardLabels& labels, int num_classes);

/// Fits on `train_mask` rows and scores on the rest.
double probe_heldout_accuracy(const Matrix& features, const HardLabels& labels, int num_classes,
                              const std::vector<bool>& train_mask);

}  // namespace labelsearch
