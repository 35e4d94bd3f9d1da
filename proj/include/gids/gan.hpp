#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "gids/encoder.hpp"
#include "gids/nn.hpp"

namespace gids {

struct TrainConfig {
  int epochs = 100;
  int batch_size = 32;
  std::uint64_t seed = 0;
  float lr = 2e-4f;
  float beta1 = 0.5f;
  float beta2 = 0.999f;
  int d_steps_per_g_step = 1;
  float label_smoothing = 0.1f;  // on real labels, [0, 0.3]
  int noise_dim = nn::kDefaultNoiseDim;
  float val_fraction = 0.1f;  // held out for checkpoint selection

  // Discriminator steps also see generator samples replayed from earlier
  // in the run, and a share of fresh samples drawn at inflated noise
  // scales. Both widen the fake distribution the discriminator must
  // reject, which is what turns it into a usable one-class scorer at
  // desk-scale step counts.
  float replay_fraction = 0.5f;   // of batch_size, drawn from the buffer
  int replay_capacity = 4096;
  float noise_scale_max = 4.0f;   // half of fresh fakes use z ~ s*N(0,1), s in (1, max]

  void validate() const;
};

struct EpochStats {
  int epoch = 0;
  double d_loss = 0.0;
  double g_loss = 0.0;
  double d_real_mean = 0.0;
  double d_fake_mean = 0.0;
};
using TrainHistory = std::vector<EpochStats>;

// CSV: epoch,d_loss,g_loss,d_real_mean,d_fake_mean
void write_history_csv(const TrainHistory& history, std::ostream& out);

struct GanResult {
  nn::Model g;
  nn::Model d2;
  TrainHistory history;
};

// The full detection bundle. Both discriminators consume image pixels
// rescaled to [-1,1] (2x-1); the detector applies the same mapping.
struct TrainedGids {
  std::optional<nn::Model> d1;
  nn::Model d2;
  std::optional<nn::Model> g;
  EncoderConfig encoder_cfg;
  float detection_threshold = 0.1f;

  void validate() const;
};

// Flattens images to a {n, rows*cols} float tensor with 0/1 pixels.
nn::Tensor images_to_tensor(const std::vector<CanImage>& images);

// In-place x -> 2x - 1.
void scale_to_pm1(nn::Tensor& t);

// Supervised binary classifier: normal -> 1, attack -> 0. Deterministic
// per cfg.seed. Optionally reports the per-epoch training loss.
nn::Model train_first_discriminator(const std::vector<CanImage>& normal,
                                    const std::vector<CanImage>& attack, const TrainConfig& cfg,
                                    std::vector<double>* epoch_losses = nullptr);

// Adversarial training on normal images only. Alternates
// d_steps_per_g_step discriminator updates (real -> 1 - smoothing,
// generated -> 0) with one non-saturating generator update. Keeps the
// epoch checkpoint with the best real-vs-generated score separation on a
// validation split. Throws Error{DivergenceDetected} when D(real) stays
// below 0.1 for 5 consecutive epochs.
GanResult train_gan(const std::vector<CanImage>& normal, const TrainConfig& cfg);

// n generated images, each in [-1,1], shape {n, 1, rows, cols}.
nn::Tensor generate_samples(const nn::Model& g, int n, std::uint64_t seed);

// Discriminator scores for a batch of binary images ({0,1} pixels are
// rescaled internally). Returns one [0,1] score per image.
std::vector<float> score_images(const nn::Model& d, const std::vector<CanImage>& images);

}  // namespace gids
