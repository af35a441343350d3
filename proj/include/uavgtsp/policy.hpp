#pragma once

// Sequence-to-sequence actor and its critic.
//
// Encoder: one embedding per element of {depot, cluster_1..cluster_K},
// e_k = W_b * feature_k. Decoder: an LSTM cell whose hidden state drives a
// two-stage attention over the embeddings; the second stage produces logits
// that are clipped with C_L * tanh(.), masked, and soft-maxed into the
// distribution over the next cluster. Cluster heads are picked by the
// one-step energy rule once a cluster is emitted.

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "uavgtsp/adam.hpp"
#include "uavgtsp/energy.hpp"
#include "uavgtsp/problem.hpp"
#include "uavgtsp/report.hpp"
#include "uavgtsp/rng.hpp"
#include "uavgtsp/tensor.hpp"

namespace uavgtsp {

inline constexpr std::size_t kFeatureDim = 4;
inline constexpr double kLogitClip = 10.0;

struct PolicyParams {
  std::size_t embed_dim = 0;
  nn::Tensor w_embed;        // [D x 4]
  nn::Tensor lstm_w_input;   // [4D x D], gate blocks ordered i, f, g, o
  nn::Tensor lstm_w_hidden;  // [4D x D]
  nn::Tensor lstm_bias;      // [4D x 1]
  nn::Tensor phi_a;          // [1 x D]
  nn::Tensor w1;             // [D x D]
  nn::Tensor w2;             // [D x D]
  nn::Tensor phi_g;          // [1 x D]
  nn::Tensor w3;             // [D x D]
  nn::Tensor w4;             // [D x D]

  // Every weight uniform in [-1/sqrt(D), 1/sqrt(D)].
  static PolicyParams init(std::size_t embed_dim, Rng& rng);
  std::vector<nn::Tensor> tensors() const;
  static std::vector<std::string> names();
  PolicyParams clone() const;
  // Throws ValidationError on a shape mismatch or a non-finite entry.
  void validate() const;
};

struct CriticParams {
  std::size_t embed_dim = 0;
  nn::Tensor fc1_w;  // [D x D]
  nn::Tensor fc1_b;  // [D x 1]
  nn::Tensor fc2_w;  // [1 x D]
  nn::Tensor fc2_b;  // [1 x 1]

  static CriticParams init(std::size_t embed_dim, Rng& rng);
  std::vector<nn::Tensor> tensors() const;
  static std::vector<std::string> names();
  CriticParams clone() const;
  void validate() const;
};

// Permutation-invariant input features, one column per element: the depot
// column is (x, y, 0, 0); a cluster column is its centroid and the mean
// absolute deviation of its nodes per axis. Coordinates are divided by the
// area size. Shape [4 x (K+1)].
nn::Tensor input_features(const Instance& instance);

// Embeddings and the attention projections that do not depend on the step.
struct Encoded {
  nn::Tensor embeddings;  // [D x (K+1)], column k is e_k
  nn::Tensor proj_w1;     // W1 * E
  nn::Tensor proj_w3;     // W3 * E
  nn::Tensor ones;        // [1 x (K+1)] constant for explicit column expansion
  std::size_t elements() const { return embeddings.cols(); }
};

nn::Tensor embed(const Instance& instance, const PolicyParams& params);
Encoded encode(const Instance& instance, const PolicyParams& params);

struct DecoderState {
  nn::Tensor hidden;  // [D x 1]
  nn::Tensor cell;    // [D x 1]
  std::vector<double> mask;  // 0 or -inf per element
  std::size_t step = 0;
  std::size_t last = 0;  // element emitted at the previous step

  // Zero hidden/cell and an all-zero mask; the depot has not been emitted yet.
  static DecoderState initial(std::size_t embed_dim, std::size_t elements);
  // Marks `element` as emitted: mask entry becomes -inf, it becomes `last`.
  void emit(std::size_t element);
  std::size_t masked_count() const;
};

struct StepOutput {
  nn::Tensor log_probs;            // [1 x (K+1)], -inf on masked entries
  std::vector<double> probs;       // exp(log_probs); masked entries exactly 0
  std::vector<double> logits;      // clipped logits before masking, in [-C_L, C_L]
  std::vector<double> attention;   // first-stage weights a_t
  DecoderState next;               // hidden/cell advanced; mask unchanged
};

// Runs the LSTM on the embedding of state.last, then the attention stages.
// Throws ContractError when every element is masked.
StepOutput decode_step(const PolicyParams& params, const Encoded& encoded,
                       const DecoderState& state);

// Index of the largest probability among unmasked entries, lowest index on ties.
std::size_t argmax_choice(const std::vector<double>& probs, const std::vector<double>& mask);
// Inverse-CDF draw over unmasked entries.
std::size_t sample_choice(const std::vector<double>& probs, const std::vector<double>& mask,
                          Rng& rng);

// argmin over the nodes of `cluster` of
// omega * ground(cluster, n) + (1 - omega) * (leg(prev, n) + collection); lowest
// index on ties.
std::size_t select_cluster_head(const WeightedCosts& costs, Point prev, std::size_t cluster);

enum class DecodeMode { sample, greedy };

struct StepTrace {
  std::size_t chosen = 0;
  std::vector<double> probs;
  std::vector<double> logits;
  std::vector<double> mask;
};

struct Rollout {
  Tour tour;
  nn::Tensor log_prob;        // scalar on the actor graph
  double log_prob_value = 0;  // sum of log P(pi_t | ...)
  double reward = 0;          // -total weighted energy, joules
  EnergyBreakdown energy;
  nn::Tensor critic_context;  // detached sum_k a^k e_k of the first decoded step
  std::vector<StepTrace> trace;
};

// Emits the depot first, then K clusters, choosing cluster heads as each
// cluster is emitted. `seed` drives sampling and is ignored for greedy decode.
Rollout rollout(const Instance& instance, const EnergyParams& energy, const PolicyParams& params,
                DecodeMode mode, std::uint64_t seed = 0);

// Greedy-decoded rollout timed as a solver run.
SolveReport solve_drl(const Instance& instance, const EnergyParams& energy,
                      const PolicyParams& params);

// fc2 * relu(fc1 * context + b1) + b2, as a [1 x 1] tensor on the critic graph.
nn::Tensor critic_forward(const CriticParams& critic, const nn::Tensor& context);
// Critic estimate for an instance, in normalized reward units. The context
// is built from the first decoded step's attention and carries no gradient
// back into the actor.
nn::Tensor critic_value(const Instance& instance, const PolicyParams& params,
                        const CriticParams& critic);

struct Checkpoint {
  PolicyParams actor;
  CriticParams critic;
  double reward_scale = 1.0;  // rewards are divided by this during training
  std::size_t trained_clusters = 0;
  std::size_t trained_cluster_size = 0;
  std::uint64_t step = 0;  // completed training steps
  nn::AdamState actor_opt;
  nn::AdamState critic_opt;
  std::map<std::string, std::string> metadata;
};

inline constexpr int kCheckpointVersion = 1;

std::string checkpoint_to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const std::string& text);
// Writes through a temporary file and renames, so a failed write never
// clobbers the previous checkpoint.
void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace uavgtsp
