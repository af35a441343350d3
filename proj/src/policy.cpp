#include "uavgtsp/policy.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "uavgtsp/errors.hpp"

namespace uavgtsp {

using nn::Tensor;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Tensor uniform_tensor(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
  std::vector<double> v(rows * cols);
  for (double& x : v) x = rng.uniform(-bound, bound);
  return Tensor::from(rows, cols, std::move(v), true);
}

void check_tensor(const Tensor& t, std::size_t rows, std::size_t cols, const std::string& name) {
  if (!t.defined() || t.rows() != rows || t.cols() != cols) {
    throw ValidationError("parameter " + name + " has shape " + t.shape().str() +
                          ", expected " + nn::Shape{rows, cols}.str());
  }
  for (double v : t.data()) {
    if (!std::isfinite(v)) throw ValidationError("parameter " + name + " is not finite");
  }
}

std::vector<Tensor> clone_all(const std::vector<Tensor>& ts) {
  std::vector<Tensor> out;
  for (const auto& t : ts) out.push_back(t.clone());
  return out;
}

}  // namespace

PolicyParams PolicyParams::init(std::size_t d, Rng& rng) {
  if (d == 0) throw ValidationError("embedding width must be positive");
  const double b = 1.0 / std::sqrt(static_cast<double>(d));
  PolicyParams p;
  p.embed_dim = d;
  p.w_embed = uniform_tensor(d, kFeatureDim, b, rng);
  p.lstm_w_input = uniform_tensor(4 * d, d, b, rng);
  p.lstm_w_hidden = uniform_tensor(4 * d, d, b, rng);
  p.lstm_bias = uniform_tensor(4 * d, 1, b, rng);
  p.phi_a = uniform_tensor(1, d, b, rng);
  p.w1 = uniform_tensor(d, d, b, rng);
  p.w2 = uniform_tensor(d, d, b, rng);
  p.phi_g = uniform_tensor(1, d, b, rng);
  p.w3 = uniform_tensor(d, d, b, rng);
  p.w4 = uniform_tensor(d, d, b, rng);
  return p;
}

std::vector<Tensor> PolicyParams::tensors() const {
  return {w_embed, lstm_w_input, lstm_w_hidden, lstm_bias, phi_a, w1, w2, phi_g, w3, w4};
}

std::vector<std::string> PolicyParams::names() {
  return {"w_embed", "lstm_w_input", "lstm_w_hidden", "lstm_bias", "phi_a",
          "w1",      "w2",           "phi_g",         "w3",        "w4"};
}

PolicyParams PolicyParams::clone() const {
  auto t = clone_all(tensors());
  return {embed_dim, t[0], t[1], t[2], t[3], t[4], t[5], t[6], t[7], t[8], t[9]};
}

void PolicyParams::validate() const {
  const std::size_t d = embed_dim;
  if (d == 0) throw ValidationError("policy embedding width is zero");
  const std::vector<std::pair<std::size_t, std::size_t>> shapes{
      {d, kFeatureDim}, {4 * d, d}, {4 * d, d}, {4 * d, 1}, {1, d},
      {d, d},           {d, d},     {1, d},     {d, d},     {d, d}};
  const auto ts = tensors();
  const auto ns = names();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    check_tensor(ts[i], shapes[i].first, shapes[i].second, ns[i]);
  }
}

CriticParams CriticParams::init(std::size_t d, Rng& rng) {
  if (d == 0) throw ValidationError("embedding width must be positive");
  const double b = 1.0 / std::sqrt(static_cast<double>(d));
  CriticParams c;
  c.embed_dim = d;
  c.fc1_w = uniform_tensor(d, d, b, rng);
  c.fc1_b = uniform_tensor(d, 1, b, rng);
  c.fc2_w = uniform_tensor(1, d, b, rng);
  c.fc2_b = uniform_tensor(1, 1, b, rng);
  return c;
}

std::vector<Tensor> CriticParams::tensors() const { return {fc1_w, fc1_b, fc2_w, fc2_b}; }

std::vector<std::string> CriticParams::names() { return {"fc1_w", "fc1_b", "fc2_w", "fc2_b"}; }

CriticParams CriticParams::clone() const {
  auto t = clone_all(tensors());
  return {embed_dim, t[0], t[1], t[2], t[3]};
}

void CriticParams::validate() const {
  const std::size_t d = embed_dim;
  if (d == 0) throw ValidationError("critic width is zero");
  check_tensor(fc1_w, d, d, "fc1_w");
  check_tensor(fc1_b, d, 1, "fc1_b");
  check_tensor(fc2_w, 1, d, "fc2_w");
  check_tensor(fc2_b, 1, 1, "fc2_b");
}

Tensor input_features(const Instance& instance) {
  const std::size_t k = instance.num_clusters();
  const std::size_t cols = k + 1;
  const double s = instance.area_size;
  std::vector<double> f(kFeatureDim * cols, 0.0);
  auto set = [&](std::size_t row, std::size_t col, double v) { f[row * cols + col] = v; };
  set(0, 0, instance.depot.x / s);
  set(1, 0, instance.depot.y / s);
  for (std::size_t c = 0; c < k; ++c) {
    const Cluster& nodes = instance.clusters[c];
    const double count = static_cast<double>(nodes.size());
    double mx = 0.0, my = 0.0;
    for (Point p : nodes) {
      mx += p.x;
      my += p.y;
    }
    mx /= count;
    my /= count;
    double dx = 0.0, dy = 0.0;
    for (Point p : nodes) {
      dx += std::abs(p.x - mx);
      dy += std::abs(p.y - my);
    }
    set(0, c + 1, mx / s);
    set(1, c + 1, my / s);
    set(2, c + 1, dx / count / s);
    set(3, c + 1, dy / count / s);
  }
  return Tensor::from(kFeatureDim, cols, std::move(f));
}

Tensor embed(const Instance& instance, const PolicyParams& params) {
  return nn::matmul(params.w_embed, input_features(instance));
}

Encoded encode(const Instance& instance, const PolicyParams& params) {
  Encoded e;
  e.embeddings = embed(instance, params);
  e.proj_w1 = nn::matmul(params.w1, e.embeddings);
  e.proj_w3 = nn::matmul(params.w3, e.embeddings);
  e.ones = Tensor::full(1, e.embeddings.cols(), 1.0);
  return e;
}

DecoderState DecoderState::initial(std::size_t embed_dim, std::size_t elements) {
  DecoderState s;
  s.hidden = Tensor::zeros(embed_dim, 1);
  s.cell = Tensor::zeros(embed_dim, 1);
  s.mask.assign(elements, 0.0);
  return s;
}

void DecoderState::emit(std::size_t element) {
  if (element >= mask.size() || mask[element] == kNegInf) {
    throw ContractError("element " + std::to_string(element) + " cannot be emitted");
  }
  mask[element] = kNegInf;
  last = element;
  ++step;
}

std::size_t DecoderState::masked_count() const {
  std::size_t n = 0;
  for (double m : mask) n += m == kNegInf;
  return n;
}

StepOutput decode_step(const PolicyParams& params, const Encoded& enc,
                       const DecoderState& state) {
  const std::size_t d = params.embed_dim;
  if (state.masked_count() == state.mask.size()) {
    throw ContractError("decode_step: every element is masked");
  }
  using namespace nn;

  // LSTM cell fed with the embedding of the previously emitted element.
  const Tensor x = column(enc.embeddings, state.last);
  const Tensor gates =
      add(add(matmul(params.lstm_w_input, x), matmul(params.lstm_w_hidden, state.hidden)),
          params.lstm_bias);
  const Tensor in_gate = sigmoid(slice_rows(gates, 0, d));
  const Tensor forget_gate = sigmoid(slice_rows(gates, d, d));
  const Tensor candidate = nn::tanh(slice_rows(gates, 2 * d, d));
  const Tensor out_gate = sigmoid(slice_rows(gates, 3 * d, d));
  const Tensor cell = add(mul(forget_gate, state.cell), mul(in_gate, candidate));
  const Tensor hidden = mul(out_gate, nn::tanh(cell));

  // u_t^k = phi_a tanh(W1 e_k + W2 h_t); a_t = softmax(u_t).
  const Tensor query = matmul(matmul(params.w2, hidden), enc.ones);
  const Tensor scores = matmul(params.phi_a, nn::tanh(add(enc.proj_w1, query)));
  const Tensor attention = softmax(scores);
  // g_t = sum_k a_t^k e_k.
  const Tensor context = matmul(enc.embeddings, transpose(attention));
  // u~_t^k = phi_g tanh(W3 e_k + W4 g_t), clipped to [-C_L, C_L].
  const Tensor glimpse = matmul(matmul(params.w4, context), enc.ones);
  const Tensor raw_logits = matmul(params.phi_g, nn::tanh(add(enc.proj_w3, glimpse)));
  const Tensor logits = scale(nn::tanh(raw_logits), kLogitClip);
  const Tensor mask = Tensor::from(1, state.mask.size(), state.mask);
  const Tensor log_probs = log_softmax(add(logits, mask));

  StepOutput out;
  out.log_probs = log_probs;
  out.probs.resize(log_probs.size());
  for (std::size_t i = 0; i < out.probs.size(); ++i) out.probs[i] = std::exp(log_probs.data()[i]);
  out.logits.assign(logits.data().begin(), logits.data().end());
  out.attention.assign(attention.data().begin(), attention.data().end());
  out.next = state;
  out.next.hidden = hidden;
  out.next.cell = cell;
  return out;
}

std::size_t argmax_choice(const std::vector<double>& probs, const std::vector<double>& mask) {
  std::size_t best = probs.size();
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (mask[i] == kNegInf) continue;
    if (best == probs.size() || probs[i] > probs[best]) best = i;
  }
  if (best == probs.size()) throw ContractError("argmax_choice: every element is masked");
  return best;
}

std::size_t sample_choice(const std::vector<double>& probs, const std::vector<double>& mask,
                          Rng& rng) {
  const double u = rng.uniform();
  double running = 0.0;
  std::size_t last = probs.size();
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (mask[i] == kNegInf) continue;
    last = i;
    running += probs[i];
    if (u < running) return i;
  }
  if (last == probs.size()) throw ContractError("sample_choice: every element is masked");
  return last;  // rounding left a sliver of mass past the final entry
}

std::size_t select_cluster_head(const WeightedCosts& costs, Point prev, std::size_t cluster) {
  std::size_t best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < costs.cluster_size(); ++n) {
    const double e = costs.entry_cost(prev, cluster, n);
    if (e < best_cost) {
      best_cost = e;
      best = n;
    }
  }
  return best;
}

Rollout rollout(const Instance& instance, const EnergyParams& energy, const PolicyParams& params,
                DecodeMode mode, std::uint64_t seed) {
  const WeightedCosts costs(energy, instance);
  const Encoded enc = encode(instance, params);
  const std::size_t k = instance.num_clusters();
  Rng rng(seed);

  DecoderState state = DecoderState::initial(params.embed_dim, k + 1);
  state.emit(0);  // the depot always comes first

  Rollout r;
  Point prev = instance.depot;
  for (std::size_t t = 1; t <= k; ++t) {
    StepOutput out = decode_step(params, enc, state);
    const std::size_t choice = mode == DecodeMode::greedy
                                   ? argmax_choice(out.probs, state.mask)
                                   : sample_choice(out.probs, state.mask, rng);
    if (t == 1) {
      const std::size_t dim = params.embed_dim;
      std::vector<double> ctx(dim, 0.0);
      auto e = enc.embeddings.data();
      for (std::size_t row = 0; row < dim; ++row) {
        for (std::size_t c = 0; c < k + 1; ++c) ctx[row] += out.attention[c] * e[row * (k + 1) + c];
      }
      r.critic_context = Tensor::from(dim, 1, std::move(ctx));
    }
    const Tensor step_log_prob = nn::pick(out.log_probs, choice);
    r.log_prob = r.log_prob.defined() ? nn::add(r.log_prob, step_log_prob) : step_log_prob;
    r.trace.push_back({choice, out.probs, out.logits, state.mask});

    state = std::move(out.next);
    state.emit(choice);
    const std::size_t cluster = choice - 1;
    const std::size_t head = select_cluster_head(costs, prev, cluster);
    r.tour.stops.push_back({cluster, head});
    prev = costs.node_point(cluster, head);
  }
  r.log_prob_value = r.log_prob.item();
  r.energy = total_weighted_energy(energy, instance, r.tour);
  r.reward = -r.energy.total_weighted;
  return r;
}

SolveReport solve_drl(const Instance& instance, const EnergyParams& energy,
                      const PolicyParams& params) {
  Stopwatch clock;
  Rollout r = rollout(instance, energy, params, DecodeMode::greedy);
  const double elapsed = clock.seconds();
  return make_report("drl", energy, instance, std::move(r.tour), elapsed);
}

Tensor critic_forward(const CriticParams& critic, const Tensor& context) {
  using namespace nn;
  const Tensor hidden = relu(add(matmul(critic.fc1_w, context), critic.fc1_b));
  return add(matmul(critic.fc2_w, hidden), critic.fc2_b);
}

Tensor critic_value(const Instance& instance, const PolicyParams& params,
                    const CriticParams& critic) {
  const Encoded enc = encode(instance, params);
  DecoderState state = DecoderState::initial(params.embed_dim, instance.num_clusters() + 1);
  state.emit(0);
  const StepOutput out = decode_step(params, enc, state);
  const Tensor weights = Tensor::from(out.attention.size(), 1, out.attention);
  const Tensor context = nn::matmul(enc.embeddings.detach(), weights);
  return critic_forward(critic, context);
}

namespace {

using nlohmann::json;

json tensor_json(const Tensor& t) {
  return json{{"shape", {t.rows(), t.cols()}}, {"data", std::vector<double>(t.data().begin(), t.data().end())}};
}

Tensor tensor_from(const json& j, const std::string& name) {
  try {
    const auto shape = j.at("shape").get<std::vector<std::size_t>>();
    auto data = j.at("data").get<std::vector<double>>();
    if (shape.size() != 2) throw ParseError("checkpoint tensor " + name + ": bad shape");
    return Tensor::from(shape[0], shape[1], std::move(data), true);
  } catch (const json::exception& e) {
    throw ParseError("checkpoint tensor " + name + ": " + e.what());
  } catch (const DimensionError& e) {
    throw ParseError("checkpoint tensor " + name + ": " + e.what());
  }
}

json adam_json(const nn::AdamState& s) {
  return json{{"step_count", s.step_count},
              {"first_moment", s.first_moment},
              {"second_moment", s.second_moment}};
}

nn::AdamState adam_from(const json& j) {
  nn::AdamState s;
  s.step_count = j.at("step_count").get<std::uint64_t>();
  s.first_moment = j.at("first_moment").get<std::vector<std::vector<double>>>();
  s.second_moment = j.at("second_moment").get<std::vector<std::vector<double>>>();
  return s;
}

}  // namespace

std::string checkpoint_to_json(const Checkpoint& c) {
  json j;
  j["format"] = "uavgtsp-checkpoint";
  j["version"] = kCheckpointVersion;
  j["embed_dim"] = c.actor.embed_dim;
  j["reward_scale"] = c.reward_scale;
  j["trained_clusters"] = c.trained_clusters;
  j["trained_cluster_size"] = c.trained_cluster_size;
  j["step"] = c.step;
  j["metadata"] = c.metadata;
  const auto actor = c.actor.tensors();
  const auto actor_names = PolicyParams::names();
  for (std::size_t i = 0; i < actor.size(); ++i) j["actor"][actor_names[i]] = tensor_json(actor[i]);
  const auto critic = c.critic.tensors();
  const auto critic_names = CriticParams::names();
  for (std::size_t i = 0; i < critic.size(); ++i) {
    j["critic"][critic_names[i]] = tensor_json(critic[i]);
  }
  j["actor_opt"] = adam_json(c.actor_opt);
  j["critic_opt"] = adam_json(c.critic_opt);
  return j.dump() + "\n";
}

Checkpoint checkpoint_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  Checkpoint c;
  try {
    if (j.at("format").get<std::string>() != "uavgtsp-checkpoint") {
      throw ParseError("checkpoint: wrong format tag");
    }
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw ParseError("checkpoint: unsupported version");
    }
    const auto d = j.at("embed_dim").get<std::size_t>();
    c.reward_scale = j.at("reward_scale").get<double>();
    c.trained_clusters = j.at("trained_clusters").get<std::size_t>();
    c.trained_cluster_size = j.at("trained_cluster_size").get<std::size_t>();
    c.step = j.at("step").get<std::uint64_t>();
    c.metadata = j.at("metadata").get<std::map<std::string, std::string>>();

    std::vector<Tensor> a;
    for (const auto& name : PolicyParams::names()) a.push_back(tensor_from(j.at("actor").at(name), name));
    c.actor = {d, a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8], a[9]};
    std::vector<Tensor> cr;
    for (const auto& name : CriticParams::names()) {
      cr.push_back(tensor_from(j.at("critic").at(name), name));
    }
    c.critic = {d, cr[0], cr[1], cr[2], cr[3]};
    c.actor_opt = adam_from(j.at("actor_opt"));
    c.critic_opt = adam_from(j.at("critic_opt"));
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  c.actor.validate();
  c.critic.validate();
  return c;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint " + tmp);
    out << checkpoint_to_json(checkpoint);
    out.flush();
    if (!out) throw IoError("write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place at " + path + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_json(buf.str());
}

}  // namespace uavgtsp
