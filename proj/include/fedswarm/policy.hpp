#pragma once

// Minimal stochastic policy: obs -> tanh hidden layer -> softmax over
// actions, with hand-derived gradients, a REINFORCE update with an EMA
// baseline, and bit-exact binary checkpoint serialization. No learning
// framework; everything is explicit double-precision arithmetic.

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedswarm/rng.hpp"

namespace fedswarm {

// Non-finite parameters or gradients encountered during training.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

struct PolicyParams {
  int obs_dim = 0;
  int hidden_dim = 0;
  int out_dim = 0;
  std::vector<double> w1;  // hidden_dim x obs_dim, row-major
  std::vector<double> b1;  // hidden_dim
  std::vector<double> w2;  // out_dim x hidden_dim, row-major
  std::vector<double> b2;  // out_dim

  std::size_t param_count() const {
    return w1.size() + b1.size() + w2.size() + b2.size();
  }
  bool same_shape(const PolicyParams& o) const {
    return obs_dim == o.obs_dim && hidden_dim == o.hidden_dim && out_dim == o.out_dim;
  }
  bool operator==(const PolicyParams&) const = default;
};

// Xavier-uniform weights (bound sqrt(6/(fan_in+fan_out))), zero biases.
// Draw order is fixed: all of W1 row-major, then all of W2 row-major.
inline PolicyParams init_params(int obs_dim, int hidden_dim, int out_dim, Rng& rng) {
  if (obs_dim < 1 || hidden_dim < 1 || out_dim < 1) {
    throw std::invalid_argument("init_params: dimensions must be >= 1");
  }
  PolicyParams p;
  p.obs_dim = obs_dim;
  p.hidden_dim = hidden_dim;
  p.out_dim = out_dim;
  p.w1.resize(static_cast<std::size_t>(hidden_dim) * obs_dim);
  p.b1.assign(static_cast<std::size_t>(hidden_dim), 0.0);
  p.w2.resize(static_cast<std::size_t>(out_dim) * hidden_dim);
  p.b2.assign(static_cast<std::size_t>(out_dim), 0.0);
  double bound1 = std::sqrt(6.0 / (obs_dim + hidden_dim));
  for (auto& v : p.w1) v = rng.uniform(-bound1, bound1);
  double bound2 = std::sqrt(6.0 / (hidden_dim + out_dim));
  for (auto& v : p.w2) v = rng.uniform(-bound2, bound2);
  return p;
}

namespace detail {

struct ForwardParts {
  std::vector<double> hidden;  // tanh activations
  std::vector<double> probs;
};

inline ForwardParts forward_parts(const PolicyParams& p, const std::vector<double>& obs) {
  if (obs.size() != static_cast<std::size_t>(p.obs_dim)) {
    throw std::invalid_argument("policy forward: observation dimension mismatch");
  }
  ForwardParts f;
  f.hidden.resize(static_cast<std::size_t>(p.hidden_dim));
  for (int j = 0; j < p.hidden_dim; ++j) {
    double acc = p.b1[static_cast<std::size_t>(j)];
    const double* row = p.w1.data() + static_cast<std::size_t>(j) * p.obs_dim;
    for (int i = 0; i < p.obs_dim; ++i) acc += row[i] * obs[static_cast<std::size_t>(i)];
    f.hidden[static_cast<std::size_t>(j)] = std::tanh(acc);
  }
  std::vector<double> logits(static_cast<std::size_t>(p.out_dim));
  for (int k = 0; k < p.out_dim; ++k) {
    double acc = p.b2[static_cast<std::size_t>(k)];
    const double* row = p.w2.data() + static_cast<std::size_t>(k) * p.hidden_dim;
    for (int j = 0; j < p.hidden_dim; ++j) acc += row[j] * f.hidden[static_cast<std::size_t>(j)];
    logits[static_cast<std::size_t>(k)] = acc;
  }
  double mx = logits[0];
  for (double l : logits) mx = std::max(mx, l);
  f.probs.resize(logits.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    f.probs[k] = std::exp(logits[k] - mx);
    sum += f.probs[k];
  }
  for (auto& v : f.probs) v /= sum;
  return f;
}

// Backpropagates a gradient on the logits into a flat parameter gradient
// (layout: W1 row-major, b1, W2 row-major, b2), scaled by `weight`.
inline void accumulate_from_dlogits(const PolicyParams& p, const std::vector<double>& obs,
                                    const ForwardParts& f, const std::vector<double>& dlogits,
                                    double weight, std::vector<double>& grad) {
  const std::size_t w1n = p.w1.size(), b1n = p.b1.size(), w2n = p.w2.size();
  double* gw1 = grad.data();
  double* gb1 = grad.data() + w1n;
  double* gw2 = grad.data() + w1n + b1n;
  double* gb2 = grad.data() + w1n + b1n + w2n;
  std::vector<double> dh(static_cast<std::size_t>(p.hidden_dim), 0.0);
  for (int k = 0; k < p.out_dim; ++k) {
    double dk = weight * dlogits[static_cast<std::size_t>(k)];
    if (dk == 0.0) continue;
    gb2[k] += dk;
    const double* w2row = p.w2.data() + static_cast<std::size_t>(k) * p.hidden_dim;
    double* gw2row = gw2 + static_cast<std::size_t>(k) * p.hidden_dim;
    for (int j = 0; j < p.hidden_dim; ++j) {
      gw2row[j] += dk * f.hidden[static_cast<std::size_t>(j)];
      dh[static_cast<std::size_t>(j)] += w2row[j] * dk;
    }
  }
  for (int j = 0; j < p.hidden_dim; ++j) {
    double h = f.hidden[static_cast<std::size_t>(j)];
    double dpre = dh[static_cast<std::size_t>(j)] * (1.0 - h * h);
    if (dpre == 0.0) continue;
    gb1[j] += dpre;
    double* gw1row = gw1 + static_cast<std::size_t>(j) * p.obs_dim;
    for (int i = 0; i < p.obs_dim; ++i) gw1row[i] += dpre * obs[static_cast<std::size_t>(i)];
  }
}

}  // namespace detail

// Action distribution for one observation. Always a valid distribution for
// finite inputs (max-subtracted softmax).
inline std::vector<double> forward(const PolicyParams& p, const std::vector<double>& obs) {
  return detail::forward_parts(p, obs).probs;
}

// Inverse-CDF sample over the fixed action ordering using one uniform draw.
inline int sample_action(const std::vector<double>& probs, Rng& rng) {
  double u = rng.uniform01();
  double cum = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    cum += probs[k];
    if (u < cum) return static_cast<int>(k);
  }
  return static_cast<int>(probs.size()) - 1;
}

// Argmax with ties broken by the lowest action index.
inline int greedy_action(const std::vector<double>& probs) {
  int best = 0;
  for (std::size_t k = 1; k < probs.size(); ++k) {
    if (probs[k] > probs[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
  }
  return best;
}

// Adds weight * d(log pi(action|obs))/d(theta) to `grad` (flat layout).
inline void accumulate_grad_log_prob(const PolicyParams& p, const std::vector<double>& obs,
                                     int action, double weight, std::vector<double>& grad) {
  if (action < 0 || action >= p.out_dim) {
    throw std::invalid_argument("grad_log_prob: action out of range");
  }
  if (grad.size() != p.param_count()) {
    throw std::invalid_argument("grad_log_prob: gradient buffer size mismatch");
  }
  auto f = detail::forward_parts(p, obs);
  std::vector<double> dlogits(f.probs.size());
  for (std::size_t k = 0; k < f.probs.size(); ++k) {
    dlogits[k] = (static_cast<int>(k) == action ? 1.0 : 0.0) - f.probs[k];
  }
  detail::accumulate_from_dlogits(p, obs, f, dlogits, weight, grad);
}

// Flat gradient of log pi(action|obs) in the documented parameter order.
inline std::vector<double> grad_log_prob(const PolicyParams& p, const std::vector<double>& obs,
                                         int action) {
  std::vector<double> grad(p.param_count(), 0.0);
  accumulate_grad_log_prob(p, obs, action, 1.0, grad);
  return grad;
}

inline std::vector<double> flatten(const PolicyParams& p) {
  std::vector<double> flat;
  flat.reserve(p.param_count());
  flat.insert(flat.end(), p.w1.begin(), p.w1.end());
  flat.insert(flat.end(), p.b1.begin(), p.b1.end());
  flat.insert(flat.end(), p.w2.begin(), p.w2.end());
  flat.insert(flat.end(), p.b2.begin(), p.b2.end());
  return flat;
}

inline PolicyParams unflatten(int obs_dim, int hidden_dim, int out_dim,
                              const std::vector<double>& flat) {
  PolicyParams p;
  p.obs_dim = obs_dim;
  p.hidden_dim = hidden_dim;
  p.out_dim = out_dim;
  std::size_t w1n = static_cast<std::size_t>(hidden_dim) * obs_dim;
  std::size_t b1n = static_cast<std::size_t>(hidden_dim);
  std::size_t w2n = static_cast<std::size_t>(out_dim) * hidden_dim;
  std::size_t b2n = static_cast<std::size_t>(out_dim);
  if (flat.size() != w1n + b1n + w2n + b2n) {
    throw std::invalid_argument("unflatten: flat vector size mismatch");
  }
  auto it = flat.begin();
  p.w1.assign(it, it + static_cast<std::ptrdiff_t>(w1n));
  it += static_cast<std::ptrdiff_t>(w1n);
  p.b1.assign(it, it + static_cast<std::ptrdiff_t>(b1n));
  it += static_cast<std::ptrdiff_t>(b1n);
  p.w2.assign(it, it + static_cast<std::ptrdiff_t>(w2n));
  it += static_cast<std::ptrdiff_t>(w2n);
  p.b2.assign(it, it + static_cast<std::ptrdiff_t>(b2n));
  return p;
}

struct TrainHyper {
  double learning_rate = 0.0;
  double discount = 1.0;        // gamma in (0,1]
  double baseline_decay = 0.99;  // EMA factor for the return baseline
  double entropy_coef = 0.0;
};

struct TrajectoryStep {
  std::vector<double> observation;
  int action = 0;
  double reward = 0.0;
  int suggested_action = 0;
};

using Trajectory = std::vector<TrajectoryStep>;

// Discounted returns G_t = sum_{k>=t} gamma^(k-t) r_k.
inline std::vector<double> discounted_returns(const Trajectory& traj, double gamma) {
  std::vector<double> g(traj.size());
  double acc = 0.0;
  for (std::size_t t = traj.size(); t-- > 0;) {
    acc = traj[t].reward + gamma * acc;
    g[t] = acc;
  }
  return g;
}

// One REINFORCE step: theta += lr * sum_t (G_t - baseline) grad log pi
// (+ entropy_coef * grad entropy if enabled). Returns the baseline advanced
// by one EMA step toward the episode's mean return. Throws DivergenceError
// if the update produces non-finite parameters.
inline double reinforce_update(PolicyParams& p, const Trajectory& traj,
                               const TrainHyper& hyper, double baseline) {
  if (traj.empty()) throw std::invalid_argument("reinforce_update: empty trajectory");
  auto returns = discounted_returns(traj, hyper.discount);
  std::vector<double> grad(p.param_count(), 0.0);
  for (std::size_t t = 0; t < traj.size(); ++t) {
    auto f = detail::forward_parts(p, traj[t].observation);
    double advantage = returns[t] - baseline;
    std::vector<double> dlogits(f.probs.size());
    int action = traj[t].action;
    if (action < 0 || action >= p.out_dim) {
      throw std::invalid_argument("reinforce_update: action out of range");
    }
    for (std::size_t k = 0; k < f.probs.size(); ++k) {
      dlogits[k] = advantage * ((static_cast<int>(k) == action ? 1.0 : 0.0) - f.probs[k]);
    }
    if (hyper.entropy_coef != 0.0) {
      double entropy = 0.0;
      for (double q : f.probs) {
        if (q > 0.0) entropy -= q * std::log(q);
      }
      for (std::size_t k = 0; k < f.probs.size(); ++k) {
        double q = f.probs[k];
        double dq = q > 0.0 ? -q * (std::log(q) + entropy) : 0.0;
        dlogits[k] += hyper.entropy_coef * dq;
      }
    }
    detail::accumulate_from_dlogits(p, traj[t].observation, f, dlogits, 1.0, grad);
  }
  if (hyper.learning_rate != 0.0) {  // exact identity at lr = 0
    auto apply = [&](std::vector<double>& v, std::size_t offset) {
      for (std::size_t i = 0; i < v.size(); ++i) v[i] += hyper.learning_rate * grad[offset + i];
    };
    apply(p.w1, 0);
    apply(p.b1, p.w1.size());
    apply(p.w2, p.w1.size() + p.b1.size());
    apply(p.b2, p.w1.size() + p.b1.size() + p.w2.size());
    for (const auto* vec : {&p.w1, &p.b1, &p.w2, &p.b2}) {
      for (double v : *vec) {
        if (!std::isfinite(v)) {
          throw DivergenceError("training diverged: non-finite policy parameter");
        }
      }
    }
  }
  double mean_return = 0.0;
  for (double g : returns) mean_return += g;
  mean_return /= static_cast<double>(returns.size());
  return hyper.baseline_decay * baseline + (1.0 - hyper.baseline_decay) * mean_return;
}

// FNV-1a over the exact parameter bytes; shape included.
inline std::uint64_t params_checksum(const PolicyParams& p) {
  std::uint64_t h = 1469598103934665603ull;
  auto eat = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  };
  std::uint32_t dims[3] = {static_cast<std::uint32_t>(p.obs_dim),
                           static_cast<std::uint32_t>(p.hidden_dim),
                           static_cast<std::uint32_t>(p.out_dim)};
  eat(dims, sizeof(dims));
  for (const auto* vec : {&p.w1, &p.b1, &p.w2, &p.b2}) {
    eat(vec->data(), vec->size() * sizeof(double));
  }
  return h;
}

// Checkpoint blob: "FSPB" magic, u32 version (1), u32 obs/hidden/out dims,
// u64 parameter count, then raw little-endian doubles in flatten order.
static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

inline std::vector<std::uint8_t> encode_policy(const PolicyParams& p) {
  std::vector<std::uint8_t> blob;
  auto put = [&blob](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const std::uint8_t*>(data);
    blob.insert(blob.end(), bytes, bytes + n);
  };
  put("FSPB", 4);
  std::uint32_t version = 1;
  put(&version, 4);
  std::uint32_t dims[3] = {static_cast<std::uint32_t>(p.obs_dim),
                           static_cast<std::uint32_t>(p.hidden_dim),
                           static_cast<std::uint32_t>(p.out_dim)};
  put(dims, sizeof(dims));
  std::uint64_t count = p.param_count();
  put(&count, 8);
  for (const auto* vec : {&p.w1, &p.b1, &p.w2, &p.b2}) {
    put(vec->data(), vec->size() * sizeof(double));
  }
  return blob;
}

inline PolicyParams decode_policy(const std::vector<std::uint8_t>& blob) {
  auto fail = [](const std::string& why) -> PolicyParams {
    throw std::runtime_error("policy blob: " + why);
  };
  if (blob.size() < 28) return fail("truncated header");
  if (std::memcmp(blob.data(), "FSPB", 4) != 0) return fail("bad magic");
  std::uint32_t version;
  std::memcpy(&version, blob.data() + 4, 4);
  if (version != 1) return fail("unsupported version " + std::to_string(version));
  std::uint32_t dims[3];
  std::memcpy(dims, blob.data() + 8, sizeof(dims));
  std::uint64_t count;
  std::memcpy(&count, blob.data() + 20, 8);
  std::uint64_t expect = static_cast<std::uint64_t>(dims[1]) * dims[0] + dims[1] +
                         static_cast<std::uint64_t>(dims[2]) * dims[1] + dims[2];
  if (count != expect) return fail("parameter count does not match dimensions");
  if (blob.size() != 28 + count * sizeof(double)) return fail("truncated payload");
  std::vector<double> flat(count);
  std::memcpy(flat.data(), blob.data() + 28, count * sizeof(double));
  return unflatten(static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                   static_cast<int>(dims[2]), flat);
}

inline void save_policy(const PolicyParams& p, const std::string& path) {
  auto blob = encode_policy(p);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(blob.data()),
            static_cast<std::streamsize>(blob.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline PolicyParams load_policy(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::vector<std::uint8_t> blob((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  return decode_policy(blob);
}

}  // namespace fedswarm
