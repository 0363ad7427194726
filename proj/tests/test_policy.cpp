#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <vector>

#include "fedswarm/policy.hpp"

using namespace fedswarm;

namespace {

bool bitwise_equal(const PolicyParams& a, const PolicyParams& b) {
  if (!a.same_shape(b)) return false;
  auto fa = flatten(a), fb = flatten(b);
  return std::memcmp(fa.data(), fb.data(), fa.size() * sizeof(double)) == 0;
}

PolicyParams random_params(int obs, int hidden, int out, std::uint64_t seed) {
  Rng rng(seed);
  return init_params(obs, hidden, out, rng);
}

// Softmax(tanh MLP) evaluated the obvious way, without max subtraction.
std::vector<double> naive_forward(const PolicyParams& p, const std::vector<double>& obs) {
  std::vector<double> h(static_cast<std::size_t>(p.hidden_dim));
  for (int j = 0; j < p.hidden_dim; ++j) {
    double acc = p.b1[static_cast<std::size_t>(j)];
    for (int i = 0; i < p.obs_dim; ++i) {
      acc += p.w1[static_cast<std::size_t>(j) * p.obs_dim + i] * obs[static_cast<std::size_t>(i)];
    }
    h[static_cast<std::size_t>(j)] = std::tanh(acc);
  }
  std::vector<double> e(static_cast<std::size_t>(p.out_dim));
  double sum = 0.0;
  for (int k = 0; k < p.out_dim; ++k) {
    double acc = p.b2[static_cast<std::size_t>(k)];
    for (int j = 0; j < p.hidden_dim; ++j) {
      acc += p.w2[static_cast<std::size_t>(k) * p.hidden_dim + j] * h[static_cast<std::size_t>(j)];
    }
    e[static_cast<std::size_t>(k)] = std::exp(acc);
    sum += e[static_cast<std::size_t>(k)];
  }
  for (auto& v : e) v /= sum;
  return e;
}

}  // namespace

TEST_CASE("init: deterministic, zero biases, Xavier bound", "[policy]") {
  auto a = random_params(16, 16, 4, 42);
  auto b = random_params(16, 16, 4, 42);
  CHECK(bitwise_equal(a, b));
  auto c = random_params(16, 16, 4, 43);
  CHECK_FALSE(bitwise_equal(a, c));

  for (double v : a.b1) CHECK(v == 0.0);
  for (double v : a.b2) CHECK(v == 0.0);
  // fan_in = fan_out = 16 -> bound sqrt(6/32), evaluated independently.
  const double bound = 0.4330127018922193;
  double max_abs = 0.0;
  for (double v : a.w1) max_abs = std::max(max_abs, std::abs(v));
  CHECK(max_abs <= bound);
  CHECK(max_abs > 0.5 * bound);  // draws actually spread over the interval

  CHECK_THROWS_AS(random_params(0, 4, 4, 1), std::invalid_argument);
}

TEST_CASE("forward: all-zero parameters give the uniform distribution", "[policy]") {
  PolicyParams p;
  p.obs_dim = 3;
  p.hidden_dim = 5;
  p.out_dim = 4;
  p.w1.assign(15, 0.0);
  p.b1.assign(5, 0.0);
  p.w2.assign(20, 0.0);
  p.b2.assign(4, 0.0);
  auto probs = forward(p, {0.3, -0.7, 2.0});
  REQUIRE(probs.size() == 4);
  for (double q : probs) CHECK(q == 0.25);
}

TEST_CASE("forward matches a naive softmax oracle", "[policy]") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
    auto p = random_params(7, 6, 4, seed);
    Rng rng(seed * 1000 + 7);
    std::vector<double> obs(7);
    for (auto& v : obs) v = rng.uniform(-2.0, 2.0);
    auto got = forward(p, obs);
    auto want = naive_forward(p, obs);
    double sum = 0.0;
    for (std::size_t k = 0; k < got.size(); ++k) {
      CHECK(got[k] == Catch::Approx(want[k]).margin(1e-12));
      CHECK(got[k] > 0.0);
      sum += got[k];
    }
    CHECK(sum == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("forward is invariant to a constant logit shift", "[policy]") {
  auto p = random_params(5, 8, 4, 11);
  std::vector<double> obs = {0.1, 0.9, -0.4, 0.0, 1.0};
  auto base = forward(p, obs);
  auto shifted = p;
  for (auto& v : shifted.b2) v += 123.0;
  auto probs = forward(shifted, obs);
  for (std::size_t k = 0; k < base.size(); ++k) {
    CHECK(probs[k] == Catch::Approx(base[k]).margin(1e-12));
  }
}

TEST_CASE("forward rejects a wrong observation size", "[policy]") {
  auto p = random_params(5, 4, 4, 1);
  CHECK_THROWS_AS(forward(p, std::vector<double>(4, 0.0)), std::invalid_argument);
}

TEST_CASE("sampling: degenerate and uniform distributions", "[policy]") {
  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    CHECK(sample_action({1.0, 0.0, 0.0, 0.0}, rng) == 0);
    CHECK(sample_action({0.0, 0.0, 0.0, 1.0}, rng) == 3);
  }
  std::vector<double> probs = {0.1, 0.2, 0.3, 0.4};
  std::vector<int> counts(4, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(sample_action(probs, rng))];
  for (int k = 0; k < 4; ++k) {
    CHECK(static_cast<double>(counts[static_cast<std::size_t>(k)]) / n ==
          Catch::Approx(probs[static_cast<std::size_t>(k)]).margin(0.01));
  }
  // Same RNG state, same draw.
  Rng r1(99), r2(99);
  for (int i = 0; i < 50; ++i) {
    CHECK(sample_action(probs, r1) == sample_action(probs, r2));
  }
}

TEST_CASE("greedy action takes the argmax, ties to the lowest index", "[policy]") {
  CHECK(greedy_action({0.3, 0.4, 0.2, 0.1}) == 1);
  CHECK(greedy_action({0.25, 0.25, 0.25, 0.25}) == 0);
  CHECK(greedy_action({0.1, 0.45, 0.45}) == 1);
  CHECK(greedy_action({0.0, 0.0, 1.0}) == 2);
}

TEST_CASE("log-prob gradient matches central finite differences", "[policy]") {
  auto p = random_params(3, 4, 3, 5);
  std::vector<double> obs = {0.5, -1.2, 0.8};
  const double h = 1e-6;
  for (int action = 0; action < 3; ++action) {
    auto grad = grad_log_prob(p, obs, action);
    auto flat = flatten(p);
    for (std::size_t i = 0; i < flat.size(); ++i) {
      auto plus = flat, minus = flat;
      plus[i] += h;
      minus[i] -= h;
      double lp = std::log(forward(unflatten(3, 4, 3, plus), obs)[static_cast<std::size_t>(action)]);
      double lm = std::log(forward(unflatten(3, 4, 3, minus), obs)[static_cast<std::size_t>(action)]);
      double fd = (lp - lm) / (2.0 * h);
      CHECK(grad[i] == Catch::Approx(fd).margin(1e-5));
    }
  }
}

TEST_CASE("score function identity: E_pi[grad log pi] = 0", "[policy]") {
  auto p = random_params(4, 6, 4, 21);
  std::vector<double> obs = {1.0, 0.0, -0.5, 0.25};
  auto probs = forward(p, obs);
  std::vector<double> acc(p.param_count(), 0.0);
  for (int a = 0; a < 4; ++a) {
    accumulate_grad_log_prob(p, obs, a, probs[static_cast<std::size_t>(a)], acc);
  }
  for (double v : acc) CHECK(v == Catch::Approx(0.0).margin(1e-10));
}

TEST_CASE("gradient entry points validate their inputs", "[policy]") {
  auto p = random_params(3, 4, 3, 5);
  std::vector<double> obs = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(grad_log_prob(p, obs, 3), std::invalid_argument);
  CHECK_THROWS_AS(grad_log_prob(p, obs, -1), std::invalid_argument);
  std::vector<double> bad(3, 0.0);
  CHECK_THROWS_AS(accumulate_grad_log_prob(p, obs, 0, 1.0, bad), std::invalid_argument);
}

TEST_CASE("discounted returns", "[policy]") {
  Trajectory traj(3);
  traj[0].reward = 1.0;
  traj[1].reward = 1.0;
  traj[2].reward = 1.0;
  auto g1 = discounted_returns(traj, 1.0);
  CHECK(g1 == std::vector<double>{3.0, 2.0, 1.0});
  traj[0].reward = 1.0;
  traj[1].reward = 0.0;
  traj[2].reward = 2.0;
  auto g2 = discounted_returns(traj, 0.5);
  CHECK(g2[2] == 2.0);
  CHECK(g2[1] == 1.0);
  CHECK(g2[0] == 1.5);
}

TEST_CASE("REINFORCE: zero advantage leaves parameters unchanged", "[policy]") {
  auto p = random_params(3, 4, 4, 31);
  auto before = p;
  Trajectory traj(4);
  for (auto& s : traj) {
    s.observation = {0.2, -0.3, 0.9};
    s.action = 1;
    s.reward = 0.0;
  }
  TrainHyper hyper{0.1, 1.0, 0.99, 0.0};
  double baseline = reinforce_update(p, traj, hyper, 0.0);
  CHECK(bitwise_equal(p, before));
  CHECK(baseline == 0.0);  // EMA toward a zero mean return stays zero
}

TEST_CASE("REINFORCE: zero learning rate is a bitwise no-op", "[policy]") {
  auto p = random_params(5, 6, 4, 32);
  auto before = p;
  Trajectory traj(6);
  Rng rng(7);
  for (auto& s : traj) {
    s.observation.resize(5);
    for (auto& v : s.observation) v = rng.uniform(-1.0, 1.0);
    s.action = static_cast<int>(rng.uniform_int(4));
    s.reward = rng.uniform(-2.0, 2.0);
  }
  TrainHyper hyper{0.0, 0.95, 0.99, 0.0};
  reinforce_update(p, traj, hyper, 0.1);
  CHECK(bitwise_equal(p, before));
}

TEST_CASE("REINFORCE: a rewarded action becomes strictly more likely", "[policy]") {
  auto p = random_params(2, 4, 2, 33);
  std::vector<double> obs = {1.0, 0.5};
  double before = forward(p, obs)[0];
  Trajectory traj(1);
  traj[0].observation = obs;
  traj[0].action = 0;
  traj[0].reward = 1.0;
  TrainHyper hyper{0.2, 1.0, 0.99, 0.0};
  reinforce_update(p, traj, hyper, 0.0);
  double after = forward(p, obs)[0];
  CHECK(after > before);
}

TEST_CASE("REINFORCE: baseline advances toward the mean return", "[policy]") {
  auto p = random_params(2, 3, 2, 34);
  Trajectory traj(2);
  traj[0] = {{0.1, 0.2}, 0, 3.0, 0};
  traj[1] = {{0.3, 0.4}, 1, 1.0, 0};
  TrainHyper hyper{0.0, 1.0, 0.9, 0.0};
  // Returns with gamma 1: G0 = 4, G1 = 1; mean 2.5.
  double b = reinforce_update(p, traj, hyper, 1.0);
  CHECK(b == Catch::Approx(0.9 * 1.0 + 0.1 * 2.5).margin(1e-15));
}

TEST_CASE("REINFORCE: entropy gradient matches finite differences", "[policy]") {
  // Isolate the entropy term: zero advantage (all rewards 0, baseline 0),
  // entropy_coef 1, lr h-sized single step  vs  FD of the entropy itself.
  auto p = random_params(3, 4, 3, 35);
  std::vector<double> obs = {0.4, -0.6, 1.1};
  auto entropy_of = [&obs](const PolicyParams& q) {
    double e = 0.0;
    for (double v : forward(q, obs)) {
      if (v > 0.0) e -= v * std::log(v);
    }
    return e;
  };
  // Analytic gradient via one reinforce step at lr 1 with only entropy active.
  Trajectory traj(1);
  traj[0].observation = obs;
  traj[0].action = 0;
  traj[0].reward = 0.0;
  auto stepped = p;
  TrainHyper hyper{1.0, 1.0, 0.99, 1.0};
  reinforce_update(stepped, traj, hyper, 0.0);
  auto g0 = flatten(p);
  auto g1 = flatten(stepped);
  const double h = 1e-6;
  auto flat = flatten(p);
  for (std::size_t i = 0; i < flat.size(); ++i) {
    auto plus = flat, minus = flat;
    plus[i] += h;
    minus[i] -= h;
    double fd = (entropy_of(unflatten(3, 4, 3, plus)) -
                 entropy_of(unflatten(3, 4, 3, minus))) / (2.0 * h);
    CHECK(g1[i] - g0[i] == Catch::Approx(fd).margin(1e-5));
  }
}

TEST_CASE("REINFORCE rejects malformed trajectories", "[policy]") {
  auto p = random_params(2, 3, 2, 36);
  TrainHyper hyper{0.1, 1.0, 0.99, 0.0};
  CHECK_THROWS_AS(reinforce_update(p, Trajectory{}, hyper, 0.0), std::invalid_argument);
  Trajectory traj(1);
  traj[0] = {{0.0, 0.0}, 5, 1.0, 0};
  CHECK_THROWS_AS(reinforce_update(p, traj, hyper, 0.0), std::invalid_argument);
}

TEST_CASE("flatten and unflatten are exact inverses", "[policy]") {
  auto p = random_params(6, 5, 4, 41);
  auto flat = flatten(p);
  REQUIRE(flat.size() == p.param_count());
  auto q = unflatten(6, 5, 4, flat);
  CHECK(bitwise_equal(p, q));
  CHECK_THROWS_AS(unflatten(6, 5, 3, flat), std::invalid_argument);
}

TEST_CASE("checkpoint blob round-trips bit-exactly", "[policy]") {
  auto p = random_params(16, 32, 4, 51);
  auto blob = encode_policy(p);
  CHECK(blob.size() == 28 + p.param_count() * sizeof(double));
  auto q = decode_policy(blob);
  CHECK(bitwise_equal(p, q));
  CHECK(params_checksum(p) == params_checksum(q));

  // The checksum reacts to any single flipped parameter.
  auto r = p;
  r.w2[3] = std::nextafter(r.w2[3], 1e300);
  CHECK(params_checksum(r) != params_checksum(p));

  // Encoding is a pure function of the parameters.
  CHECK(encode_policy(p) == blob);
}

TEST_CASE("checkpoint decoding rejects corrupted blobs", "[policy]") {
  auto p = random_params(3, 4, 2, 52);
  auto blob = encode_policy(p);
  auto bad_magic = blob;
  bad_magic[0] = 'X';
  CHECK_THROWS(decode_policy(bad_magic));
  auto truncated = blob;
  truncated.resize(truncated.size() - 8);
  CHECK_THROWS(decode_policy(truncated));
  auto short_header = std::vector<std::uint8_t>(blob.begin(), blob.begin() + 10);
  CHECK_THROWS(decode_policy(short_header));
  auto bad_count = blob;
  bad_count[20] ^= 0xff;
  CHECK_THROWS(decode_policy(bad_count));
}

TEST_CASE("checkpoint file round-trip", "[policy]") {
  auto p = random_params(8, 6, 4, 53);
  auto dir = std::filesystem::temp_directory_path() / "fedswarm_policy_test";
  std::filesystem::create_directories(dir);
  auto path = (dir / "p.bin").string();
  save_policy(p, path);
  auto q = load_policy(path);
  CHECK(bitwise_equal(p, q));
  CHECK_THROWS(load_policy((dir / "missing.bin").string()));
  std::filesystem::remove_all(dir);
}
