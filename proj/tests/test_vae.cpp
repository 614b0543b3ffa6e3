#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "ncfa/rng.hpp"
#include "ncfa/synth.hpp"
#include "ncfa/vae.hpp"

using namespace ncfa;

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

NCFAGraph diamond_ncfa(long long lambda = 4) {
  return assign_latents(fixtures::b1(), lambda);
}

/// Straight-line reference ELBO sharing only the noise-draw contract
/// (row-major standard normals from Rng(seed)).
double elbo_reference(const vae::VAEParams& p, const Eigen::MatrixXd& x,
                      std::uint64_t seed) {
  const int b = static_cast<int>(x.rows());
  const int n = p.n();
  const int lam = p.lambda();
  Rng rng(seed);
  std::vector<std::vector<double>> eta(static_cast<std::size_t>(b),
                                       std::vector<double>(static_cast<std::size_t>(lam)));
  for (int i = 0; i < b; ++i)
    for (int z = 0; z < lam; ++z)
      eta[static_cast<std::size_t>(i)][static_cast<std::size_t>(z)] = rng.normal();

  double total = 0.0;
  for (int i = 0; i < b; ++i) {
    std::vector<double> zval(static_cast<std::size_t>(lam));
    for (int z = 0; z < lam; ++z) {
      double mu = p.enc_bias[z], lv = p.enc_logvar_bias[z];
      for (int k = 0; k < n; ++k) {
        mu += p.enc_weight(z, k) * x(i, k);
        lv += p.enc_logvar_weight(z, k) * x(i, k);
      }
      zval[static_cast<std::size_t>(z)] =
          mu + std::exp(0.5 * lv) *
                   eta[static_cast<std::size_t>(i)][static_cast<std::size_t>(z)];
      total += 0.5 * (std::exp(lv) + mu * mu - 1.0 - lv);
    }
    for (int m = 0; m < n; ++m) {
      double mean = p.dec_bias[m];
      for (int z = 0; z < lam; ++z)
        mean += p.mask(m, z) * p.dec_weight(m, z) * zval[static_cast<std::size_t>(z)];
      const double err = x(i, m) - mean;
      const double c = p.obs_lognoise[m];
      total += 0.5 * (err * err * std::exp(-c) + c + kLog2Pi);
    }
  }
  return total / b;
}

struct Coord {
  double* param;
  const double* grad;
  bool masked;
};

std::vector<Coord> coordinates(vae::VAEParams& p, const vae::Gradients& g) {
  std::vector<Coord> out;
  auto add_matrix = [&](Eigen::MatrixXd& pm, const Eigen::MatrixXd& gm,
                        const Eigen::MatrixXd* mask) {
    for (Eigen::Index i = 0; i < pm.size(); ++i)
      out.push_back({pm.data() + i, gm.data() + i,
                     mask != nullptr && mask->data()[i] == 0.0});
  };
  auto add_vector = [&](Eigen::VectorXd& pv, const Eigen::VectorXd& gv) {
    for (Eigen::Index i = 0; i < pv.size(); ++i)
      out.push_back({pv.data() + i, gv.data() + i, false});
  };
  add_matrix(p.enc_weight, g.enc_weight, nullptr);
  add_vector(p.enc_bias, g.enc_bias);
  add_matrix(p.enc_logvar_weight, g.enc_logvar_weight, nullptr);
  add_vector(p.enc_logvar_bias, g.enc_logvar_bias);
  add_matrix(p.dec_weight, g.dec_weight, &p.mask);
  add_vector(p.dec_bias, g.dec_bias);
  add_vector(p.obs_lognoise, g.obs_lognoise);
  return out;
}

Eigen::MatrixXd random_batch(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

}  // namespace

TEST_SUITE_BEGIN("vae");

TEST_CASE("init_params") {
  const NCFAGraph g = diamond_ncfa();
  const vae::VAEParams a = vae::init_params(g, 7);
  const vae::VAEParams b = vae::init_params(g, 7);
  CHECK(a.enc_weight == b.enc_weight);
  CHECK(a.dec_weight == b.dec_weight);
  CHECK(a.n() == 4);
  CHECK(a.lambda() == 4);
  // masked positions are exactly zero; M1 is a child of clique-0 latents only
  for (int i = 0; i < a.n(); ++i)
    for (int z = 0; z < a.lambda(); ++z)
      if (a.mask(i, z) == 0.0) CHECK(a.dec_weight(i, z) == 0.0);
  CHECK(a.mask(0, 0) == 1.0);
  CHECK(a.mask(0, 2) == 0.0);
  CHECK(a.mask(3, 0) == 0.0);
  const double enc_bound = 1.0 / std::sqrt(4.0);
  CHECK(a.enc_weight.array().abs().maxCoeff() <= enc_bound);
  CHECK(a.enc_bias.isZero(0.0));
  CHECK(a.obs_lognoise.isZero(0.0));
  const vae::VAEParams c = vae::init_params(g, 8);
  CHECK(a.enc_weight != c.enc_weight);
}

TEST_CASE("encode") {
  const NCFAGraph g = diamond_ncfa();
  vae::VAEParams p = vae::init_params(g, 1);
  SUBCASE("zero parameters map to the prior") {
    p.enc_weight.setZero();
    p.enc_logvar_weight.setZero();
    const auto r = vae::encode(p, random_batch(3, 4, 2));
    CHECK(r.mu.isZero(0.0));
    CHECK(r.logvar.isZero(0.0));
  }
  SUBCASE("hand-computed affine value") {
    MCMGraph unit{Eigen::MatrixXi::Ones(1, 1)};
    vae::VAEParams q = vae::init_params(assign_latents(unit, 1), 0);
    q.enc_weight(0, 0) = 2.0;
    q.enc_bias[0] = 3.0;
    q.enc_logvar_weight(0, 0) = -1.0;
    q.enc_logvar_bias[0] = 0.5;
    Eigen::MatrixXd x(1, 1);
    x << 5.0;
    const auto r = vae::encode(q, x);
    CHECK(r.mu(0, 0) == doctest::Approx(13.0));
    CHECK(r.logvar(0, 0) == doctest::Approx(-4.5));
  }
  SUBCASE("identical rows produce identical posteriors") {
    Eigen::MatrixXd x(2, 4);
    x.row(0) << 1.0, -2.0, 0.5, 3.0;
    x.row(1) = x.row(0);
    const auto r = vae::encode(p, x);
    CHECK(r.mu.row(0) == r.mu.row(1));
    CHECK(r.logvar.row(0) == r.logvar.row(1));
  }
}

TEST_CASE("decode is bitwise invariant to non-parent latents") {
  const NCFAGraph g = diamond_ncfa();
  const vae::VAEParams p = vae::init_params(g, 11);
  Eigen::MatrixXd z = random_batch(5, 4, 3);
  const Eigen::MatrixXd base = vae::decode(p, z);
  // latents 2,3 belong to clique {1,2,3}; measurement 0 must not react
  for (int latent : {2, 3}) {
    Eigen::MatrixXd zp = z;
    zp.col(latent).array() += 1e6;
    const Eigen::MatrixXd out = vae::decode(p, zp);
    for (int r = 0; r < out.rows(); ++r) {
      const double a = base(r, 0), b = out(r, 0);
      CHECK(std::memcmp(&a, &b, sizeof(double)) == 0);
    }
  }
}

TEST_CASE("decode passthrough with identity weights") {
  MCMGraph full{Eigen::MatrixXi::Ones(1, 3)};
  vae::VAEParams p = vae::init_params(assign_latents(full, 3), 0);
  p.dec_weight = Eigen::MatrixXd::Identity(3, 3);
  p.dec_bias.setZero();
  const Eigen::MatrixXd z = random_batch(4, 3, 5);
  CHECK((vae::decode(p, z) - z).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ELBO closed-form anchors") {
  const NCFAGraph g = diamond_ncfa();
  vae::VAEParams p = vae::init_params(g, 0);
  p.enc_weight.setZero();
  p.enc_logvar_weight.setZero();
  p.dec_weight.setZero();
  const Eigen::MatrixXd zeros = Eigen::MatrixXd::Zero(6, 4);
  // mu = 0 and logvar = 0 make the KL vanish; the zero decoder leaves only
  // the unit-variance Gaussian constant
  CHECK(vae::elbo_loss(p, zeros, 123) ==
        doctest::Approx(0.5 * 4 * kLog2Pi).epsilon(1e-10));
  const Eigen::MatrixXd x = random_batch(6, 4, 9);
  double expect = 0.5 * 4 * kLog2Pi;
  expect += 0.5 * x.array().square().sum() / 6.0;
  CHECK(vae::elbo_loss(p, x, 123) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("ELBO matches the straight-line reference") {
  Rng rng(88);
  for (int rep = 0; rep < 10; ++rep) {
    const MCMGraph m = fixtures::random_mcm(2, 5, rng.next_u64());
    const NCFAGraph g = assign_latents(m, 2 + static_cast<long long>(rng.below(4)));
    vae::VAEParams p = vae::init_params(g, rng.next_u64());
    p.dec_bias = random_batch(1, p.n(), rng.next_u64()).row(0).transpose() * 0.3;
    p.obs_lognoise = random_batch(1, p.n(), rng.next_u64()).row(0).transpose() * 0.2;
    const Eigen::MatrixXd x = random_batch(7, 5, rng.next_u64());
    const std::uint64_t seed = rng.next_u64();
    CHECK(vae::elbo_loss(p, x, seed) ==
          doctest::Approx(elbo_reference(p, x, seed)).epsilon(1e-10));
  }
}

TEST_CASE("KL term is nonnegative") {
  Rng rng(21);
  for (int rep = 0; rep < 20; ++rep) {
    const NCFAGraph g = diamond_ncfa(3 + static_cast<long long>(rng.below(4)));
    vae::VAEParams p = vae::init_params(g, rng.next_u64());
    const auto enc = vae::encode(p, random_batch(6, 4, rng.next_u64()));
    const double kl = 0.5 * (enc.logvar.array().exp() + enc.mu.array().square() -
                             1.0 - enc.logvar.array())
                                .sum();
    CHECK(kl >= 0.0);
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(12);
  for (int instance = 0; instance < 3; ++instance) {
    const MCMGraph m = fixtures::random_mcm(2, 4, rng.next_u64());
    const NCFAGraph g = assign_latents(m, 3);
    vae::VAEParams p = vae::init_params(g, rng.next_u64());
    const Eigen::MatrixXd x = random_batch(8, 4, rng.next_u64());
    const std::uint64_t seed = rng.next_u64();

    vae::Gradients grads;
    vae::elbo_loss_grad(p, x, seed, grads);
    auto coords = coordinates(p, grads);

    for (const auto& c : coords)
      if (c.masked) CHECK(*c.grad == 0.0);

    const double h = 1e-5;
    for (int check = 0; check < 64; ++check) {
      const auto& c = coords[rng.below(coords.size())];
      if (c.masked) continue;
      const double saved = *c.param;
      *c.param = saved + h;
      const double up = vae::elbo_loss(p, x, seed);
      *c.param = saved - h;
      const double down = vae::elbo_loss(p, x, seed);
      *c.param = saved;
      const double fd = (up - down) / (2.0 * h);
      CHECK(std::abs(*c.grad - fd) < 1e-7 + 1e-4 * std::abs(fd));
    }
  }
}

TEST_CASE("observation-noise gradient vanishes at its closed-form optimum") {
  const NCFAGraph g = diamond_ncfa();
  vae::VAEParams p = vae::init_params(g, 3);
  p.enc_weight.setZero();
  p.enc_logvar_weight.setZero();
  p.dec_weight.setZero();
  const Eigen::MatrixXd x = random_batch(50, 4, 14);
  for (int i = 0; i < 4; ++i)
    p.obs_lognoise[i] = std::log(x.col(i).array().square().mean());
  vae::Gradients grads;
  vae::elbo_loss_grad(p, x, 0, grads);
  CHECK(grads.obs_lognoise.cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("adamw: first-step hand value on a scalar parameter") {
  MCMGraph unit{Eigen::MatrixXi::Ones(1, 1)};
  vae::VAEParams p = vae::init_params(assign_latents(unit, 1), 0);
  p.enc_weight.setZero();
  p.enc_logvar_weight.setZero();
  p.dec_weight(0, 0) = 1.0;
  vae::Gradients g;
  vae::AdamWState st = vae::make_adamw_state(p);
  g = st.m;  // zero-shaped gradients
  g.dec_weight(0, 0) = 1.0;
  vae::TrainConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.weight_decay = 0.0;
  vae::adamw_step(st, p, g, cfg);
  CHECK(p.dec_weight(0, 0) == doctest::Approx(0.9).epsilon(1e-6));
  CHECK(st.step == 1);
}

TEST_CASE("adamw: zero gradient and zero decay leave parameters unchanged") {
  const NCFAGraph graph = diamond_ncfa();
  vae::VAEParams p = vae::init_params(graph, 5);
  const Eigen::MatrixXd before = p.dec_weight;
  vae::AdamWState st = vae::make_adamw_state(p);
  const vae::Gradients zero = st.m;
  vae::TrainConfig cfg;
  cfg.weight_decay = 0.0;
  vae::adamw_step(st, p, zero, cfg);
  CHECK(p.dec_weight == before);
}

TEST_CASE("adamw keeps masked entries at zero") {
  const NCFAGraph graph = diamond_ncfa();
  vae::VAEParams p = vae::init_params(graph, 5);
  vae::AdamWState st = vae::make_adamw_state(p);
  vae::Gradients g = st.m;
  g.dec_weight.setOnes();  // even a dense gradient must not unmask entries
  vae::TrainConfig cfg;
  cfg.learning_rate = 0.5;
  for (int step = 0; step < 3; ++step) vae::adamw_step(st, p, g, cfg);
  for (int i = 0; i < p.n(); ++i)
    for (int z = 0; z < p.lambda(); ++z)
      if (p.mask(i, z) == 0.0) CHECK(p.dec_weight(i, z) == 0.0);
}

TEST_CASE("train") {
  const auto gt = fixtures::diamond_ground_truth();
  const auto sample = synth::sample_dataset(gt, 120, 31);
  const NCFAGraph graph = diamond_ncfa();
  vae::TrainConfig cfg;
  cfg.epochs = 5;
  cfg.seed = 17;

  SUBCASE("trace lengths equal epochs and runs are deterministic") {
    const auto [p1, t1] = vae::train(graph, sample, cfg);
    const auto [p2, t2] = vae::train(graph, sample, cfg);
    CHECK(t1.train_loss.size() == 5);
    CHECK(t1.val_loss.size() == 5);
    CHECK(t1.train_loss == t2.train_loss);
    CHECK(t1.val_loss == t2.val_loss);
    CHECK(p1.dec_weight == p2.dec_weight);
  }
  SUBCASE("epoch validation") {
    vae::TrainConfig bad = cfg;
    bad.epochs = 0;
    CHECK_THROWS_AS(vae::train(graph, sample, bad), std::invalid_argument);
    bad.epochs = 1;
    const auto [p, t] = vae::train(graph, sample, bad);
    CHECK(t.train_loss.size() == 1);
  }
  SUBCASE("small samples are rejected") {
    const auto tiny = synth::sample_dataset(gt, 8, 1);
    CHECK_THROWS_AS(vae::train(graph, tiny, cfg), std::invalid_argument);
  }
  SUBCASE("an all-ones graph reproduces the baseline exactly") {
    MCMGraph full{Eigen::MatrixXi::Ones(1, 4)};
    const auto [pa, ta] = vae::train(assign_latents(full, 6), sample, cfg);
    const auto [pb, tb] = vae::baseline_vae(4, 6, sample, cfg);
    CHECK(ta.train_loss == tb.train_loss);
    CHECK(ta.val_loss == tb.val_loss);
    CHECK(pa.dec_weight == pb.dec_weight);
  }
  SUBCASE("divergence raises with the epoch index") {
    vae::TrainConfig wild = cfg;
    wild.learning_rate = 1e9;
    wild.epochs = 50;
    CHECK_THROWS_AS(vae::train(graph, sample, wild), vae::TrainingDiverged);
  }
}

TEST_CASE("minibatch path stays deterministic") {
  const auto gt = fixtures::diamond_ground_truth();
  const auto sample = synth::sample_dataset(gt, 300, 77);
  vae::TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 64;
  cfg.seed = 5;
  const auto [p1, t1] = vae::train(diamond_ncfa(), sample, cfg);
  const auto [p2, t2] = vae::train(diamond_ncfa(), sample, cfg);
  CHECK(t1.train_loss == t2.train_loss);
  CHECK(t1.val_loss == t2.val_loss);
}

TEST_CASE("sample_generative") {
  const NCFAGraph graph = diamond_ncfa();
  SUBCASE("zero decoder yields pure observation noise") {
    vae::VAEParams p = vae::init_params(graph, 2);
    p.dec_weight.setZero();
    p.dec_bias.setZero();
    p.obs_lognoise.setConstant(std::log(0.25));
    const Eigen::MatrixXd out = vae::sample_generative(p, 20000, 6);
    for (int c = 0; c < 4; ++c) {
      const double mean = out.col(c).mean();
      const double var = (out.col(c).array() - mean).square().mean();
      CHECK(std::abs(mean) < 0.02);
      CHECK(var == doctest::Approx(0.25).epsilon(0.05));
    }
  }
  SUBCASE("deterministic given the seed") {
    const vae::VAEParams p = vae::init_params(graph, 2);
    CHECK(vae::sample_generative(p, 8, 9) == vae::sample_generative(p, 8, 9));
  }
  SUBCASE("non-adjacent measurements stay uncorrelated") {
    // M1 and M4 share no latent under the diamond mask
    const vae::VAEParams p = vae::init_params(graph, 13);
    const Eigen::MatrixXd out = vae::sample_generative(p, 10000, 3);
    const Eigen::ArrayXd a = out.col(0).array() - out.col(0).mean();
    const Eigen::ArrayXd b = out.col(3).array() - out.col(3).mean();
    const double corr =
        (a * b).mean() / std::sqrt(a.square().mean() * b.square().mean());
    CHECK(std::abs(corr) < 0.05);
  }
}

TEST_SUITE_END();
