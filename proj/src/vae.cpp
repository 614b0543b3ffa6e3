#include "ncfa/vae.hpp"

#include <cmath>

#include "ncfa/rng.hpp"

namespace ncfa::vae {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// seed stream tags
constexpr std::uint64_t kTagSplit = 1;
constexpr std::uint64_t kTagInit = 2;
constexpr std::uint64_t kTagEpoch = 3;
constexpr std::uint64_t kTagEta = 4;
constexpr std::uint64_t kTagVal = 5;

Eigen::MatrixXd draw_normal(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

void fill_uniform(Rng& rng, Eigen::MatrixXd& m, double bound) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = rng.uniform(-bound, bound);
}

}  // namespace

VAEParams init_params(const NCFAGraph& ncfa, std::uint64_t seed) {
  if (ncfa.lambda < 1) throw std::invalid_argument("lambda must be at least 1");
  const int n = ncfa.n();
  const Eigen::Index lambda = static_cast<Eigen::Index>(ncfa.lambda);

  VAEParams p;
  p.mask = ncfa.expanded_biadjacency().transpose().cast<double>();  // n x lambda
  p.enc_weight.resize(lambda, n);
  p.enc_logvar_weight.resize(lambda, n);
  p.dec_weight.resize(n, lambda);
  p.enc_bias = Eigen::VectorXd::Zero(lambda);
  p.enc_logvar_bias = Eigen::VectorXd::Zero(lambda);
  p.dec_bias = Eigen::VectorXd::Zero(n);
  p.obs_lognoise = Eigen::VectorXd::Zero(n);

  Rng rng(derive_seed(seed, kTagInit));
  fill_uniform(rng, p.enc_weight, 1.0 / std::sqrt(static_cast<double>(n)));
  fill_uniform(rng, p.enc_logvar_weight, 1.0 / std::sqrt(static_cast<double>(n)));
  fill_uniform(rng, p.dec_weight, 1.0 / std::sqrt(static_cast<double>(lambda)));
  p.dec_weight.array() *= p.mask.array();
  return p;
}

EncodeResult encode(const VAEParams& params, const Eigen::MatrixXd& batch) {
  EncodeResult r;
  r.mu = batch * params.enc_weight.transpose();
  r.mu.rowwise() += params.enc_bias.transpose();
  r.logvar = batch * params.enc_logvar_weight.transpose();
  r.logvar.rowwise() += params.enc_logvar_bias.transpose();
  return r;
}

Eigen::MatrixXd decode(const VAEParams& params, const Eigen::MatrixXd& z) {
  const Eigen::MatrixXd masked = params.mask.array() * params.dec_weight.array();
  Eigen::MatrixXd mean = z * masked.transpose();
  mean.rowwise() += params.dec_bias.transpose();
  return mean;
}

namespace {

double elbo_core(const VAEParams& p, const Eigen::MatrixXd& x, std::uint64_t seed,
                 Gradients* grads) {
  const Eigen::Index b = x.rows();
  if (b == 0) throw std::invalid_argument("batch must be nonempty");
  const double bn = static_cast<double>(b);

  Rng rng(seed);
  const Eigen::MatrixXd eta = draw_normal(rng, b, p.enc_weight.rows());

  const EncodeResult enc = encode(p, x);
  const Eigen::MatrixXd sd = (0.5 * enc.logvar).array().exp();
  const Eigen::MatrixXd z = enc.mu + sd.cwiseProduct(eta);

  const Eigen::MatrixXd masked = p.mask.array() * p.dec_weight.array();
  Eigen::MatrixXd mean = z * masked.transpose();
  mean.rowwise() += p.dec_bias.transpose();

  const Eigen::ArrayXd inv_var = (-p.obs_lognoise.array()).exp();
  const Eigen::MatrixXd err = mean - x;

  // Gaussian negative log-likelihood plus closed-form KL to N(0, I)
  double recon = 0.0;
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    recon += 0.5 * (err.col(i).array().square() * inv_var[i]).sum() +
             0.5 * bn * (p.obs_lognoise[i] + kLog2Pi);
  }
  const double kl = 0.5 * (enc.logvar.array().exp() + enc.mu.array().square() -
                           1.0 - enc.logvar.array())
                              .sum();
  const double loss = (recon + kl) / bn;
  if (!grads) return loss;

  Gradients& g = *grads;
  const Eigen::MatrixXd dmean =
      (err.array().rowwise() * inv_var.transpose()).matrix() / bn;
  g.dec_bias = dmean.colwise().sum().transpose();
  g.dec_weight = (dmean.transpose() * z).array() * p.mask.array();
  g.obs_lognoise.resize(x.cols());
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    g.obs_lognoise[i] =
        (0.5 * bn - 0.5 * (err.col(i).array().square() * inv_var[i]).sum()) / bn;
  }
  const Eigen::MatrixXd dz = dmean * masked;
  const Eigen::MatrixXd dmu = dz + enc.mu / bn;
  const Eigen::MatrixXd dlogvar =
      dz.cwiseProduct(0.5 * sd.cwiseProduct(eta)) +
      ((enc.logvar.array().exp() - 1.0) * (0.5 / bn)).matrix();
  g.enc_weight = dmu.transpose() * x;
  g.enc_bias = dmu.colwise().sum().transpose();
  g.enc_logvar_weight = dlogvar.transpose() * x;
  g.enc_logvar_bias = dlogvar.colwise().sum().transpose();
  return loss;
}

}  // namespace

double elbo_loss(const VAEParams& params, const Eigen::MatrixXd& batch,
                 std::uint64_t seed) {
  return elbo_core(params, batch, seed, nullptr);
}

double elbo_loss_grad(const VAEParams& params, const Eigen::MatrixXd& batch,
                      std::uint64_t seed, Gradients& grads) {
  return elbo_core(params, batch, seed, &grads);
}

AdamWState make_adamw_state(const VAEParams& params) {
  AdamWState st;
  auto zeros_like_m = [](const Eigen::MatrixXd& m) {
    return Eigen::MatrixXd::Zero(m.rows(), m.cols());
  };
  auto zeros_like_v = [](const Eigen::VectorXd& v) {
    return Eigen::VectorXd::Zero(v.size());
  };
  st.m.enc_weight = zeros_like_m(params.enc_weight);
  st.m.enc_logvar_weight = zeros_like_m(params.enc_logvar_weight);
  st.m.dec_weight = zeros_like_m(params.dec_weight);
  st.m.enc_bias = zeros_like_v(params.enc_bias);
  st.m.enc_logvar_bias = zeros_like_v(params.enc_logvar_bias);
  st.m.dec_bias = zeros_like_v(params.dec_bias);
  st.m.obs_lognoise = zeros_like_v(params.obs_lognoise);
  st.v = st.m;
  return st;
}

namespace {

template <typename Tensor>
void adamw_update(Tensor& param, const Tensor& grad, Tensor& m, Tensor& v,
                  double lr, double b1, double b2, double eps, double wd,
                  double bc1, double bc2) {
  m = b1 * m + (1.0 - b1) * grad;
  v = (b2 * v.array() + (1.0 - b2) * grad.array().square()).matrix();
  const auto mhat = m.array() / bc1;
  const auto vhat = v.array() / bc2;
  param.array() -= lr * (mhat / (vhat.sqrt() + eps) + wd * param.array());
}

}  // namespace

void adamw_step(AdamWState& state, VAEParams& params, const Gradients& grads,
                const TrainConfig& config) {
  ++state.step;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  const double lr = config.learning_rate;
  const double wd = config.weight_decay;

  adamw_update(params.enc_weight, grads.enc_weight, state.m.enc_weight,
               state.v.enc_weight, lr, config.beta1, config.beta2, config.eps, wd,
               bc1, bc2);
  adamw_update(params.enc_logvar_weight, grads.enc_logvar_weight,
               state.m.enc_logvar_weight, state.v.enc_logvar_weight, lr,
               config.beta1, config.beta2, config.eps, wd, bc1, bc2);
  adamw_update(params.dec_weight, grads.dec_weight, state.m.dec_weight,
               state.v.dec_weight, lr, config.beta1, config.beta2, config.eps, wd,
               bc1, bc2);
  adamw_update(params.enc_bias, grads.enc_bias, state.m.enc_bias,
               state.v.enc_bias, lr, config.beta1, config.beta2, config.eps, wd,
               bc1, bc2);
  adamw_update(params.enc_logvar_bias, grads.enc_logvar_bias,
               state.m.enc_logvar_bias, state.v.enc_logvar_bias, lr, config.beta1,
               config.beta2, config.eps, wd, bc1, bc2);
  adamw_update(params.dec_bias, grads.dec_bias, state.m.dec_bias,
               state.v.dec_bias, lr, config.beta1, config.beta2, config.eps, wd,
               bc1, bc2);
  adamw_update(params.obs_lognoise, grads.obs_lognoise, state.m.obs_lognoise,
               state.v.obs_lognoise, lr, config.beta1, config.beta2, config.eps,
               wd, bc1, bc2);

  params.dec_weight.array() *= params.mask.array();
}

std::pair<VAEParams, TrainTrace> train(const NCFAGraph& ncfa,
                                       const indep::SampleMatrix& sample,
                                       const TrainConfig& config) {
  if (config.epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (!(config.split_fraction > 0.0 && config.split_fraction < 1.0))
    throw std::invalid_argument("split fraction must lie in (0, 1)");
  if (sample.s() < 10) throw std::invalid_argument("training needs s >= 10");
  if (sample.n() != ncfa.n())
    throw std::invalid_argument("sample and graph measurement counts differ");

  const int s = sample.s();
  Rng split_rng(derive_seed(config.seed, kTagSplit));
  std::vector<int> perm = split_rng.permutation(s);
  const int train_count = std::clamp(
      static_cast<int>(std::llround(config.split_fraction * s)), 1, s - 1);
  const int val_count = s - train_count;

  Eigen::MatrixXd x_train(train_count, sample.n());
  Eigen::MatrixXd x_val(val_count, sample.n());
  for (int i = 0; i < train_count; ++i)
    x_train.row(i) = sample.data.row(perm[static_cast<std::size_t>(i)]);
  for (int i = 0; i < val_count; ++i)
    x_val.row(i) = sample.data.row(perm[static_cast<std::size_t>(train_count + i)]);

  VAEParams params = init_params(ncfa, config.seed);
  AdamWState state = make_adamw_state(params);

  const int batch =
      config.batch_size > 0 ? std::min(config.batch_size, train_count)
                            : (s <= 2048 ? train_count : std::min(256, train_count));

  TrainTrace trace;
  trace.train_loss.reserve(static_cast<std::size_t>(config.epochs));
  trace.val_loss.reserve(static_cast<std::size_t>(config.epochs));

  std::vector<int> order(static_cast<std::size_t>(train_count));
  for (int i = 0; i < train_count; ++i) order[static_cast<std::size_t>(i)] = i;

  Gradients grads;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (batch < train_count) {
      Rng epoch_rng(derive_seed(derive_seed(config.seed, kTagEpoch),
                                static_cast<std::uint64_t>(epoch)));
      epoch_rng.shuffle(order);
    }
    double epoch_loss = 0.0;
    int batch_index = 0;
    for (int begin = 0; begin < train_count; begin += batch, ++batch_index) {
      const int rows = std::min(batch, train_count - begin);
      Eigen::MatrixXd xb(rows, sample.n());
      for (int i = 0; i < rows; ++i)
        xb.row(i) = x_train.row(order[static_cast<std::size_t>(begin + i)]);
      const std::uint64_t eta_seed = derive_seed(
          derive_seed(derive_seed(config.seed, kTagEta),
                      static_cast<std::uint64_t>(epoch)),
          static_cast<std::uint64_t>(batch_index));
      const double loss = elbo_loss_grad(params, xb, eta_seed, grads);
      if (!std::isfinite(loss)) throw TrainingDiverged(epoch);
      adamw_step(state, params, grads, config);
      epoch_loss += loss * rows;
    }
    trace.train_loss.push_back(epoch_loss / train_count);
    const double val = elbo_loss(
        params, x_val,
        derive_seed(derive_seed(config.seed, kTagVal), static_cast<std::uint64_t>(epoch)));
    if (!std::isfinite(val)) throw TrainingDiverged(epoch);
    trace.val_loss.push_back(val);
  }
  return {std::move(params), std::move(trace)};
}

std::pair<VAEParams, TrainTrace> baseline_vae(int n, long long lambda,
                                              const indep::SampleMatrix& sample,
                                              const TrainConfig& config) {
  MCMGraph all_ones{Eigen::MatrixXi::Ones(1, n)};
  const NCFAGraph graph = assign_latents(all_ones, lambda);
  return train(graph, sample, config);
}

Eigen::MatrixXd sample_generative(const VAEParams& params, int count,
                                  std::uint64_t seed) {
  Rng rng(seed);
  const Eigen::MatrixXd z = draw_normal(rng, count, params.lambda());
  Eigen::MatrixXd out = decode(params, z);
  const Eigen::ArrayXd sd = (0.5 * params.obs_lognoise.array()).exp();
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      out(i, j) += sd[j] * rng.normal();
  return out;
}

}  // namespace ncfa::vae
