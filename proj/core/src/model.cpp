#include "user/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "user/rng.hpp"

namespace user {

using nd::Tape;
using nd::Tensor;
using nd::Var;

namespace {

Tensor glorot_uniform(int rows, int cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Tensor w(rows, cols);
  for (double& v : w.data()) v = (2.0 * rng.uniform() - 1.0) * limit;
  return w;
}

void validate_config(const TrainConfig& cfg) {
  if (cfg.alpha < 0.0 || cfg.beta < 0.0)
    throw std::invalid_argument("TrainConfig: alpha and beta must be >= 0");
  if (cfg.epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  if (cfg.hidden_dim < 1 || cfg.embed_dim < 1)
    throw std::invalid_argument("TrainConfig: layer dimensions must be >= 1");
  if (cfg.log_every < 1) throw std::invalid_argument("TrainConfig: log_every must be >= 1");
}

}  // namespace

UserModel init_model(const Dataset& ds, const TrainConfig& cfg) {
  validate_config(cfg);
  validate_dataset(ds);
  if (ds.graph.edge_count() == 0) throw std::domain_error("init_model: graph has no edges");
  const int c = ds.num_classes();
  if (c < 2) throw std::invalid_argument("init_model: dataset needs labels with >= 2 classes");

  UserModel model;
  // Non-edges get a small positive seed so relu leaves them a live gradient.
  model.m = ds.graph.adjacency();
  for (double& v : model.m.data()) v += 0.01;

  Rng rng(cfg.seed);
  model.w1 = glorot_uniform(ds.features.cols(), cfg.hidden_dim, rng);
  model.w2 = glorot_uniform(cfg.hidden_dim, cfg.embed_dim, rng);
  model.wy = glorot_uniform(cfg.embed_dim, c, rng);
  return model;
}

Var realize_adjacency(Tape& tape, Var m) {
  const Var pos = tape.relu(m);
  const Var sym = tape.add(pos, tape.transpose(pos));
  return tape.mul(sym, tape.constant(Tensor::scalar(0.5)));
}

Var encode(Tape& tape, Var a_prime, const Tensor& x, Var w1, Var w2) {
  const Var a_norm = degree_normalize(tape, a_prime);
  const Var xw1 = tape.matmul(tape.constant(x), w1);
  const Var layer1 = tape.relu(tape.matmul(a_norm, xw1));
  return tape.matmul(tape.matmul(a_norm, layer1), w2);
}

Var reconstruct(Tape& tape, Var h) {
  return tape.sigmoid(tape.matmul(h, tape.transpose(h)));
}

Var loss_supported(Tape& tape, Var h, const Tensor& a_observed) {
  const Var a_hat = reconstruct(tape, h);
  return tape.sum_all(tape.square(tape.sub(a_hat, tape.constant(a_observed))));
}

Var partition_head(Tape& tape, Var h, Var wy) {
  return tape.row_softmax(tape.matmul(h, wy));
}

ForwardVars build_forward(Tape& tape, const UserModel& model, const Dataset& ds,
                          const TrainConfig& cfg) {
  ForwardVars fv;
  fv.m = tape.leaf(model.m);
  fv.w1 = tape.leaf(model.w1);
  fv.w2 = tape.leaf(model.w2);
  fv.wy = tape.leaf(model.wy);

  fv.a_prime = realize_adjacency(tape, fv.m);
  fv.h = encode(tape, fv.a_prime, ds.features, fv.w1, fv.w2);
  fv.y = partition_head(tape, fv.h, fv.wy);

  LnParts parts;
  fv.loss_n = loss_ln(tape, fv.a_prime, fv.y, ds.features, cfg.beta, cfg.npsi_convention,
                      &parts);
  fv.npsi = parts.npsi;
  fv.dbi = parts.dbi;
  fv.loss_s = loss_supported(tape, fv.h, ds.graph.adjacency());
  fv.loss = tape.add(fv.loss_n,
                     tape.mul(fv.loss_s, tape.constant(Tensor::scalar(cfg.alpha))));
  return fv;
}

Var loss_total(Tape& tape, const UserModel& model, const Dataset& ds, const TrainConfig& cfg) {
  return build_forward(tape, model, ds, cfg).loss;
}

TrainResult train(const Dataset& ds, const TrainConfig& cfg, const EpochProbe& probe) {
  validate_config(cfg);
  UserModel model = init_model(ds, cfg);
  nd::AdamState adam(nd::AdamConfig{.learning_rate = cfg.learning_rate});

  TrainResult result;
  result.history.reserve(static_cast<std::size_t>(cfg.epochs));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Tape tape;
    const ForwardVars fv = build_forward(tape, model, ds, cfg);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = tape.value(fv.loss)(0, 0);
    rec.loss_n = tape.value(fv.loss_n)(0, 0);
    rec.loss_s = tape.value(fv.loss_s)(0, 0);
    rec.npsi = tape.value(fv.npsi)(0, 0);
    rec.dbi = tape.value(fv.dbi)(0, 0);
    if (!std::isfinite(rec.loss))
      throw std::domain_error("train: loss diverged at epoch " + std::to_string(epoch));
    if (epoch % cfg.log_every == 0)
      rec.rank_a_prime = numerical_rank(tape.value(fv.a_prime));
    if (probe) probe(epoch, tape, fv);
    result.history.push_back(rec);

    const Tape::Gradients grads = tape.backward(fv.loss);
    adam_step({&model.m, &model.w1, &model.w2, &model.wy},
              {grads.wrt(fv.m), grads.wrt(fv.w1), grads.wrt(fv.w2), grads.wrt(fv.wy)}, adam);
  }

  // Final forward with the post-update parameters for the returned artifacts.
  Tape tape;
  const ForwardVars fv = build_forward(tape, model, ds, cfg);
  result.final_loss = tape.value(fv.loss)(0, 0);
  if (!std::isfinite(result.final_loss))
    throw std::domain_error("train: loss diverged at epoch " + std::to_string(cfg.epochs));
  result.embeddings = tape.value(fv.h);
  result.a_prime = tape.value(fv.a_prime);
  result.partition = argmax_rows(tape.value(fv.y));
  result.final_rank = numerical_rank(result.a_prime);
  result.model = std::move(model);
  return result;
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t read_u32(std::ifstream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("checkpoint: truncated header");
  return v;
}

void write_tensor(std::ofstream& out, const Tensor& t) {
  out.write(reinterpret_cast<const char*>(t.data().data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
}

Tensor read_tensor(std::ifstream& in, int rows, int cols) {
  Tensor t(rows, cols);
  in.read(reinterpret_cast<char*>(t.data().data()),
          static_cast<std::streamsize>(t.size() * sizeof(double)));
  if (!in) throw std::runtime_error("checkpoint: truncated data");
  return t;
}

}  // namespace

void save_model(const std::filesystem::path& file, const UserModel& model) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  write_u32(out, static_cast<std::uint32_t>(model.m.rows()));
  write_u32(out, static_cast<std::uint32_t>(model.w1.rows()));
  write_u32(out, static_cast<std::uint32_t>(model.w1.cols()));
  write_u32(out, static_cast<std::uint32_t>(model.w2.cols()));
  write_u32(out, static_cast<std::uint32_t>(model.wy.cols()));
  write_tensor(out, model.m);
  write_tensor(out, model.w1);
  write_tensor(out, model.w2);
  write_tensor(out, model.wy);
  if (!out) throw std::runtime_error("failed writing " + file.string());
}

UserModel load_model(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  const int n = static_cast<int>(read_u32(in));
  const int d = static_cast<int>(read_u32(in));
  const int hidden = static_cast<int>(read_u32(in));
  const int embed = static_cast<int>(read_u32(in));
  const int classes = static_cast<int>(read_u32(in));
  UserModel model;
  model.m = read_tensor(in, n, n);
  model.w1 = read_tensor(in, d, hidden);
  model.w2 = read_tensor(in, hidden, embed);
  model.wy = read_tensor(in, embed, classes);
  return model;
}

}  // namespace user
