#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "user/adam.hpp"
#include "user/entropy.hpp"
#include "user/graph.hpp"
#include "user/tape.hpp"

namespace user {

struct TrainConfig {
  double alpha = 0.05;  // supported-loss weight
  double beta = 1.0;    // DBI weight
  double learning_rate = 0.001;
  int epochs = 400;
  int hidden_dim = 32;
  int embed_dim = 16;
  std::uint64_t seed = 1;
  NpsiConvention npsi_convention = NpsiConvention::kReconciled;
  int log_every = 50;  // epochs between rank-of-A' probes
};

/// Learnable parameters: adjacency seed M plus the encoder/indicator weights.
/// The realized adjacency (relu(M) + relu(M)^T)/2 is non-negative and
/// symmetric by construction.
struct UserModel {
  nd::Tensor m;   // n x n
  nd::Tensor w1;  // d x hidden
  nd::Tensor w2;  // hidden x embed
  nd::Tensor wy;  // embed x classes
};

/// M = A_observed + 0.01 everywhere; weights Glorot-uniform from the seed.
/// The dataset must have labels (class count) and at least one edge.
UserModel init_model(const Dataset& ds, const TrainConfig& cfg);

nd::Var realize_adjacency(nd::Tape& tape, nd::Var m);

/// Two-layer propagation over the normalized realized adjacency:
/// H = At * relu(At * X * W1) * W2.
nd::Var encode(nd::Tape& tape, nd::Var a_prime, const nd::Tensor& x, nd::Var w1, nd::Var w2);

/// sigmoid(H H^T).
nd::Var reconstruct(nd::Tape& tape, nd::Var h);

/// Frobenius reconstruction loss against the observed adjacency.
nd::Var loss_supported(nd::Tape& tape, nd::Var h, const nd::Tensor& a_observed);

/// Row-softmax of H WY.
nd::Var partition_head(nd::Tape& tape, nd::Var h, nd::Var wy);

/// One full forward pass; leaves are m/w1/w2/wy.
struct ForwardVars {
  nd::Var m, w1, w2, wy;
  nd::Var a_prime;
  nd::Var h;
  nd::Var y;
  nd::Var npsi, dbi, loss_n, loss_s;
  nd::Var loss;
};

ForwardVars build_forward(nd::Tape& tape, const UserModel& model, const Dataset& ds,
                          const TrainConfig& cfg);

/// Total loss L_N + alpha * L_S on a fresh subgraph of `tape`.
nd::Var loss_total(nd::Tape& tape, const UserModel& model, const Dataset& ds,
                   const TrainConfig& cfg);

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double loss_n = 0.0;
  double loss_s = 0.0;
  double npsi = 0.0;
  double dbi = 0.0;
  int rank_a_prime = -1;  // -1 when not probed this epoch
};

struct TrainResult {
  UserModel model;
  std::vector<EpochRecord> history;  // one record per epoch
  nd::Tensor embeddings;             // final H
  nd::Tensor a_prime;                // final realized adjacency
  std::vector<int> partition;        // argmax of final Y
  double final_loss = 0.0;
  int final_rank = 0;
};

/// Observer invoked after each epoch's forward pass, before the update.
using EpochProbe = std::function<void(int epoch, const nd::Tape& tape, const ForwardVars& fv)>;

/// Full-batch Adam training; deterministic per config. Throws
/// std::domain_error naming the epoch if the loss stops being finite.
TrainResult train(const Dataset& ds, const TrainConfig& cfg, const EpochProbe& probe = {});

/// Checkpoint: uint32 sizes header (n, d, hidden, embed, classes) followed by
/// M, W1, W2, WY as little-endian float64, row-major.
void save_model(const std::filesystem::path& file, const UserModel& model);
UserModel load_model(const std::filesystem::path& file);

}  // namespace user
