#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "gazekex/error.hpp"
#include "gazekex/rng.hpp"
#include "gazekex/tape.hpp"
#include "gazekex/tensor.hpp"

namespace gazekex {

inline constexpr double kLstmInitRange = 0.08;
inline constexpr double kForgetGateBias = 1.0;

inline Tensor uniform_tensor(Shape shape, Rng& rng, double range) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-range, range);
  return t;
}

// One LSTM direction: gate order i, f, g, o. Weights and recurrent weights
// are uniform in [-0.08, 0.08]; biases start at zero except the forget gate,
// which starts at 1.0 so memory is open early in training.
inline void add_lstm_params(ParamSet& params, const std::string& prefix, std::size_t input_dim,
                            std::size_t hidden_dim, Rng& rng) {
  const char* gates[] = {"i", "f", "g", "o"};
  for (const char* g : gates) {
    params.add(prefix + ".W" + g, uniform_tensor({hidden_dim, input_dim}, rng, kLstmInitRange));
    params.add(prefix + ".U" + g, uniform_tensor({hidden_dim, hidden_dim}, rng, kLstmInitRange));
    Tensor b({hidden_dim});
    if (std::string(g) == "f") b.fill(kForgetGateBias);
    params.add(prefix + ".b" + g, std::move(b));
  }
}

// Parameters bound onto a tape as input nodes. One binding per forward pass;
// gradients are read back off the same node ids after backward.
class TapeParams {
 public:
  TapeParams(Tape& tape, const ParamSet& params) : tape_(&tape) {
    for (const auto& name : params.names()) {
      ids_.emplace(name, tape.input(params.at(name)));
    }
  }

  Tape::NodeId at(const std::string& name) const {
    auto it = ids_.find(name);
    if (it == ids_.end()) throw ContractError("parameter not bound on tape: " + name);
    return it->second;
  }

  bool contains(const std::string& name) const { return ids_.count(name) > 0; }

  // Copies accumulated tape gradients into `grads` (adding to what is there).
  void accumulate_grads(const ParamSet& params, ParamSet& grads) const {
    for (const auto& name : params.names()) {
      const Tensor& g = tape_->grad(at(name));
      Tensor& dst = grads.at(name);
      require_same_shape(g, dst, "accumulate_grads");
      for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
    }
  }

 private:
  Tape* tape_;
  std::unordered_map<std::string, Tape::NodeId> ids_;
};

struct LstmState {
  Tape::NodeId h;
  Tape::NodeId c;
};

inline LstmState lstm_initial_state(Tape& tape, std::size_t hidden_dim) {
  return {tape.input(Tensor({hidden_dim})), tape.input(Tensor({hidden_dim}))};
}

inline LstmState lstm_step(Tape& tape, const TapeParams& tp, const std::string& prefix,
                           Tape::NodeId x, LstmState prev, std::size_t hidden_dim) {
  const Tape::NodeId zero = tape.input(Tensor({hidden_dim}));
  auto pre = [&](const char* g) {
    Tape::NodeId wx = tape.affine(tp.at(prefix + ".W" + g), x, tp.at(prefix + ".b" + g));
    Tape::NodeId uh = tape.affine(tp.at(prefix + ".U" + g), prev.h, zero);
    return tape.add(wx, uh);
  };
  const Tape::NodeId i = tape.logistic(pre("i"));
  const Tape::NodeId f = tape.logistic(pre("f"));
  const Tape::NodeId g = tape.tanh(pre("g"));
  const Tape::NodeId o = tape.logistic(pre("o"));
  const Tape::NodeId c = tape.add(tape.mul(f, prev.c), tape.mul(i, g));
  const Tape::NodeId h = tape.mul(o, tape.tanh(c));
  return {h, c};
}

// Runs one direction over the sequence; hidden states in input order.
inline std::vector<Tape::NodeId> lstm_run(Tape& tape, const TapeParams& tp, const std::string& prefix,
                                          const std::vector<Tape::NodeId>& xs, std::size_t hidden_dim,
                                          bool reversed) {
  std::vector<Tape::NodeId> hs(xs.size());
  LstmState state = lstm_initial_state(tape, hidden_dim);
  if (reversed) {
    for (std::size_t t = xs.size(); t-- > 0;) {
      state = lstm_step(tape, tp, prefix, xs[t], state, hidden_dim);
      hs[t] = state.h;
    }
  } else {
    for (std::size_t t = 0; t < xs.size(); ++t) {
      state = lstm_step(tape, tp, prefix, xs[t], state, hidden_dim);
      hs[t] = state.h;
    }
  }
  return hs;
}

// Per position t: concat of forward state at t and backward state at t.
// Output dim is 2 * hidden_dim. Parameter prefixes are <prefix>.fwd/.bwd.
inline std::vector<Tape::NodeId> bilstm(Tape& tape, const TapeParams& tp, const std::string& prefix,
                                        const std::vector<Tape::NodeId>& xs, std::size_t hidden_dim) {
  if (xs.empty()) throw EmptyInputError("bilstm: empty sequence");
  std::vector<Tape::NodeId> fwd = lstm_run(tape, tp, prefix + ".fwd", xs, hidden_dim, false);
  std::vector<Tape::NodeId> bwd = lstm_run(tape, tp, prefix + ".bwd", xs, hidden_dim, true);
  std::vector<Tape::NodeId> out(xs.size());
  for (std::size_t t = 0; t < xs.size(); ++t) out[t] = tape.concat({fwd[t], bwd[t]});
  return out;
}

// Plain-vector softmax sharing the tape's numerics.
inline std::vector<double> softmax_values(const std::vector<double>& xs) {
  if (xs.empty()) throw EmptyInputError("softmax_values: empty input");
  Tape tape;
  Tape::NodeId y = tape.softmax(tape.input(Tensor::row(xs)));
  const Tensor& t = tape.value(y);
  return std::vector<double>(t.data().begin(), t.data().end());
}

}  // namespace gazekex
