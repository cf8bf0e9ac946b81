/*
 * Copyright 2026 The ASAT Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Differentiable regressors f(x, theta) -> y_hat over a flat parameter vector:
// an exact linear model, a tanh MLP, and a single-block attention regressor
// that reads a learned query token.

#ifndef ASAT_MODELS_HPP_
#define ASAT_MODELS_HPP_

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "asat/autodiff.hpp"
#include "asat/errors.hpp"
#include "asat/rng.hpp"

namespace asat {

enum class Family { Linear, Mlp, Attn };

inline std::string_view to_string(Family family) {
  switch (family) {
    case Family::Linear:
      return "linear";
    case Family::Mlp:
      return "mlp";
    case Family::Attn:
      return "attn";
  }
  return "?";
}

inline Family parse_family(std::string_view text) {
  if (text == "linear") return Family::Linear;
  if (text == "mlp") return Family::Mlp;
  if (text == "attn") return Family::Attn;
  throw ConfigError("unknown model family '" + std::string(text) + "'");
}

struct ArchDescriptor {
  Family family = Family::Linear;
  std::size_t input_dim = 160;
  std::vector<std::size_t> hidden;  // Mlp layer widths
  // Attn: input is read as `tokens` rows of `features` values; a learned
  // query token is prepended and the model width is `width`.
  std::size_t tokens = 32;
  std::size_t features = 5;
  std::size_t width = 16;

  static ArchDescriptor linear(std::size_t k) {
    return ArchDescriptor{Family::Linear, k, {}, 0, 0, 0};
  }
  static ArchDescriptor mlp(std::size_t k, std::vector<std::size_t> widths) {
    return ArchDescriptor{Family::Mlp, k, std::move(widths), 0, 0, 0};
  }
  static ArchDescriptor attn(std::size_t tokens, std::size_t features,
                             std::size_t width) {
    return ArchDescriptor{Family::Attn, tokens * features, {}, tokens, features,
                          width};
  }

  void validate() const {
    if (input_dim == 0) throw ConfigError("input dimension must be positive");
    if (family == Family::Mlp) {
      if (hidden.empty()) throw ConfigError("mlp needs at least one hidden layer");
      for (std::size_t w : hidden) {
        if (w == 0) throw ConfigError("mlp hidden widths must be positive");
      }
    }
    if (family == Family::Attn) {
      if (tokens == 0 || features == 0 || width == 0) {
        throw ConfigError("attn tokens, features and width must be positive");
      }
      if (tokens * features != input_dim) {
        throw ConfigError("attn input_dim must equal tokens * features");
      }
    }
  }

  friend bool operator==(const ArchDescriptor&, const ArchDescriptor&) = default;
};

// One trainable tensor inside the flat parameter vector.
struct ParamBlock {
  std::size_t rows;
  std::size_t cols;
  std::size_t offset;
  bool is_bias;
  std::size_t fan_in;
};

inline std::vector<ParamBlock> param_layout(const ArchDescriptor& arch) {
  arch.validate();
  std::vector<ParamBlock> blocks;
  std::size_t offset = 0;
  auto add = [&](std::size_t r, std::size_t c, bool bias, std::size_t fan_in) {
    blocks.push_back(ParamBlock{r, c, offset, bias, fan_in});
    offset += r * c;
  };
  switch (arch.family) {
    case Family::Linear:
      add(arch.input_dim, 1, false, arch.input_dim);
      add(1, 1, true, arch.input_dim);
      break;
    case Family::Mlp: {
      std::size_t in = arch.input_dim;
      for (std::size_t w : arch.hidden) {
        add(in, w, false, in);
        add(1, w, true, in);
        in = w;
      }
      add(in, 1, false, in);
      add(1, 1, true, in);
      break;
    }
    case Family::Attn: {
      const std::size_t f = arch.features;
      const std::size_t d = arch.width;
      add(1, f, false, f);  // query token
      add(f, d, false, f);  // token embedding
      add(1, d, true, f);
      add(d, d, false, d);  // query projection
      add(d, d, false, d);  // key projection
      add(d, d, false, d);  // value projection
      add(d, d, false, d);  // position-wise affine
      add(1, d, true, d);
      add(d, 1, false, d);  // scalar head
      add(1, 1, true, d);
      break;
    }
  }
  return blocks;
}

inline std::size_t parameter_count(const ArchDescriptor& arch) {
  const auto blocks = param_layout(arch);
  return blocks.back().offset + blocks.back().rows * blocks.back().cols;
}

class Model {
 public:
  Model() = default;
  Model(ArchDescriptor arch, std::vector<double> theta)
      : arch_(std::move(arch)), theta_(std::move(theta)) {
    if (theta_.size() != parameter_count(arch_)) {
      throw ConfigError("parameter vector length " +
                        std::to_string(theta_.size()) +
                        " does not match architecture (" +
                        std::to_string(parameter_count(arch_)) + ")");
    }
  }

  // Linear starts at zero; other families draw weights from
  // U[-1/sqrt(fan_in), 1/sqrt(fan_in)] and zero their biases.
  static Model init(const ArchDescriptor& arch, std::uint64_t seed) {
    std::vector<double> theta(parameter_count(arch), 0.0);
    if (arch.family != Family::Linear) {
      SplitMix64 rng(seed);
      for (const ParamBlock& block : param_layout(arch)) {
        if (block.is_bias) continue;
        const double s = 1.0 / std::sqrt(static_cast<double>(block.fan_in));
        for (std::size_t i = 0; i < block.rows * block.cols; ++i) {
          theta[block.offset + i] = rng.uniform(-s, s);
        }
      }
    }
    return Model(arch, std::move(theta));
  }

  const ArchDescriptor& arch() const { return arch_; }
  Family family() const { return arch_.family; }
  std::size_t input_dim() const { return arch_.input_dim; }
  std::span<const double> theta() const { return theta_; }
  std::span<double> mutable_theta() { return theta_; }
  void set_theta(std::vector<double> theta) {
    if (theta.size() != theta_.size()) throw ShapeError("theta length mismatch");
    theta_ = std::move(theta);
  }

  // Places every parameter block on the tape as a leaf.
  std::vector<Tape::NodeId> bind(Tape& tape) const {
    std::vector<Tape::NodeId> ids;
    for (const ParamBlock& b : param_layout(arch_)) {
      Matrix m(b.rows, b.cols,
               std::span<const double>(theta_).subspan(b.offset, b.rows * b.cols));
      ids.push_back(tape.parameter(std::move(m), b.offset));
    }
    return ids;
  }

  // Records f(x) for a 1 x k input node; returns the 1 x 1 output node.
  Tape::NodeId forward(Tape& tape, std::span<const Tape::NodeId> params,
                       Tape::NodeId x) const {
    const Matrix& xv = tape.value(x);
    if (xv.size() != arch_.input_dim) {
      throw ShapeError("input length " + std::to_string(xv.size()) +
                       " does not match model input dimension " +
                       std::to_string(arch_.input_dim));
    }
    switch (arch_.family) {
      case Family::Linear:
        return tape.add(tape.matmul(x, params[0]), params[1]);
      case Family::Mlp: {
        Tape::NodeId h = x;
        std::size_t p = 0;
        for (std::size_t layer = 0; layer < arch_.hidden.size(); ++layer, p += 2) {
          h = tape.tanh(tape.add_row_broadcast(tape.matmul(h, params[p]),
                                               params[p + 1]));
        }
        return tape.add(tape.matmul(h, params[p]), params[p + 1]);
      }
      case Family::Attn:
        return forward_attn(tape, params, x);
    }
    throw ConfigError("unknown model family");
  }

  double predict(std::span<const double> x) const {
    Tape tape;
    const auto params = bind(tape);
    const auto in = tape.input(Matrix(1, x.size(), x));
    return tape.value(forward(tape, params, in)).data[0];
  }

 private:
  Tape::NodeId forward_attn(Tape& tape, std::span<const Tape::NodeId> p,
                            Tape::NodeId x) const {
    // p: query, W_embed, b_embed, W_q, W_k, W_v, W_ff, b_ff, w_out, b_out
    const auto tokens = tape.reshape(x, arch_.tokens, arch_.features);
    const auto seq = tape.concat_rows(p[0], tokens);
    const auto h = tape.tanh(tape.add_row_broadcast(tape.matmul(seq, p[1]), p[2]));
    const auto h0 = tape.slice_row(h, 0);
    const auto q = tape.matmul(h0, p[3]);
    const auto k = tape.matmul(h, p[4]);
    const auto v = tape.matmul(h, p[5]);
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(arch_.width));
    const auto attn = tape.softmax_rows(tape.scale(tape.matmul_nt(q, k), inv_sqrt_d));
    const auto ctx = tape.add(tape.matmul(attn, v), h0);
    const auto ff = tape.tanh(tape.add_row_broadcast(tape.matmul(ctx, p[6]), p[7]));
    return tape.add(tape.matmul(ff, p[8]), p[9]);
  }

  ArchDescriptor arch_;
  std::vector<double> theta_;
};

// Squared-error loss (f(x) - y)^2 recorded on a fresh tape.
struct LossTape {
  double loss = 0.0;
  Tape tape;
  Tape::NodeId root = 0;
};

inline LossTape forward_loss(const Model& model, std::span<const double> x,
                             double y) {
  if (x.size() != model.input_dim()) {
    throw ShapeError("input length " + std::to_string(x.size()) +
                     " does not match model input dimension " +
                     std::to_string(model.input_dim()));
  }
  LossTape out;
  Tape& tape = out.tape;
  const auto params = model.bind(tape);
  const auto in = tape.input(Matrix(1, x.size(), x));
  const auto pred = model.forward(tape, params, in);
  const auto target = tape.constant(Matrix(1, 1, y));
  out.root = tape.mean(tape.square(tape.sub(pred, target)));
  out.loss = tape.value(out.root).data[0];
  return out;
}

inline GradientPair backward(const LossTape& recorded) {
  return recorded.tape.gradients(recorded.root);
}

inline double squared_loss(const Model& model, std::span<const double> x,
                           double y) {
  const double r = model.predict(x) - y;
  return r * r;
}

// Text checkpoint: a header line `family k arch...` followed by one
// parameter per line at 17 significant digits.
inline void save_model(const Model& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model file '" + path + "'");
  const ArchDescriptor& a = model.arch();
  out << to_string(a.family) << ' ' << a.input_dim;
  if (a.family == Family::Mlp) {
    out << ' ' << a.hidden.size();
    for (std::size_t w : a.hidden) out << ' ' << w;
  } else if (a.family == Family::Attn) {
    out << ' ' << a.tokens << ' ' << a.features << ' ' << a.width;
  }
  out << '\n';
  char buf[40];
  for (double v : model.theta()) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", v);
    out << buf;
  }
  if (!out) throw IoError("failed writing model file '" + path + "'");
}

inline Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string family_name;
  ArchDescriptor arch;
  if (!(hs >> family_name >> arch.input_dim)) {
    throw DataError(path + ":1: malformed model header");
  }
  arch.family = parse_family(family_name);
  if (arch.family == Family::Mlp) {
    std::size_t layers = 0;
    if (!(hs >> layers)) throw DataError(path + ":1: missing mlp layer count");
    arch.hidden.resize(layers);
    for (auto& w : arch.hidden) {
      if (!(hs >> w)) throw DataError(path + ":1: missing mlp width");
    }
    arch.tokens = arch.features = arch.width = 0;
  } else if (arch.family == Family::Attn) {
    if (!(hs >> arch.tokens >> arch.features >> arch.width)) {
      throw DataError(path + ":1: malformed attn header");
    }
  } else {
    arch.tokens = arch.features = arch.width = 0;
  }
  try {
    arch.validate();
  } catch (const ConfigError& e) {
    throw DataError(path + ":1: " + e.what());
  }
  const std::size_t n = parameter_count(arch);
  std::vector<double> theta;
  theta.reserve(n);
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    char* end = nullptr;
    const double v = std::strtod(line.c_str(), &end);
    if (end == line.c_str()) {
      throw DataError(path + ":" + std::to_string(line_no) + ": bad parameter");
    }
    theta.push_back(v);
  }
  if (theta.size() != n) {
    throw DataError(path + ": expected " + std::to_string(n) +
                    " parameters, found " + std::to_string(theta.size()));
  }
  return Model(arch, std::move(theta));
}

}  // namespace asat

#endif  // ASAT_MODELS_HPP_
