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

// Minimal reverse-mode differentiation over dense row-major matrices.
//
// A Tape records a straight-line program of primitive operations. Leaves are
// tagged as model input, model parameter, or constant; a backward pass from a
// scalar root yields the gradient with respect to every input and parameter
// leaf in one sweep.

#ifndef ASAT_AUTODIFF_HPP_
#define ASAT_AUTODIFF_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "asat/errors.hpp"

namespace asat {

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}
  Matrix(std::size_t r, std::size_t c, std::span<const double> values)
      : rows(r), cols(c), data(values.begin(), values.end()) {
    if (data.size() != r * c) throw ShapeError("matrix data size mismatch");
  }

  std::size_t size() const { return data.size(); }
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }
};

struct GradientPair {
  std::vector<double> grad_input;
  std::vector<double> grad_params;
};

class Tape {
 public:
  using NodeId = std::size_t;

  enum class Op {
    kLeaf,
    kAdd,
    kSub,
    kMul,            // elementwise
    kMatMul,         // A * B
    kMatMulNT,       // A * B^T
    kTanh,
    kSoftmaxRows,
    kSquare,
    kMean,           // all entries -> 1x1
    kAddRowBroadcast,  // A (r x c) + b (1 x c) on every row
    kScale,          // scalar * A
    kReshape,
    kConcatRows,
    kSliceRow,
  };

  enum class LeafKind { kInput, kParam, kConstant };

  NodeId input(Matrix value) {
    const std::size_t offset = input_size_;
    input_size_ += value.size();
    return push_leaf(std::move(value), LeafKind::kInput, offset);
  }

  // `offset` locates the leaf within the flat parameter vector.
  NodeId parameter(Matrix value, std::size_t offset) {
    param_size_ = std::max(param_size_, offset + value.size());
    return push_leaf(std::move(value), LeafKind::kParam, offset);
  }

  NodeId constant(Matrix value) {
    return push_leaf(std::move(value), LeafKind::kConstant, 0);
  }

  NodeId add(NodeId a, NodeId b) {
    require_same_shape(a, b, "add");
    Matrix out = value(a);
    const auto& bv = value(b).data;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += bv[i];
    return push(Op::kAdd, a, b, std::move(out));
  }

  NodeId sub(NodeId a, NodeId b) {
    require_same_shape(a, b, "sub");
    Matrix out = value(a);
    const auto& bv = value(b).data;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= bv[i];
    return push(Op::kSub, a, b, std::move(out));
  }

  NodeId mul(NodeId a, NodeId b) {
    require_same_shape(a, b, "mul");
    Matrix out = value(a);
    const auto& bv = value(b).data;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= bv[i];
    return push(Op::kMul, a, b, std::move(out));
  }

  NodeId matmul(NodeId a, NodeId b) {
    const Matrix& A = value(a);
    const Matrix& B = value(b);
    if (A.cols != B.rows) throw ShapeError("matmul inner dimension mismatch");
    Matrix out(A.rows, B.cols);
    for (std::size_t i = 0; i < A.rows; ++i) {
      for (std::size_t p = 0; p < A.cols; ++p) {
        const double a_ip = A(i, p);
        for (std::size_t j = 0; j < B.cols; ++j) out(i, j) += a_ip * B(p, j);
      }
    }
    return push(Op::kMatMul, a, b, std::move(out));
  }

  NodeId matmul_nt(NodeId a, NodeId b) {
    const Matrix& A = value(a);
    const Matrix& B = value(b);
    if (A.cols != B.cols) throw ShapeError("matmul_nt inner dimension mismatch");
    Matrix out(A.rows, B.rows);
    for (std::size_t i = 0; i < A.rows; ++i) {
      for (std::size_t j = 0; j < B.rows; ++j) {
        double s = 0.0;
        for (std::size_t p = 0; p < A.cols; ++p) s += A(i, p) * B(j, p);
        out(i, j) = s;
      }
    }
    return push(Op::kMatMulNT, a, b, std::move(out));
  }

  NodeId tanh(NodeId a) {
    Matrix out = value(a);
    for (double& x : out.data) x = std::tanh(x);
    return push(Op::kTanh, a, a, std::move(out));
  }

  NodeId softmax_rows(NodeId a) {
    Matrix out = value(a);
    for (std::size_t r = 0; r < out.rows; ++r) {
      double* row = out.data.data() + r * out.cols;
      const double m = *std::max_element(row, row + out.cols);
      double z = 0.0;
      for (std::size_t c = 0; c < out.cols; ++c) {
        row[c] = std::exp(row[c] - m);
        z += row[c];
      }
      for (std::size_t c = 0; c < out.cols; ++c) row[c] /= z;
    }
    return push(Op::kSoftmaxRows, a, a, std::move(out));
  }

  NodeId square(NodeId a) {
    Matrix out = value(a);
    for (double& x : out.data) x *= x;
    return push(Op::kSquare, a, a, std::move(out));
  }

  NodeId mean(NodeId a) {
    const Matrix& A = value(a);
    if (A.size() == 0) throw EmptyInputError("mean of an empty matrix");
    double s = 0.0;
    for (double x : A.data) s += x;
    Matrix out(1, 1, s / static_cast<double>(A.size()));
    return push(Op::kMean, a, a, std::move(out));
  }

  NodeId add_row_broadcast(NodeId a, NodeId row) {
    const Matrix& R = value(row);
    Matrix out = value(a);
    if (R.rows != 1 || R.cols != out.cols) {
      throw ShapeError("broadcast row must be 1 x cols");
    }
    for (std::size_t r = 0; r < out.rows; ++r) {
      for (std::size_t c = 0; c < out.cols; ++c) out(r, c) += R.data[c];
    }
    return push(Op::kAddRowBroadcast, a, row, std::move(out));
  }

  NodeId scale(NodeId a, double factor) {
    Matrix out = value(a);
    for (double& x : out.data) x *= factor;
    NodeId id = push(Op::kScale, a, a, std::move(out));
    nodes_[id].scalar = factor;
    return id;
  }

  NodeId reshape(NodeId a, std::size_t rows, std::size_t cols) {
    Matrix out = value(a);
    if (rows * cols != out.size()) throw ShapeError("reshape size mismatch");
    out.rows = rows;
    out.cols = cols;
    return push(Op::kReshape, a, a, std::move(out));
  }

  NodeId concat_rows(NodeId top, NodeId bottom) {
    const Matrix& T = value(top);
    const Matrix& B = value(bottom);
    if (T.cols != B.cols) throw ShapeError("concat_rows column mismatch");
    Matrix out(T.rows + B.rows, T.cols);
    std::copy(T.data.begin(), T.data.end(), out.data.begin());
    std::copy(B.data.begin(), B.data.end(),
              out.data.begin() + static_cast<std::ptrdiff_t>(T.size()));
    return push(Op::kConcatRows, top, bottom, std::move(out));
  }

  NodeId slice_row(NodeId a, std::size_t row) {
    const Matrix& A = value(a);
    if (row >= A.rows) throw RangeError("slice_row index out of range");
    Matrix out(1, A.cols);
    std::copy_n(A.data.begin() + static_cast<std::ptrdiff_t>(row * A.cols),
                A.cols, out.data.begin());
    NodeId id = push(Op::kSliceRow, a, a, std::move(out));
    nodes_[id].index = row;
    return id;
  }

  const Matrix& value(NodeId id) const { return nodes_.at(id).value; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t input_size() const { return input_size_; }
  std::size_t param_size() const { return param_size_; }

  // Adjoint of every node for d(root)/d(node). Root must be 1x1. Const: the
  // tape can be swept any number of times with identical results.
  std::vector<Matrix> adjoints(NodeId root) const {
    if (value(root).size() != 1) throw ShapeError("backward root must be scalar");
    std::vector<Matrix> adj(nodes_.size());
    adj[root] = Matrix(1, 1, 1.0);
    for (std::size_t n = root + 1; n-- > 0;) {
      if (adj[n].size() == 0) continue;
      const Node& node = nodes_[n];
      if (node.op == Op::kLeaf) continue;
      propagate(node, adj[n], adj);
    }
    return adj;
  }

  GradientPair gradients(NodeId root) const {
    const std::vector<Matrix> adj = adjoints(root);
    GradientPair out{std::vector<double>(input_size_, 0.0),
                     std::vector<double>(param_size_, 0.0)};
    for (std::size_t n = 0; n <= root; ++n) {
      const Node& node = nodes_[n];
      if (node.op != Op::kLeaf || adj[n].size() == 0) continue;
      std::vector<double>* target = nullptr;
      if (node.leaf == LeafKind::kInput) target = &out.grad_input;
      if (node.leaf == LeafKind::kParam) target = &out.grad_params;
      if (target == nullptr) continue;
      for (std::size_t i = 0; i < adj[n].size(); ++i) {
        (*target)[node.index + i] += adj[n].data[i];
      }
    }
    return out;
  }

 private:
  struct Node {
    Op op = Op::kLeaf;
    NodeId a = 0;
    NodeId b = 0;
    Matrix value;
    LeafKind leaf = LeafKind::kConstant;
    std::size_t index = 0;  // leaf offset or sliced row
    double scalar = 0.0;
  };

  NodeId push_leaf(Matrix value, LeafKind kind, std::size_t offset) {
    Node node;
    node.op = Op::kLeaf;
    node.value = std::move(value);
    node.leaf = kind;
    node.index = offset;
    nodes_.push_back(std::move(node));
    return nodes_.size() - 1;
  }

  NodeId push(Op op, NodeId a, NodeId b, Matrix value) {
    Node node;
    node.op = op;
    node.a = a;
    node.b = b;
    node.value = std::move(value);
    nodes_.push_back(std::move(node));
    return nodes_.size() - 1;
  }

  void require_same_shape(NodeId a, NodeId b, const char* what) const {
    const Matrix& A = value(a);
    const Matrix& B = value(b);
    if (A.rows != B.rows || A.cols != B.cols) {
      throw ShapeError(std::string(what) + ": operand shapes differ");
    }
  }

  static Matrix& slot(std::vector<Matrix>& adj, NodeId id, const Matrix& like) {
    if (adj[id].size() == 0) adj[id] = Matrix(like.rows, like.cols);
    return adj[id];
  }

  void propagate(const Node& node, const Matrix& g,
                 std::vector<Matrix>& adj) const {
    const Matrix& A = value(node.a);
    switch (node.op) {
      case Op::kLeaf:
        return;
      case Op::kAdd:
      case Op::kSub: {
        Matrix& da = slot(adj, node.a, A);
        for (std::size_t i = 0; i < g.size(); ++i) da.data[i] += g.data[i];
        Matrix& db = slot(adj, node.b, value(node.b));
        const double s = node.op == Op::kAdd ? 1.0 : -1.0;
        for (std::size_t i = 0; i < g.size(); ++i) db.data[i] += s * g.data[i];
        return;
      }
      case Op::kMul: {
        const Matrix& B = value(node.b);
        Matrix& da = slot(adj, node.a, A);
        for (std::size_t i = 0; i < g.size(); ++i) da.data[i] += g.data[i] * B.data[i];
        Matrix& db = slot(adj, node.b, B);
        for (std::size_t i = 0; i < g.size(); ++i) db.data[i] += g.data[i] * A.data[i];
        return;
      }
      case Op::kMatMul: {
        // C = A B: dA = G B^T, dB = A^T G
        const Matrix& B = value(node.b);
        Matrix& da = slot(adj, node.a, A);
        for (std::size_t i = 0; i < A.rows; ++i) {
          for (std::size_t p = 0; p < A.cols; ++p) {
            double s = 0.0;
            for (std::size_t j = 0; j < B.cols; ++j) s += g(i, j) * B(p, j);
            da(i, p) += s;
          }
        }
        Matrix& db = slot(adj, node.b, B);
        for (std::size_t i = 0; i < A.rows; ++i) {
          for (std::size_t p = 0; p < A.cols; ++p) {
            const double a_ip = A(i, p);
            for (std::size_t j = 0; j < B.cols; ++j) db(p, j) += a_ip * g(i, j);
          }
        }
        return;
      }
      case Op::kMatMulNT: {
        // C = A B^T: dA = G B, dB = G^T A
        const Matrix& B = value(node.b);
        Matrix& da = slot(adj, node.a, A);
        Matrix& db = slot(adj, node.b, B);
        for (std::size_t i = 0; i < A.rows; ++i) {
          for (std::size_t j = 0; j < B.rows; ++j) {
            const double gij = g(i, j);
            for (std::size_t p = 0; p < A.cols; ++p) {
              da(i, p) += gij * B(j, p);
              db(j, p) += gij * A(i, p);
            }
          }
        }
        return;
      }
      case Op::kTanh: {
        const Matrix& Y = node.value;
        Matrix& da = slot(adj, node.a, A);
        for (std::size_t i = 0; i < g.size(); ++i) {
          da.data[i] += g.data[i] * (1.0 - Y.data[i] * Y.data[i]);
        }
        return;
      }
      case Op::kSoftmaxRows: {
        const Matrix& Y = node.value;
        Matrix& da = slot(adj, node.a, A);
        for (std::size_t r = 0; r < Y.rows; ++r) {
          double dot = 0.0;
          for (std::size_t c = 0; c < Y.cols; ++c) dot += g(r, c) * Y(r, c);
          for (std::size_t c = 0; c < Y.cols; ++c) {
            da(r, c) += Y(r, c) * (g(r, c) - dot);
          }
        }
        return;
      }
      case Op::kSquare: {
        Matrix& da = slot(adj, node.a, A);
        for (std::size_t i = 0; i < g.size(); ++i) {
          da.data[i] += 2.0 * A.data[i] * g.data[i];
        }
        return;
      }
      case Op::kMean: {
        Matrix& da = slot(adj, node.a, A);
        const double share = g.data[0] / static_cast<double>(A.size());
        for (double& x : da.data) x += share;
        return;
      }
      case Op::kAddRowBroadcast: {
        Matrix& da = slot(adj, node.a, A);
        for (std::size_t i = 0; i < g.size(); ++i) da.data[i] += g.data[i];
        Matrix& db = slot(adj, node.b, value(node.b));
        for (std::size_t r = 0; r < g.rows; ++r) {
          for (std::size_t c = 0; c < g.cols; ++c) db.data[c] += g(r, c);
        }
        return;
      }
      case Op::kScale: {
        Matrix& da = slot(adj, node.a, A);
        for (std::size_t i = 0; i < g.size(); ++i) da.data[i] += node.scalar * g.data[i];
        return;
      }
      case Op::kReshape: {
        Matrix& da = slot(adj, node.a, A);
        for (std::size_t i = 0; i < g.size(); ++i) da.data[i] += g.data[i];
        return;
      }
      case Op::kConcatRows: {
        const Matrix& B = value(node.b);
        Matrix& da = slot(adj, node.a, A);
        Matrix& db = slot(adj, node.b, B);
        for (std::size_t i = 0; i < A.size(); ++i) da.data[i] += g.data[i];
        for (std::size_t i = 0; i < B.size(); ++i) db.data[i] += g.data[A.size() + i];
        return;
      }
      case Op::kSliceRow: {
        Matrix& da = slot(adj, node.a, A);
        for (std::size_t c = 0; c < g.cols; ++c) da(node.index, c) += g.data[c];
        return;
      }
    }
  }

  std::vector<Node> nodes_;
  std::size_t input_size_ = 0;
  std::size_t param_size_ = 0;
};

}  // namespace asat

#endif  // ASAT_AUTODIFF_HPP_
