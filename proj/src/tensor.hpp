#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace lrgae {

// Dense row-major matrix of doubles with optional gradient buffer.
// A Tensor is a cheap handle onto shared storage; operations never mutate
// their inputs. Gradients accumulate into the `grad` buffer of nodes with
// requires_grad set, driven by a Tape.
class Tensor {
 public:
  Tensor() : Tensor(0, 0) {}
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0);

  static Tensor from_values(std::size_t rows, std::size_t cols,
                            std::vector<double> values);
  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor zeros(std::size_t rows, std::size_t cols) {
    return Tensor(rows, cols, 0.0);
  }
  static Tensor ones(std::size_t rows, std::size_t cols) {
    return Tensor(rows, cols, 1.0);
  }
  // Entries uniform in [lo, hi).
  static Tensor uniform(std::size_t rows, std::size_t cols, Rng& rng,
                        double lo = -1.0, double hi = 1.0);
  // Glorot-uniform initialization for a fan_in x fan_out weight matrix.
  static Tensor glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng);

  std::size_t rows() const { return node_->rows; }
  std::size_t cols() const { return node_->cols; }
  std::size_t size() const { return node_->values.size(); }
  bool empty() const { return size() == 0; }

  double at(std::size_t r, std::size_t c) const {
    return node_->values[r * node_->cols + c];
  }
  double& at(std::size_t r, std::size_t c) {
    return node_->values[r * node_->cols + c];
  }
  double item() const;  // value of a 1x1 tensor

  std::span<const double> values() const { return node_->values; }
  std::span<double> values_mut() { return node_->values; }

  bool requires_grad() const { return node_->requires_grad; }
  Tensor& set_requires_grad(bool on);

  // Gradient buffer; valid only for requires_grad tensors.
  std::span<const double> grad() const { return node_->grad; }
  std::span<double> grad_mut() { return node_->grad; }
  void zero_grad();

  // Value copy detached from any gradient history.
  Tensor detached() const;

  // Identity of the underlying storage (two handles may alias).
  bool same_storage(const Tensor& other) const { return node_ == other.node_; }

  std::string shape_str() const;

 private:
  friend class Tape;
  friend struct TensorNode;

  struct Node {
    std::size_t rows = 0, cols = 0;
    std::vector<double> values;
    bool requires_grad = false;
    std::vector<double> grad;  // same length as values when requires_grad
  };

  std::shared_ptr<Node> node_;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
};

// Compressed sparse row matrix. Immutable after construction; handles are
// cheap to copy and safe to share across threads. The transpose is computed
// once on demand and cached.
class SparseMatrix {
 public:
  SparseMatrix();
  SparseMatrix(std::size_t rows, std::size_t cols,
               std::vector<std::size_t> row_offsets,
               std::vector<std::size_t> col_indices,
               std::vector<double> values, bool symmetric = false);

  static SparseMatrix identity(std::size_t n);
  // Builds from (row, col, value) triplets; entries are sorted per row and
  // duplicate coordinates are summed.
  static SparseMatrix from_triplets(
      std::size_t rows, std::size_t cols,
      std::vector<std::tuple<std::size_t, std::size_t, double>> triplets,
      bool symmetric = false);

  std::size_t rows() const { return data_->rows; }
  std::size_t cols() const { return data_->cols; }
  std::size_t nnz() const { return data_->col_indices.size(); }
  bool symmetric() const { return data_->symmetric; }

  std::span<const std::size_t> row_offsets() const { return data_->row_offsets; }
  std::span<const std::size_t> col_indices() const { return data_->col_indices; }
  std::span<const double> values() const { return data_->values; }

  // Entry lookup (binary search within the row); 0 when absent.
  double at(std::size_t r, std::size_t c) const;

  const SparseMatrix& transposed() const;
  Tensor to_dense() const;

 private:
  struct Data {
    std::size_t rows = 0, cols = 0;
    std::vector<std::size_t> row_offsets;
    std::vector<std::size_t> col_indices;
    std::vector<double> values;
    bool symmetric = false;
    // Lazily built transpose (self for symmetric matrices).
    mutable std::shared_ptr<SparseMatrix> transpose;
    mutable std::once_flag transpose_once;
  };
  std::shared_ptr<Data> data_;
};

// Records the backward rule of every differentiable operation executed in
// one forward pass, in execution order. Rebuilt for every pass; confined to
// a single training run.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void record(std::function<void()> backward_rule) {
    ops_.push_back(std::move(backward_rule));
  }
  std::size_t size() const { return ops_.size(); }
  void clear() { ops_.clear(); }

  // Seeds d(loss)/d(loss) = 1 and applies every recorded rule exactly once,
  // newest first. `loss` must be a scalar (1x1) tensor.
  void backward(Tensor& loss);

 private:
  std::vector<std::function<void()>> ops_;
};

// ---- Differentiable operations -------------------------------------------
// Every op records its backward rule on `tape` when any input requires
// grad; outputs inherit requires_grad from their inputs.

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor spmm(Tape& tape, const SparseMatrix& s, const Tensor& x);

Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor relu(Tape& tape, const Tensor& a);
Tensor leaky_relu(Tape& tape, const Tensor& a, double slope);
Tensor sigmoid(Tape& tape, const Tensor& a);
Tensor exp(Tape& tape, const Tensor& a);
Tensor log(Tape& tape, const Tensor& a);
Tensor scale(Tape& tape, const Tensor& a, double c);
// log(1 + e^x), evaluated stably.
Tensor softplus(Tape& tape, const Tensor& a);
// x^p for x >= 0 (negative inputs clamp to 0); p >= 1.
Tensor pow_nonneg(Tape& tape, const Tensor& a, double p);
// Keeps each entry with probability keep_prob and rescales by 1/keep_prob;
// identity when training is false.
Tensor dropout(Tape& tape, const Tensor& a, double keep_prob, Rng& rng,
               bool training);

Tensor sum_all(Tape& tape, const Tensor& a);
Tensor mean_all(Tape& tape, const Tensor& a);
Tensor sum_rows(Tape& tape, const Tensor& a);   // n x m -> n x 1
Tensor mean_rows(Tape& tape, const Tensor& a);  // n x m -> n x 1

Tensor gather_rows(Tape& tape, const Tensor& a, const std::vector<std::size_t>& idx);
// Row i of the output is cos(a_i, b_i); rows with zero norm yield 0.
Tensor rowwise_cosine(Tape& tape, const Tensor& a, const Tensor& b);
// Rows rescaled to unit L2 norm; zero rows stay zero.
Tensor row_normalize(Tape& tape, const Tensor& a);
// Stable log(sum(exp(row))) per row; n x m -> n x 1.
Tensor logsumexp_rows(Tape& tape, const Tensor& a);
Tensor concat_cols(Tape& tape, const Tensor& a, const Tensor& b);
Tensor transpose(Tape& tape, const Tensor& a);
// A (n x m) + broadcast row vector b (1 x m).
Tensor add_rowvec(Tape& tape, const Tensor& a, const Tensor& b);
// Copy of `base` with each row in `rows` replaced by the 1 x d `row` tensor.
Tensor scatter_row_value(Tape& tape, const Tensor& base, const Tensor& row,
                         const std::vector<std::size_t>& rows);
// Softmax within each contiguous segment [offsets[i], offsets[i+1]) of a
// column vector.
Tensor segment_softmax(Tape& tape, const Tensor& scores,
                       const std::vector<std::size_t>& offsets);
// out[target[e]] += weights[e] * values[source[e]] over all entries e.
// weights is m x 1, values is n x h, output is n_out x h.
Tensor edge_weighted_sum(Tape& tape, const Tensor& weights, const Tensor& values,
                         const std::vector<std::size_t>& target,
                         const std::vector<std::size_t>& source,
                         std::size_t n_out);

// Numerically stable scalar helpers shared with oracle-style test code.
double stable_sigmoid(double x);
double stable_softplus(double x);

}  // namespace lrgae
