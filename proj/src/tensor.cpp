#include "tensor.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>
#include <tuple>

#ifdef LRGAE_WITH_OPENBLAS
#include <cblas.h>
extern "C" void openblas_set_num_threads(int);
#endif

namespace lrgae {

namespace {

std::string shape_of(std::size_t r, std::size_t c) {
  std::ostringstream os;
  os << r << "x" << c;
  return os.str();
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_str() +
                         " vs " + b.shape_str());
  }
}

bool any_grad(const Tensor& a) { return a.requires_grad(); }
bool any_grad(const Tensor& a, const Tensor& b) {
  return a.requires_grad() || b.requires_grad();
}

}  // namespace

// ---- Tensor ---------------------------------------------------------------

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill)
    : node_(std::make_shared<Node>()) {
  node_->rows = rows;
  node_->cols = cols;
  node_->values.assign(rows * cols, fill);
}

Tensor Tensor::from_values(std::size_t rows, std::size_t cols,
                           std::vector<double> values) {
  if (values.size() != rows * cols) {
    throw DimensionError("from_values: " + std::to_string(values.size()) +
                         " values for shape " + shape_of(rows, cols));
  }
  Tensor t(rows, cols);
  t.node_->values = std::move(values);
  return t;
}

Tensor Tensor::from_rows(
    std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> flat;
  flat.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("from_rows: ragged rows");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return from_values(r, c, std::move(flat));
}

Tensor Tensor::uniform(std::size_t rows, std::size_t cols, Rng& rng, double lo,
                       double hi) {
  Tensor t(rows, cols);
  for (auto& v : t.node_->values) v = rng.uniform(lo, hi);
  return t;
}

Tensor Tensor::glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  return uniform(fan_in, fan_out, rng, -limit, limit);
}

double Tensor::item() const {
  if (rows() != 1 || cols() != 1) {
    throw ContractError("item: tensor is " + shape_str() + ", expected 1x1");
  }
  return node_->values[0];
}

Tensor& Tensor::set_requires_grad(bool on) {
  node_->requires_grad = on;
  if (on) {
    node_->grad.assign(node_->values.size(), 0.0);
  } else {
    node_->grad.clear();
  }
  return *this;
}

void Tensor::zero_grad() {
  std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::detached() const {
  Tensor t(rows(), cols());
  t.node_->values = node_->values;
  return t;
}

std::string Tensor::shape_str() const { return shape_of(rows(), cols()); }

// ---- SparseMatrix ----------------------------------------------------------

SparseMatrix::SparseMatrix() : SparseMatrix(0, 0, {0}, {}, {}) {}

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols,
                           std::vector<std::size_t> row_offsets,
                           std::vector<std::size_t> col_indices,
                           std::vector<double> values, bool symmetric)
    : data_(std::make_shared<Data>()) {
  if (row_offsets.size() != rows + 1 || row_offsets.front() != 0 ||
      row_offsets.back() != col_indices.size() ||
      col_indices.size() != values.size()) {
    throw ValidationError("sparse matrix: inconsistent CSR arrays");
  }
  for (std::size_t r = 0; r < rows; ++r) {
    if (row_offsets[r] > row_offsets[r + 1]) {
      throw ValidationError("sparse matrix: row offsets decrease at row " +
                            std::to_string(r));
    }
    for (std::size_t k = row_offsets[r]; k < row_offsets[r + 1]; ++k) {
      if (col_indices[k] >= cols) {
        throw ValidationError("sparse matrix: column index out of range");
      }
      if (k > row_offsets[r] && col_indices[k] <= col_indices[k - 1]) {
        throw ValidationError(
            "sparse matrix: column indices not strictly increasing in row " +
            std::to_string(r));
      }
    }
  }
  data_->rows = rows;
  data_->cols = cols;
  data_->row_offsets = std::move(row_offsets);
  data_->col_indices = std::move(col_indices);
  data_->values = std::move(values);
  data_->symmetric = symmetric;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<std::size_t> offsets(n + 1), cols(n);
  std::vector<double> vals(n, 1.0);
  for (std::size_t i = 0; i <= n; ++i) offsets[i] = i;
  for (std::size_t i = 0; i < n; ++i) cols[i] = i;
  return SparseMatrix(n, n, std::move(offsets), std::move(cols),
                      std::move(vals), /*symmetric=*/true);
}

SparseMatrix SparseMatrix::from_triplets(
    std::size_t rows, std::size_t cols,
    std::vector<std::tuple<std::size_t, std::size_t, double>> triplets,
    bool symmetric) {
  std::sort(triplets.begin(), triplets.end(),
            [](const auto& a, const auto& b) {
              return std::tie(std::get<0>(a), std::get<1>(a)) <
                     std::tie(std::get<0>(b), std::get<1>(b));
            });
  std::vector<std::size_t> entry_row, col_indices;
  std::vector<double> values;
  entry_row.reserve(triplets.size());
  col_indices.reserve(triplets.size());
  values.reserve(triplets.size());
  for (const auto& [r, c, v] : triplets) {
    if (r >= rows || c >= cols) {
      throw ValidationError("from_triplets: coordinate out of range");
    }
    if (!entry_row.empty() && entry_row.back() == r && col_indices.back() == c) {
      values.back() += v;  // duplicate coordinate: accumulate
    } else {
      entry_row.push_back(r);
      col_indices.push_back(c);
      values.push_back(v);
    }
  }
  std::vector<std::size_t> offsets(rows + 1, 0);
  for (std::size_t r : entry_row) ++offsets[r + 1];
  for (std::size_t r = 0; r < rows; ++r) offsets[r + 1] += offsets[r];
  return SparseMatrix(rows, cols, std::move(offsets), std::move(col_indices),
                      std::move(values), symmetric);
}

double SparseMatrix::at(std::size_t r, std::size_t c) const {
  const auto& off = data_->row_offsets;
  const auto& ci = data_->col_indices;
  auto begin = ci.begin() + static_cast<std::ptrdiff_t>(off[r]);
  auto end = ci.begin() + static_cast<std::ptrdiff_t>(off[r + 1]);
  auto it = std::lower_bound(begin, end, c);
  if (it == end || *it != c) return 0.0;
  return data_->values[static_cast<std::size_t>(it - ci.begin())];
}

const SparseMatrix& SparseMatrix::transposed() const {
  if (data_->symmetric) return *this;
  std::call_once(data_->transpose_once, [this] {
    const std::size_t rows = data_->rows, cols = data_->cols;
    std::vector<std::size_t> counts(cols, 0);
    for (std::size_t c : data_->col_indices) ++counts[c];
    std::vector<std::size_t> offsets(cols + 1, 0);
    for (std::size_t c = 0; c < cols; ++c) offsets[c + 1] = offsets[c] + counts[c];
    std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
    std::vector<std::size_t> t_cols(nnz());
    std::vector<double> t_vals(nnz());
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t k = data_->row_offsets[r]; k < data_->row_offsets[r + 1];
           ++k) {
        const std::size_t c = data_->col_indices[k];
        t_cols[cursor[c]] = r;
        t_vals[cursor[c]] = data_->values[k];
        ++cursor[c];
      }
    }
    data_->transpose = std::make_shared<SparseMatrix>(
        SparseMatrix(cols, rows, std::move(offsets), std::move(t_cols),
                     std::move(t_vals)));
  });
  return *data_->transpose;
}

Tensor SparseMatrix::to_dense() const {
  Tensor out(rows(), cols());
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t k = data_->row_offsets[r]; k < data_->row_offsets[r + 1];
         ++k) {
      out.at(r, data_->col_indices[k]) = data_->values[k];
    }
  }
  return out;
}

// ---- Tape ------------------------------------------------------------------

void Tape::backward(Tensor& loss) {
  if (loss.rows() != 1 || loss.cols() != 1) {
    throw ContractError("backward: loss must be scalar, got " +
                        loss.shape_str());
  }
  if (!loss.requires_grad()) {
    throw ContractError("backward: loss does not require grad");
  }
  loss.zero_grad();
  loss.grad_mut()[0] = 1.0;
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
}

// ---- op helpers -----------------------------------------------------------

namespace {

// Allocates the output of an op; requires_grad when any input does.
Tensor make_output(std::size_t rows, std::size_t cols, bool needs_grad) {
  Tensor out(rows, cols);
  if (needs_grad) out.set_requires_grad(true);
  return out;
}

}  // namespace

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double stable_softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

// ---- matmul / spmm ---------------------------------------------------------

namespace {

// Large dense products route through single-threaded BLAS when available;
// small ones use the loops below (deterministic either way for a fixed
// build and machine).
#ifdef LRGAE_WITH_OPENBLAS
constexpr std::size_t kBlasThreshold = 1u << 15;  // n*k*m

bool use_blas(std::size_t n, std::size_t k, std::size_t m) {
  static const bool init = [] {
    openblas_set_num_threads(1);
    return true;
  }();
  (void)init;
  return n * k * m >= kBlasThreshold;
}
#endif

// Row-blocked ikj product: out += A * B with `left` n x k and `right`
// k x m, both row-major. Blocking over rows of A keeps each B row hot for
// kRowBlock uses; the per-element accumulation order stays sequential in k,
// so the result is independent of the block size.
constexpr std::size_t kRowBlock = 8;

void gemm_into(const double* left, std::size_t n, std::size_t k,
               const double* right, std::size_t m, double* out) {
#ifdef LRGAE_WITH_OPENBLAS
  if (use_blas(n, k, m)) {
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans,
                static_cast<int>(n), static_cast<int>(m), static_cast<int>(k),
                1.0, left, static_cast<int>(k), right, static_cast<int>(m),
                1.0, out, static_cast<int>(m));
    return;
  }
#endif
  for (std::size_t i0 = 0; i0 < n; i0 += kRowBlock) {
    const std::size_t i1 = std::min(i0 + kRowBlock, n);
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double* brow = right + kk * m;
      for (std::size_t i = i0; i < i1; ++i) {
        const double aik = left[i * k + kk];
        if (aik == 0.0) continue;
        double* orow = out + i * m;
        for (std::size_t j = 0; j < m; ++j) orow[j] += aik * brow[j];
      }
    }
  }
}

// out += A * B^T with A n x m and B k x m (both row-major): rows of B are
// streamed once per row block of A.
void gemm_bt_into(const double* a, std::size_t n, std::size_t m,
                  const double* b, std::size_t k, double* out) {
#ifdef LRGAE_WITH_OPENBLAS
  if (use_blas(n, m, k)) {
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, static_cast<int>(n),
                static_cast<int>(k), static_cast<int>(m), 1.0, a,
                static_cast<int>(m), b, static_cast<int>(m), 1.0, out,
                static_cast<int>(k));
    return;
  }
#endif
  for (std::size_t i0 = 0; i0 < n; i0 += kRowBlock) {
    const std::size_t i1 = std::min(i0 + kRowBlock, n);
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double* brow = b + kk * m;
      for (std::size_t i = i0; i < i1; ++i) {
        const double* arow = a + i * m;
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j) acc += arow[j] * brow[j];
        out[i * k + kk] += acc;
      }
    }
  }
}

}  // namespace

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: shape mismatch " + a.shape_str() + " vs " +
                         b.shape_str());
  }
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  Tensor out = make_output(n, m, any_grad(a, b));
  gemm_into(a.values().data(), n, k, b.values().data(), m,
            out.values_mut().data());
  if (out.requires_grad()) {
    Tensor ac = a, bc = b, oc = out;
    tape.record([ac, bc, oc]() mutable {
      const std::size_t n = ac.rows(), k = ac.cols(), m = bc.cols();
      const double* g = oc.grad().data();
      if (ac.requires_grad()) {
        // dA = G * B^T
        gemm_bt_into(g, n, m, bc.values().data(), k, ac.grad_mut().data());
      }
      if (bc.requires_grad()) {
        double* gb = bc.grad_mut().data();
        const double* pa = ac.values().data();
        // dB = A^T * G; row blocks of A share the hot rows of dB.
        bool done = false;
#ifdef LRGAE_WITH_OPENBLAS
        if (use_blas(k, n, m)) {
          cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans,
                      static_cast<int>(k), static_cast<int>(m),
                      static_cast<int>(n), 1.0, pa, static_cast<int>(k), g,
                      static_cast<int>(m), 1.0, gb, static_cast<int>(m));
          done = true;
        }
#endif
        for (std::size_t i0 = 0; !done && i0 < n; i0 += kRowBlock) {
          const std::size_t i1 = std::min(i0 + kRowBlock, n);
          for (std::size_t kk = 0; kk < k; ++kk) {
            double* gbrow = gb + kk * m;
            for (std::size_t i = i0; i < i1; ++i) {
              const double aik = pa[i * k + kk];
              if (aik == 0.0) continue;
              const double* grow = g + i * m;
              for (std::size_t j = 0; j < m; ++j) gbrow[j] += aik * grow[j];
            }
          }
        }
      }
    });
  }
  return out;
}

namespace {

void spmm_into(const SparseMatrix& s, const double* x, std::size_t xcols,
               double* out) {
  const auto off = s.row_offsets();
  const auto ci = s.col_indices();
  const auto sv = s.values();
  for (std::size_t r = 0; r < s.rows(); ++r) {
    double* orow = out + r * xcols;
    for (std::size_t k = off[r]; k < off[r + 1]; ++k) {
      const double w = sv[k];
      const double* xrow = x + ci[k] * xcols;
      for (std::size_t j = 0; j < xcols; ++j) orow[j] += w * xrow[j];
    }
  }
}

}  // namespace

Tensor spmm(Tape& tape, const SparseMatrix& s, const Tensor& x) {
  if (s.cols() != x.rows()) {
    throw DimensionError("spmm: shape mismatch " + std::to_string(s.rows()) +
                         "x" + std::to_string(s.cols()) + " vs " +
                         x.shape_str());
  }
  Tensor out = make_output(s.rows(), x.cols(), any_grad(x));
  spmm_into(s, x.values().data(), x.cols(), out.values_mut().data());
  if (out.requires_grad()) {
    Tensor xc = x, oc = out;
    SparseMatrix sc = s;
    tape.record([sc, xc, oc]() mutable {
      // dX = S^T * G
      const SparseMatrix& st = sc.transposed();
      spmm_into(st, oc.grad().data(), xc.cols(), xc.grad_mut().data());
    });
  }
  return out;
}

// ---- elementwise -----------------------------------------------------------

namespace {

template <typename Fwd, typename Bwd>
Tensor binary_op(Tape& tape, const Tensor& a, const Tensor& b, const char* name,
                 Fwd fwd, Bwd bwd) {
  require_same_shape(a, b, name);
  Tensor out = make_output(a.rows(), a.cols(), any_grad(a, b));
  const auto va = a.values();
  const auto vb = b.values();
  auto vo = out.values_mut();
  for (std::size_t i = 0; i < vo.size(); ++i) vo[i] = fwd(va[i], vb[i]);
  if (out.requires_grad()) {
    Tensor ac = a, bc = b, oc = out;
    tape.record([ac, bc, oc, bwd]() mutable {
      const auto g = oc.grad();
      const auto va = ac.values();
      const auto vb = bc.values();
      for (std::size_t i = 0; i < g.size(); ++i) {
        auto [da, db] = bwd(va[i], vb[i]);
        if (ac.requires_grad()) ac.grad_mut()[i] += g[i] * da;
        if (bc.requires_grad()) bc.grad_mut()[i] += g[i] * db;
      }
    });
  }
  return out;
}

// Unary op whose derivative is a function of (input, output).
template <typename Fwd, typename Bwd>
Tensor unary_op(Tape& tape, const Tensor& a, Fwd fwd, Bwd bwd) {
  Tensor out = make_output(a.rows(), a.cols(), any_grad(a));
  const auto va = a.values();
  auto vo = out.values_mut();
  for (std::size_t i = 0; i < vo.size(); ++i) vo[i] = fwd(va[i]);
  if (out.requires_grad()) {
    Tensor ac = a, oc = out;
    tape.record([ac, oc, bwd]() mutable {
      const auto g = oc.grad();
      const auto va = ac.values();
      const auto vo = oc.values();
      auto ga = ac.grad_mut();
      for (std::size_t i = 0; i < g.size(); ++i) {
        ga[i] += g[i] * bwd(va[i], vo[i]);
      }
    });
  }
  return out;
}

}  // namespace

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  return binary_op(
      tape, a, b, "add", [](double x, double y) { return x + y; },
      [](double, double) { return std::pair{1.0, 1.0}; });
}

Tensor sub(Tape& tape, const Tensor& a, const Tensor& b) {
  return binary_op(
      tape, a, b, "sub", [](double x, double y) { return x - y; },
      [](double, double) { return std::pair{1.0, -1.0}; });
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  return binary_op(
      tape, a, b, "mul", [](double x, double y) { return x * y; },
      [](double x, double y) { return std::pair{y, x}; });
}

Tensor relu(Tape& tape, const Tensor& a) {
  return unary_op(
      tape, a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(Tape& tape, const Tensor& a, double slope) {
  return unary_op(
      tape, a, [slope](double x) { return x > 0.0 ? x : slope * x; },
      [slope](double x, double) { return x > 0.0 ? 1.0 : slope; });
}

Tensor sigmoid(Tape& tape, const Tensor& a) {
  return unary_op(
      tape, a, [](double x) { return stable_sigmoid(x); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor exp(Tape& tape, const Tensor& a) {
  return unary_op(
      tape, a, [](double x) { return std::exp(x); },
      [](double, double y) { return y; });
}

Tensor log(Tape& tape, const Tensor& a) {
  for (double v : a.values()) {
    if (!(v > 0.0)) {
      throw DomainError("log: nonpositive entry " + std::to_string(v));
    }
  }
  return unary_op(
      tape, a, [](double x) { return std::log(x); },
      [](double x, double) { return 1.0 / x; });
}

Tensor scale(Tape& tape, const Tensor& a, double c) {
  return unary_op(
      tape, a, [c](double x) { return c * x; },
      [c](double, double) { return c; });
}

Tensor softplus(Tape& tape, const Tensor& a) {
  return unary_op(
      tape, a, [](double x) { return stable_softplus(x); },
      [](double x, double) { return stable_sigmoid(x); });
}

Tensor pow_nonneg(Tape& tape, const Tensor& a, double p) {
  if (p < 1.0) throw ContractError("pow_nonneg: exponent must be >= 1");
  return unary_op(
      tape, a,
      [p](double x) { return x <= 0.0 ? 0.0 : std::pow(x, p); },
      [p](double x, double) {
        if (x <= 0.0) return p == 1.0 ? 1.0 : 0.0;
        return p * std::pow(x, p - 1.0);
      });
}

Tensor dropout(Tape& tape, const Tensor& a, double keep_prob, Rng& rng,
               bool training) {
  if (!(keep_prob > 0.0 && keep_prob <= 1.0)) {
    throw ContractError("dropout: keep_prob must be in (0, 1]");
  }
  if (!training || keep_prob == 1.0) return a;
  Tensor out = make_output(a.rows(), a.cols(), any_grad(a));
  auto mask = std::make_shared<std::vector<double>>(a.size());
  const auto va = a.values();
  auto vo = out.values_mut();
  const double inv = 1.0 / keep_prob;
  for (std::size_t i = 0; i < vo.size(); ++i) {
    (*mask)[i] = rng.bernoulli(keep_prob) ? inv : 0.0;
    vo[i] = va[i] * (*mask)[i];
  }
  if (out.requires_grad()) {
    Tensor ac = a, oc = out;
    tape.record([ac, oc, mask]() mutable {
      const auto g = oc.grad();
      auto ga = ac.grad_mut();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (*mask)[i];
    });
  }
  return out;
}

// ---- reductions ------------------------------------------------------------

namespace {

void require_nonempty(const Tensor& a, const char* op) {
  if (a.empty()) throw DomainError(std::string(op) + ": empty tensor");
}

}  // namespace

Tensor sum_all(Tape& tape, const Tensor& a) {
  require_nonempty(a, "sum");
  Tensor out = make_output(1, 1, any_grad(a));
  double acc = 0.0;
  for (double v : a.values()) acc += v;
  out.values_mut()[0] = acc;
  if (out.requires_grad()) {
    Tensor ac = a, oc = out;
    tape.record([ac, oc]() mutable {
      const double g = oc.grad()[0];
      for (auto& gv : ac.grad_mut()) gv += g;
    });
  }
  return out;
}

Tensor mean_all(Tape& tape, const Tensor& a) {
  require_nonempty(a, "mean");
  Tensor s = sum_all(tape, a);
  return scale(tape, s, 1.0 / static_cast<double>(a.size()));
}

Tensor sum_rows(Tape& tape, const Tensor& a) {
  require_nonempty(a, "sum");
  Tensor out = make_output(a.rows(), 1, any_grad(a));
  const auto va = a.values();
  auto vo = out.values_mut();
  const std::size_t m = a.cols();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) acc += va[r * m + j];
    vo[r] = acc;
  }
  if (out.requires_grad()) {
    Tensor ac = a, oc = out;
    tape.record([ac, oc]() mutable {
      const auto g = oc.grad();
      auto ga = ac.grad_mut();
      const std::size_t m = ac.cols();
      for (std::size_t r = 0; r < ac.rows(); ++r) {
        for (std::size_t j = 0; j < m; ++j) ga[r * m + j] += g[r];
      }
    });
  }
  return out;
}

Tensor mean_rows(Tape& tape, const Tensor& a) {
  Tensor s = sum_rows(tape, a);
  return scale(tape, s, 1.0 / static_cast<double>(a.cols()));
}

// ---- indexing / structure ---------------------------------------------------

Tensor gather_rows(Tape& tape, const Tensor& a,
                   const std::vector<std::size_t>& idx) {
  for (std::size_t i : idx) {
    if (i >= a.rows()) {
      throw IndexError("gather_rows: index " + std::to_string(i) +
                       " out of range for " + a.shape_str());
    }
  }
  const std::size_t m = a.cols();
  Tensor out = make_output(idx.size(), m, any_grad(a));
  const auto va = a.values();
  auto vo = out.values_mut();
  for (std::size_t i = 0; i < idx.size(); ++i) {
    std::copy_n(va.begin() + static_cast<std::ptrdiff_t>(idx[i] * m), m,
                vo.begin() + static_cast<std::ptrdiff_t>(i * m));
  }
  if (out.requires_grad()) {
    Tensor ac = a, oc = out;
    auto ix = std::make_shared<std::vector<std::size_t>>(idx);
    tape.record([ac, oc, ix]() mutable {
      const auto g = oc.grad();
      auto ga = ac.grad_mut();
      const std::size_t m = ac.cols();
      for (std::size_t i = 0; i < ix->size(); ++i) {
        const std::size_t r = (*ix)[i];
        for (std::size_t j = 0; j < m; ++j) ga[r * m + j] += g[i * m + j];
      }
    });
  }
  return out;
}

Tensor rowwise_cosine(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "rowwise_cosine");
  const std::size_t n = a.rows(), m = a.cols();
  Tensor out = make_output(n, 1, any_grad(a, b));
  const auto va = a.values();
  const auto vb = b.values();
  auto vo = out.values_mut();
  for (std::size_t r = 0; r < n; ++r) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double x = va[r * m + j], y = vb[r * m + j];
      dot += x * y;
      na += x * x;
      nb += y * y;
    }
    vo[r] = (na == 0.0 || nb == 0.0) ? 0.0 : dot / std::sqrt(na * nb);
  }
  if (out.requires_grad()) {
    Tensor ac = a, bc = b, oc = out;
    tape.record([ac, bc, oc]() mutable {
      const std::size_t n = ac.rows(), m = ac.cols();
      const auto g = oc.grad();
      const auto va = ac.values();
      const auto vb = bc.values();
      const auto vo = oc.values();
      for (std::size_t r = 0; r < n; ++r) {
        double na2 = 0.0, nb2 = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
          na2 += va[r * m + j] * va[r * m + j];
          nb2 += vb[r * m + j] * vb[r * m + j];
        }
        if (na2 == 0.0 || nb2 == 0.0) continue;  // cosine pinned to 0
        const double na = std::sqrt(na2), nb = std::sqrt(nb2);
        const double cosv = vo[r];
        for (std::size_t j = 0; j < m; ++j) {
          const double x = va[r * m + j], y = vb[r * m + j];
          if (ac.requires_grad()) {
            ac.grad_mut()[r * m + j] += g[r] * (y / (na * nb) - cosv * x / na2);
          }
          if (bc.requires_grad()) {
            bc.grad_mut()[r * m + j] += g[r] * (x / (na * nb) - cosv * y / nb2);
          }
        }
      }
    });
  }
  return out;
}

Tensor row_normalize(Tape& tape, const Tensor& a) {
  const std::size_t n = a.rows(), m = a.cols();
  Tensor out = make_output(n, m, any_grad(a));
  const auto va = a.values();
  auto vo = out.values_mut();
  auto norms = std::make_shared<std::vector<double>>(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += va[r * m + j] * va[r * m + j];
    const double norm = std::sqrt(s);
    (*norms)[r] = norm;
    if (norm > 0.0) {
      for (std::size_t j = 0; j < m; ++j) vo[r * m + j] = va[r * m + j] / norm;
    }
  }
  if (out.requires_grad()) {
    Tensor ac = a, oc = out;
    tape.record([ac, oc, norms]() mutable {
      const std::size_t n = ac.rows(), m = ac.cols();
      const auto g = oc.grad();
      const auto vo = oc.values();
      auto ga = ac.grad_mut();
      for (std::size_t r = 0; r < n; ++r) {
        const double norm = (*norms)[r];
        if (norm == 0.0) continue;
        double ydotg = 0.0;
        for (std::size_t j = 0; j < m; ++j) ydotg += vo[r * m + j] * g[r * m + j];
        for (std::size_t j = 0; j < m; ++j) {
          ga[r * m + j] += (g[r * m + j] - vo[r * m + j] * ydotg) / norm;
        }
      }
    });
  }
  return out;
}

Tensor logsumexp_rows(Tape& tape, const Tensor& a) {
  require_nonempty(a, "logsumexp");
  const std::size_t n = a.rows(), m = a.cols();
  Tensor out = make_output(n, 1, any_grad(a));
  const auto va = a.values();
  auto vo = out.values_mut();
  for (std::size_t r = 0; r < n; ++r) {
    double mx = va[r * m];
    for (std::size_t j = 1; j < m; ++j) mx = std::max(mx, va[r * m + j]);
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += std::exp(va[r * m + j] - mx);
    vo[r] = mx + std::log(s);
  }
  if (out.requires_grad()) {
    Tensor ac = a, oc = out;
    tape.record([ac, oc]() mutable {
      const std::size_t n = ac.rows(), m = ac.cols();
      const auto g = oc.grad();
      const auto va = ac.values();
      const auto vo = oc.values();
      auto ga = ac.grad_mut();
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t j = 0; j < m; ++j) {
          ga[r * m + j] += g[r] * std::exp(va[r * m + j] - vo[r]);
        }
      }
    });
  }
  return out;
}

Tensor concat_cols(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("concat_cols: row mismatch " + a.shape_str() + " vs " +
                         b.shape_str());
  }
  const std::size_t n = a.rows(), ma = a.cols(), mb = b.cols();
  Tensor out = make_output(n, ma + mb, any_grad(a, b));
  const auto va = a.values();
  const auto vb = b.values();
  auto vo = out.values_mut();
  for (std::size_t r = 0; r < n; ++r) {
    std::copy_n(va.begin() + static_cast<std::ptrdiff_t>(r * ma), ma,
                vo.begin() + static_cast<std::ptrdiff_t>(r * (ma + mb)));
    std::copy_n(vb.begin() + static_cast<std::ptrdiff_t>(r * mb), mb,
                vo.begin() + static_cast<std::ptrdiff_t>(r * (ma + mb) + ma));
  }
  if (out.requires_grad()) {
    Tensor ac = a, bc = b, oc = out;
    tape.record([ac, bc, oc]() mutable {
      const std::size_t n = ac.rows(), ma = ac.cols(), mb = bc.cols();
      const auto g = oc.grad();
      for (std::size_t r = 0; r < n; ++r) {
        if (ac.requires_grad()) {
          auto ga = ac.grad_mut();
          for (std::size_t j = 0; j < ma; ++j) {
            ga[r * ma + j] += g[r * (ma + mb) + j];
          }
        }
        if (bc.requires_grad()) {
          auto gb = bc.grad_mut();
          for (std::size_t j = 0; j < mb; ++j) {
            gb[r * mb + j] += g[r * (ma + mb) + ma + j];
          }
        }
      }
    });
  }
  return out;
}

Tensor transpose(Tape& tape, const Tensor& a) {
  const std::size_t n = a.rows(), m = a.cols();
  Tensor out = make_output(m, n, any_grad(a));
  const auto va = a.values();
  auto vo = out.values_mut();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < m; ++j) vo[j * n + r] = va[r * m + j];
  }
  if (out.requires_grad()) {
    Tensor ac = a, oc = out;
    tape.record([ac, oc]() mutable {
      const std::size_t n = ac.rows(), m = ac.cols();
      const auto g = oc.grad();
      auto ga = ac.grad_mut();
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t j = 0; j < m; ++j) ga[r * m + j] += g[j * n + r];
      }
    });
  }
  return out;
}

Tensor add_rowvec(Tape& tape, const Tensor& a, const Tensor& b) {
  if (b.rows() != 1 || b.cols() != a.cols()) {
    throw DimensionError("add_rowvec: " + a.shape_str() + " vs " +
                         b.shape_str());
  }
  const std::size_t n = a.rows(), m = a.cols();
  Tensor out = make_output(n, m, any_grad(a, b));
  const auto va = a.values();
  const auto vb = b.values();
  auto vo = out.values_mut();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < m; ++j) vo[r * m + j] = va[r * m + j] + vb[j];
  }
  if (out.requires_grad()) {
    Tensor ac = a, bc = b, oc = out;
    tape.record([ac, bc, oc]() mutable {
      const std::size_t n = ac.rows(), m = ac.cols();
      const auto g = oc.grad();
      if (ac.requires_grad()) {
        auto ga = ac.grad_mut();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (bc.requires_grad()) {
        auto gb = bc.grad_mut();
        for (std::size_t r = 0; r < n; ++r) {
          for (std::size_t j = 0; j < m; ++j) gb[j] += g[r * m + j];
        }
      }
    });
  }
  return out;
}

Tensor scatter_row_value(Tape& tape, const Tensor& base, const Tensor& row,
                         const std::vector<std::size_t>& rows) {
  if (row.rows() != 1 || row.cols() != base.cols()) {
    throw DimensionError("scatter_row_value: " + base.shape_str() + " vs " +
                         row.shape_str());
  }
  for (std::size_t r : rows) {
    if (r >= base.rows()) {
      throw IndexError("scatter_row_value: row " + std::to_string(r) +
                       " out of range");
    }
  }
  const std::size_t m = base.cols();
  Tensor out = make_output(base.rows(), m, any_grad(base, row));
  auto vo = out.values_mut();
  std::copy(base.values().begin(), base.values().end(), vo.begin());
  const auto vr = row.values();
  for (std::size_t r : rows) {
    std::copy_n(vr.begin(), m, vo.begin() + static_cast<std::ptrdiff_t>(r * m));
  }
  if (out.requires_grad()) {
    Tensor basec = base, rowc = row, oc = out;
    auto masked = std::make_shared<std::vector<bool>>(base.rows(), false);
    for (std::size_t r : rows) (*masked)[r] = true;
    tape.record([basec, rowc, oc, masked]() mutable {
      const std::size_t m = basec.cols();
      const auto g = oc.grad();
      for (std::size_t r = 0; r < basec.rows(); ++r) {
        if ((*masked)[r]) {
          if (rowc.requires_grad()) {
            auto gr = rowc.grad_mut();
            for (std::size_t j = 0; j < m; ++j) gr[j] += g[r * m + j];
          }
        } else if (basec.requires_grad()) {
          auto gb = basec.grad_mut();
          for (std::size_t j = 0; j < m; ++j) gb[r * m + j] += g[r * m + j];
        }
      }
    });
  }
  return out;
}

Tensor segment_softmax(Tape& tape, const Tensor& scores,
                       const std::vector<std::size_t>& offsets) {
  if (scores.cols() != 1) {
    throw DimensionError("segment_softmax: expected column vector, got " +
                         scores.shape_str());
  }
  if (offsets.empty() || offsets.front() != 0 ||
      offsets.back() != scores.rows()) {
    throw ContractError("segment_softmax: offsets must span all rows");
  }
  Tensor out = make_output(scores.rows(), 1, any_grad(scores));
  const auto vs = scores.values();
  auto vo = out.values_mut();
  for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
    const std::size_t lo = offsets[s], hi = offsets[s + 1];
    if (lo == hi) continue;
    double mx = vs[lo];
    for (std::size_t i = lo + 1; i < hi; ++i) mx = std::max(mx, vs[i]);
    double total = 0.0;
    for (std::size_t i = lo; i < hi; ++i) total += std::exp(vs[i] - mx);
    for (std::size_t i = lo; i < hi; ++i) vo[i] = std::exp(vs[i] - mx) / total;
  }
  if (out.requires_grad()) {
    Tensor sc = scores, oc = out;
    auto off = std::make_shared<std::vector<std::size_t>>(offsets);
    tape.record([sc, oc, off]() mutable {
      const auto g = oc.grad();
      const auto vo = oc.values();
      auto gs = sc.grad_mut();
      for (std::size_t s = 0; s + 1 < off->size(); ++s) {
        const std::size_t lo = (*off)[s], hi = (*off)[s + 1];
        double dot = 0.0;
        for (std::size_t i = lo; i < hi; ++i) dot += vo[i] * g[i];
        for (std::size_t i = lo; i < hi; ++i) gs[i] += vo[i] * (g[i] - dot);
      }
    });
  }
  return out;
}

Tensor edge_weighted_sum(Tape& tape, const Tensor& weights, const Tensor& values,
                         const std::vector<std::size_t>& target,
                         const std::vector<std::size_t>& source,
                         std::size_t n_out) {
  if (weights.cols() != 1 || weights.rows() != target.size() ||
      target.size() != source.size()) {
    throw DimensionError("edge_weighted_sum: weights " + weights.shape_str() +
                         " vs " + std::to_string(target.size()) + " edges");
  }
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (target[i] >= n_out || source[i] >= values.rows()) {
      throw IndexError("edge_weighted_sum: endpoint out of range");
    }
  }
  const std::size_t h = values.cols();
  Tensor out = make_output(n_out, h, any_grad(weights, values));
  const auto vw = weights.values();
  const auto vv = values.values();
  auto vo = out.values_mut();
  for (std::size_t e = 0; e < target.size(); ++e) {
    const double w = vw[e];
    const double* src = vv.data() + source[e] * h;
    double* dst = vo.data() + target[e] * h;
    for (std::size_t j = 0; j < h; ++j) dst[j] += w * src[j];
  }
  if (out.requires_grad()) {
    Tensor wc = weights, vc = values, oc = out;
    auto tgt = std::make_shared<std::vector<std::size_t>>(target);
    auto src = std::make_shared<std::vector<std::size_t>>(source);
    tape.record([wc, vc, oc, tgt, src]() mutable {
      const std::size_t h = vc.cols();
      const auto g = oc.grad();
      const auto vw = wc.values();
      const auto vv = vc.values();
      for (std::size_t e = 0; e < tgt->size(); ++e) {
        const double* grow = g.data() + (*tgt)[e] * h;
        const double* vrow = vv.data() + (*src)[e] * h;
        if (wc.requires_grad()) {
          double acc = 0.0;
          for (std::size_t j = 0; j < h; ++j) acc += grow[j] * vrow[j];
          wc.grad_mut()[e] += acc;
        }
        if (vc.requires_grad()) {
          auto gv = vc.grad_mut();
          for (std::size_t j = 0; j < h; ++j) {
            gv[(*src)[e] * h + j] += vw[e] * grow[j];
          }
        }
      }
    });
  }
  return out;
}

}  // namespace lrgae
