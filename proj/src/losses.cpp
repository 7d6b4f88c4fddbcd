#include "losses.hpp"

#include <cmath>

namespace lrgae {

void LossConfig::validate() const {
  if (!(temperature > 0.0)) {
    throw ConfigError("loss.temperature must be > 0");
  }
  if (!(sce_gamma >= 1.0)) {
    throw ConfigError("loss.sce_gamma must be >= 1");
  }
}

void NegSamplerConfig::validate() const {
  if (!(multiplier >= 1.0)) {
    throw ConfigError("neg_sampler.multiplier must be >= 1");
  }
}

Tensor bce_edge_loss(Tape& tape, const Tensor& pos_scores,
                     const Tensor& neg_scores) {
  if (pos_scores.empty()) {
    throw ContractError("bce_edge_loss: empty positive score set");
  }
  if (neg_scores.empty()) {
    throw ContractError("bce_edge_loss: empty negative score set");
  }
  // -log sigmoid(s) = softplus(-s); -log(1 - sigmoid(s)) = softplus(s).
  Tensor pos_term = mean_all(tape, softplus(tape, scale(tape, pos_scores, -1.0)));
  Tensor neg_term = mean_all(tape, softplus(tape, neg_scores));
  return add(tape, pos_term, neg_term);
}

Tensor mse_feature_loss(Tape& tape, const Tensor& pred, const Tensor& target) {
  if (pred.empty()) throw ContractError("mse_feature_loss: empty prediction");
  Tensor diff = sub(tape, pred, target);
  return mean_all(tape, mul(tape, diff, diff));
}

Tensor mse_feature_loss(
    Tape& tape, const Tensor& pred, const Tensor& target,
    const std::vector<std::pair<std::size_t, std::size_t>>& coords) {
  if (coords.empty()) {
    throw ContractError("mse_feature_loss: empty coordinate set");
  }
  Tensor mask(pred.rows(), pred.cols());
  for (const auto& [i, j] : coords) {
    if (i >= pred.rows() || j >= pred.cols()) {
      throw IndexError("mse_feature_loss: coordinate out of range");
    }
    mask.at(i, j) = 1.0;
  }
  Tensor diff = sub(tape, pred, target);
  Tensor masked = mul(tape, mul(tape, diff, diff), mask);
  return scale(tape, sum_all(tape, masked),
               1.0 / static_cast<double>(coords.size()));
}

Tensor sce_loss(Tape& tape, const Tensor& pred, const Tensor& target,
                double gamma) {
  Tensor cos = rowwise_cosine(tape, pred, target);
  Tensor one_minus = sub(tape, Tensor::ones(cos.rows(), 1), cos);
  return mean_all(tape, pow_nonneg(tape, one_minus, gamma));
}

namespace {

// Mean over rows of (logsumexp(row) - diagonal) for a logits matrix.
Tensor nce_direction(Tape& tape, const Tensor& logits) {
  const std::size_t m = logits.rows();
  Tensor eye(m, m);
  for (std::size_t i = 0; i < m; ++i) eye.at(i, i) = 1.0;
  Tensor diag = sum_rows(tape, mul(tape, logits, eye));
  return mean_all(tape, sub(tape, logsumexp_rows(tape, logits), diag));
}

Tensor cosine_logits(Tape& tape, const Tensor& left, const Tensor& right,
                     double tau) {
  Tensor ln = row_normalize(tape, left);
  Tensor rn = row_normalize(tape, right);
  return scale(tape, matmul(tape, ln, transpose(tape, rn)), 1.0 / tau);
}

void check_nce_inputs(const Tensor& left, const Tensor& right, double tau,
                      const char* op) {
  if (left.rows() != right.rows() || left.cols() != right.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         left.shape_str() + " vs " + right.shape_str());
  }
  if (left.rows() < 2) {
    throw ContractError(std::string(op) + ": need at least 2 rows, got " +
                        std::to_string(left.rows()));
  }
  if (!(tau > 0.0)) {
    throw ContractError(std::string(op) + ": temperature must be > 0");
  }
}

}  // namespace

Tensor info_nce(Tape& tape, const Tensor& left, const Tensor& right, double tau) {
  check_nce_inputs(left, right, tau, "info_nce");
  Tensor logits = cosine_logits(tape, left, right, tau);
  Tensor fwd = nce_direction(tape, logits);
  Tensor bwd = nce_direction(tape, transpose(tape, logits));
  return scale(tape, add(tape, fwd, bwd), 0.5);
}

Tensor simcse(Tape& tape, const Tensor& left, const Tensor& right, double tau) {
  check_nce_inputs(left, right, tau, "simcse");
  return nce_direction(tape, cosine_logits(tape, left, right, tau));
}

// ---- negative sampling --------------------------------------------------------

namespace {

Edge draw_uniform_pair(std::size_t n, Rng& rng) {
  while (true) {
    const auto a = static_cast<NodeId>(rng.uniform_index(n));
    const auto b = static_cast<NodeId>(rng.uniform_index(n));
    if (a != b) return ordered_edge(a, b);
  }
}

double row_cosine(const Tensor& z, std::size_t a, std::size_t b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t j = 0; j < z.cols(); ++j) {
    dot += z.at(a, j) * z.at(b, j);
    na += z.at(a, j) * z.at(a, j);
    nb += z.at(b, j) * z.at(b, j);
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

}  // namespace

std::vector<Edge> negative_sample(const Graph& g, std::size_t count,
                                  NegStrategy strategy, Rng& rng,
                                  const Tensor* embeddings) {
  if (count < 1) throw ContractError("negative_sample: count must be >= 1");
  const std::size_t n = g.n();
  if (n < 2) throw ContractError("negative_sample: graph has < 2 nodes");
  std::vector<Edge> out;
  out.reserve(count);

  switch (strategy) {
    case NegStrategy::uniform: {
      for (std::size_t i = 0; i < count; ++i) {
        out.push_back(draw_uniform_pair(n, rng));
      }
      break;
    }
    case NegStrategy::degree: {
      double total = 0.0;
      std::vector<double> cumulative(n);
      for (std::size_t v = 0; v < n; ++v) {
        total += static_cast<double>(g.degree(static_cast<NodeId>(v)));
        cumulative[v] = total;
      }
      if (total == 0.0) {
        // Edgeless graph: degree weighting is undefined, fall back.
        for (std::size_t i = 0; i < count; ++i) {
          out.push_back(draw_uniform_pair(n, rng));
        }
        break;
      }
      auto draw_by_degree = [&]() {
        const double x = rng.uniform() * total;
        const auto it =
            std::lower_bound(cumulative.begin(), cumulative.end(), x);
        return static_cast<NodeId>(it - cumulative.begin());
      };
      while (out.size() < count) {
        const NodeId a = draw_by_degree();
        const NodeId b = draw_by_degree();
        if (a != b) out.push_back(ordered_edge(a, b));
      }
      break;
    }
    case NegStrategy::similarity: {
      if (!embeddings) {
        throw ContractError(
            "negative_sample: similarity strategy requires embeddings");
      }
      if (embeddings->rows() != n) {
        throw DimensionError("negative_sample: embeddings have " +
                             std::to_string(embeddings->rows()) +
                             " rows for n=" + std::to_string(n));
      }
      const std::size_t max_attempts = 10 * count;
      std::size_t attempts = 0;
      while (out.size() < count && attempts < max_attempts) {
        ++attempts;
        const Edge e = draw_uniform_pair(n, rng);
        const double keep = (1.0 - row_cosine(*embeddings, e.u, e.v)) / 2.0;
        if (rng.uniform() < keep) out.push_back(e);
      }
      // Degenerate embeddings (all similar): finish uniformly.
      while (out.size() < count) out.push_back(draw_uniform_pair(n, rng));
      break;
    }
  }
  return out;
}

const char* loss_kind_name(LossKind k) {
  switch (k) {
    case LossKind::bce: return "bce";
    case LossKind::mse: return "mse";
    case LossKind::sce: return "sce";
    case LossKind::infonce: return "infonce";
    case LossKind::simcse: return "simcse";
  }
  return "?";
}

std::optional<LossKind> loss_kind_from_name(const std::string& name) {
  if (name == "bce") return LossKind::bce;
  if (name == "mse") return LossKind::mse;
  if (name == "sce") return LossKind::sce;
  if (name == "infonce") return LossKind::infonce;
  if (name == "simcse") return LossKind::simcse;
  return std::nullopt;
}

const char* neg_strategy_name(NegStrategy s) {
  switch (s) {
    case NegStrategy::uniform: return "uniform";
    case NegStrategy::degree: return "degree";
    case NegStrategy::similarity: return "similarity";
  }
  return "?";
}

std::optional<NegStrategy> neg_strategy_from_name(const std::string& name) {
  if (name == "uniform") return NegStrategy::uniform;
  if (name == "degree") return NegStrategy::degree;
  if (name == "similarity") return NegStrategy::similarity;
  return std::nullopt;
}

}  // namespace lrgae
