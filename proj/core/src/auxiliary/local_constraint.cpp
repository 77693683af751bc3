#include "lcr/auxiliary/local_constraint.hpp"

#include <cstring>
#include <string_view>
#include <unordered_map>

#include "lcr/errors.hpp"

namespace lcr::auxiliary {

void LcrConfig::validate() const {
  replay::validate_window_size(k);
  if (batch_size < k + 1) throw ConfigError("lcr batch_size must be at least K + 1");
  if (gradient_steps < 1) throw ConfigError("lcr gradient_steps must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("lcr learning_rate must be positive");
}

namespace {

// Maps observations to rows of a growing state table, merging identical observations.
class StateTable {
 public:
  std::size_t row_of(const Tensor& state) {
    const auto bytes = std::string_view(reinterpret_cast<const char*>(state.raw()), state.size() * sizeof(double));
    auto& bucket = rows_[std::hash<std::string_view>{}(bytes)];
    for (std::size_t row : bucket) {
      if (items_[row]->data().size() == state.size() &&
          std::memcmp(items_[row]->raw(), state.raw(), bytes.size()) == 0) {
        return row;
      }
    }
    items_.push_back(&state);
    bucket.push_back(items_.size() - 1);
    return items_.size() - 1;
  }

  Tensor stacked() const { return numerics::stack(items_); }
  bool empty() const noexcept { return items_.empty(); }

 private:
  std::vector<const Tensor*> items_;
  std::unordered_map<std::size_t, std::vector<std::size_t>> rows_;
};

}  // namespace

WindowBatch build_windows(const replay::ReplayBuffer& buffer, std::size_t batch_size, std::size_t k) {
  replay::validate_window_size(k);
  WindowBatch out;
  out.k = k;
  const std::size_t count = std::min(batch_size, buffer.size());
  if (count < k + 1) return out;
  const std::size_t first = buffer.size() - count;

  StateTable table;
  for (std::size_t center = first; center < buffer.size(); ++center) {
    auto positions = buffer.neighbor_positions(center, k, first);
    if (!positions) continue;
    out.center_positions.push_back(center);
    out.centers.push_back(table.row_of(buffer.at(center).state));
    for (std::size_t p : *positions) out.neighbors.push_back(table.row_of(buffer.at(p).state));
  }
  if (!table.empty()) out.states = table.stacked();
  return out;
}

Parameter init_w(std::size_t k, Rng& rng) {
  Tensor w({1, k});
  for (double& v : w.data()) v = uniform01(rng);
  return Parameter("lcr.w", std::move(w));
}

Var reconstruction_loss(Var phi, Var w, const WindowBatch& windows) {
  const Tensor& pv = phi.value();
  const Tensor& wv = w.value();
  if (windows.empty()) throw UsageError("reconstruction_loss needs at least one window");
  if (pv.rank() != 2) throw DimensionError("reconstruction_loss: representations must be [N, D]");
  if (wv.shape() != numerics::Shape{1, windows.k}) {
    throw DimensionError("reconstruction_loss: W must be [1, " + std::to_string(windows.k) + "], got " +
                         numerics::to_string(wv.shape()));
  }
  const std::size_t n_windows = windows.size(), k = windows.k, dim = pv.dim(1);
  Tensor residual({n_windows, dim});
  double total = 0.0;
  for (std::size_t t = 0; t < n_windows; ++t) {
    double* r = residual.raw() + t * dim;
    for (std::size_t j = 0; j < k; ++j) {
      const double a = wv[j];
      const double* row = pv.raw() + windows.neighbor(t, j) * dim;
      for (std::size_t d = 0; d < dim; ++d) r[d] += a * row[d];
    }
    const double* target = pv.raw() + windows.centers[t] * dim;
    for (std::size_t d = 0; d < dim; ++d) {
      r[d] -= target[d];
      total += r[d] * r[d];
    }
  }
  const double loss = total / static_cast<double>(n_windows);

  return phi.graph()->record(
      Tensor::scalar(loss), {phi, w},
      [&windows, residual = std::move(residual)](const numerics::BackwardContext& ctx) {
        const Tensor& pv = *ctx.inputs[0];
        const Tensor& wv = *ctx.inputs[1];
        Tensor* dphi = ctx.input_grads[0];
        Tensor* dw = ctx.input_grads[1];
        const std::size_t n_windows = windows.size(), k = windows.k, dim = pv.dim(1);
        const double g = ctx.output_grad[0] * 2.0 / static_cast<double>(n_windows);
        for (std::size_t t = 0; t < n_windows; ++t) {
          const double* r = residual.raw() + t * dim;
          for (std::size_t j = 0; j < k; ++j) {
            const std::size_t row = windows.neighbor(t, j);
            if (dw) {
              const double* p = pv.raw() + row * dim;
              double s = 0.0;
              for (std::size_t d = 0; d < dim; ++d) s += r[d] * p[d];
              (*dw)[j] += g * s;
            }
            if (dphi) {
              const double a = g * wv[j];
              double* dp = dphi->raw() + row * dim;
              for (std::size_t d = 0; d < dim; ++d) dp[d] += a * r[d];
            }
          }
          if (dphi) {
            double* dc = dphi->raw() + windows.centers[t] * dim;
            for (std::size_t d = 0; d < dim; ++d) dc[d] -= g * r[d];
          }
        }
      });
}

Var lcr_loss(agent::QNetwork& network, Graph& graph, Var w, const WindowBatch& windows) {
  Var phi = network.encode(graph, graph.constant(windows.states));
  return reconstruction_loss(phi, w, windows);
}

bool should_trigger(std::uint64_t total_env_steps, std::size_t batch_size) {
  return batch_size > 0 && total_env_steps > 0 && total_env_steps % batch_size == 0;
}

LocalConstraint::LocalConstraint(LcrConfig config) : config_(config) { config_.validate(); }

std::optional<LcrUpdateResult> LocalConstraint::update(agent::QNetwork& network, const replay::ReplayBuffer& buffer,
                                                       Rng& rng) {
  ++invocations_;
  if (!config_.reuse_w || !has_w_) {
    w_ = init_w(config_.k, rng);
    has_w_ = true;
  }
  const WindowBatch windows = build_windows(buffer, config_.batch_size, config_.k);
  if (windows.empty()) {
    ++skipped_;
    return std::nullopt;
  }

  numerics::ParameterList trainable{&w_};
  if (config_.train_encoder) {
    for (auto* p : network.encoder_parameters()) trainable.push_back(p);
  }
  numerics::Optimizer optimizer(trainable, {numerics::OptimizerKind::adam, config_.learning_rate});
  numerics::zero_grad(network.parameters());

  LcrUpdateResult result;
  result.windows = windows.size();
  for (int step = 0; step < config_.gradient_steps; ++step) {
    optimizer.zero_grad();
    double loss_value = 0.0;
    {
      Graph graph;
      Var loss = lcr_loss(network, graph, graph.parameter(w_), windows);
      graph.backward(loss);
      loss_value = loss.value()[0];
    }
    optimizer.step();
    for (double& v : w_.value.data()) {
      if (v < 0.0) v = 0.0;
    }
    if (step == 0) result.first_loss = loss_value;
    result.last_loss = loss_value;
    if (observer_) observer_(LcrStepEvent{step, loss_value, w_, network});
  }
  return result;
}

}  // namespace lcr::auxiliary
