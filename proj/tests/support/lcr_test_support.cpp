#include "lcr_test_support.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <variant>

#include "lcr/agent/dqn_agent.hpp"
#include "lcr/numerics/ops.hpp"

namespace lcr::testing {

Tensor random_tensor(const Shape& shape, Rng& rng, double lo, double hi) {
  Tensor t(shape);
  for (double& v : t.data()) v = lo + (hi - lo) * uniform01(rng);
  return t;
}

Tensor away_from_zero(const Shape& shape, Rng& rng, double margin) {
  Tensor t(shape);
  for (double& v : t.data()) {
    const double magnitude = margin + (1.0 - margin) * uniform01(rng);
    v = uniform01(rng) < 0.5 ? -magnitude : magnitude;
  }
  return t;
}

Tensor naive_dense(const Tensor& x, const Tensor& w, const Tensor& b) {
  const std::size_t batch = x.dim(0), in = x.dim(1), out = w.dim(1);
  Tensor y({batch, out});
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t o = 0; o < out; ++o) {
      double s = b[o];
      for (std::size_t i = 0; i < in; ++i) s += x[n * in + i] * w[i * out + o];
      y[n * out + o] = s;
    }
  }
  return y;
}

Tensor naive_conv2d(const Tensor& x, const Tensor& k, const Tensor& b) {
  const std::size_t batch = x.dim(0), channels = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t filters = k.dim(0), size = k.dim(2);
  const std::size_t oh = h - size + 1, ow = w - size + 1;
  Tensor y({batch, filters, oh, ow});
  for (std::size_t n = 0; n < batch; ++n)
    for (std::size_t f = 0; f < filters; ++f)
      for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t j = 0; j < ow; ++j) {
          double s = b[f];
          for (std::size_t c = 0; c < channels; ++c)
            for (std::size_t ki = 0; ki < size; ++ki)
              for (std::size_t kj = 0; kj < size; ++kj)
                s += k[((f * channels + c) * size + ki) * size + kj] *
                     x[((n * channels + c) * h + i + ki) * w + j + kj];
          y[((n * filters + f) * oh + i) * ow + j] = s;
        }
  return y;
}

Tensor naive_maxpool(const Tensor& x) {
  const std::size_t planes = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3);
  Tensor y({x.dim(0), x.dim(1), h / 2, w / 2});
  for (std::size_t p = 0; p < planes; ++p)
    for (std::size_t i = 0; i < h / 2; ++i)
      for (std::size_t j = 0; j < w / 2; ++j) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t di = 0; di < 2; ++di)
          for (std::size_t dj = 0; dj < 2; ++dj) m = std::max(m, x[(p * h + 2 * i + di) * w + 2 * j + dj]);
        y[(p * (h / 2) + i) * (w / 2) + j] = m;
      }
  return y;
}

GradCheck check_gradients(const std::function<Var(Graph&)>& loss, const ParameterList& params, double eps) {
  numerics::zero_grad(params);
  {
    Graph graph;
    graph.backward(loss(graph));
  }
  auto evaluate = [&] {
    Graph graph(Graph::Mode::inference);
    return loss(graph).value()[0];
  };
  GradCheck result;
  for (Parameter* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + eps;
      const double up = evaluate();
      p->value[i] = saved - eps;
      const double down = evaluate();
      p->value[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = p->grad[i];
      const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-3});
      result.max_relative_error = std::max(result.max_relative_error, std::abs(analytic - numeric) / scale);
      ++result.coordinates;
    }
  }
  return result;
}

namespace {

double relu_margin(const Tensor& x) {
  double m = std::numeric_limits<double>::infinity();
  for (double v : x.data()) m = std::min(m, std::abs(v));
  return m;
}

// After a ReLU, windows whose largest entry is exactly zero hold only inactive units;
// their tie cannot flip under a small perturbation, so they are skipped.
double pool_margin(const Tensor& x, bool after_relu) {
  const std::size_t planes = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3);
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < planes; ++p)
    for (std::size_t i = 0; i + 1 < h; i += 2)
      for (std::size_t j = 0; j + 1 < w; j += 2) {
        double v[4] = {x[(p * h + i) * w + j], x[(p * h + i) * w + j + 1], x[(p * h + i + 1) * w + j],
                       x[(p * h + i + 1) * w + j + 1]};
        std::sort(v, v + 4);
        if (after_relu && v[3] == 0.0) continue;
        m = std::min(m, v[3] - v[2]);
      }
  return m;
}

}  // namespace

double kink_margin(numerics::Sequential& net, const Tensor& batch) {
  Graph graph(Graph::Mode::inference);
  Var x = graph.constant(batch);
  double margin = std::numeric_limits<double>::infinity();
  bool after_relu = false;
  for (auto& layer : net.layers()) {
    if (std::holds_alternative<numerics::Relu>(layer)) margin = std::min(margin, relu_margin(x.value()));
    if (std::holds_alternative<numerics::MaxPool2d>(layer)) margin = std::min(margin, pool_margin(x.value(), after_relu));
    after_relu = std::holds_alternative<numerics::Relu>(layer);
    x = std::visit([&](auto& l) { return l.forward(graph, x); }, layer);
  }
  return margin;
}

double kink_margin(agent::QNetwork& network, const Tensor& observations) {
  const double encoder = kink_margin(network.encoder_network(), observations);
  return std::min(encoder, kink_margin(network.head_network(), network.represent(observations)));
}

double brute_force_lcr_loss(const Tensor& phi, const Tensor& w, const auxiliary::WindowBatch& windows) {
  const std::size_t dim = phi.dim(1);
  double total = 0.0;
  for (std::size_t t = 0; t < windows.size(); ++t) {
    for (std::size_t d = 0; d < dim; ++d) {
      double predicted = 0.0;
      for (std::size_t j = 0; j < windows.k; ++j) predicted += w[j] * phi.at(windows.neighbor(t, j), d);
      const double diff = predicted - phi.at(windows.centers[t], d);
      total += diff * diff;
    }
  }
  return total / static_cast<double>(windows.size());
}

std::vector<const replay::Transition*> TransitionLog::retained() const {
  const std::size_t keep = std::min(capacity, items.size());
  std::vector<const replay::Transition*> out;
  for (std::size_t i = items.size() - keep; i < items.size(); ++i) out.push_back(&items[i]);
  return out;
}

std::vector<NaiveWindow> naive_windows(const TransitionLog& log, std::size_t batch, std::size_t k) {
  const auto all = log.retained();
  const std::size_t count = std::min(batch, all.size());
  const std::size_t first = all.size() - count;
  std::vector<NaiveWindow> out;
  for (std::size_t c = first; c < all.size(); ++c) {
    NaiveWindow window{c, {}};
    const auto half = static_cast<long>(k / 2);
    bool complete = true;
    for (long offset = -half; offset <= half && complete; ++offset) {
      if (offset == 0) continue;
      const long wanted = static_cast<long>(all[c]->step_index) + offset;
      bool found = false;
      for (std::size_t q = first; q < all.size(); ++q) {
        if (all[q]->episode_id == all[c]->episode_id && static_cast<long>(all[q]->step_index) == wanted) {
          window.neighbors.push_back(q);
          found = true;
          break;
        }
      }
      complete = found;
    }
    if (complete) out.push_back(std::move(window));
  }
  return out;
}

void fill_random_episodes(replay::ReplayBuffer& buffer, TransitionLog& log, std::size_t steps, Rng& rng,
                          int max_episode_length, int state_values) {
  log.capacity = buffer.capacity();
  std::uint64_t episode = log.items.empty() ? 0 : log.items.back().episode_id + 1;
  std::size_t pushed = 0;
  while (pushed < steps) {
    const int length = uniform_int(rng, 1, max_episode_length);
    for (int s = 0; s < length && pushed < steps; ++s, ++pushed) {
      replay::Transition t;
      t.state = Tensor::scalar(uniform_int(rng, 0, state_values - 1));
      t.action = uniform_int(rng, 0, 2);
      t.reward = uniform01(rng);
      t.next_state = Tensor::scalar(uniform_int(rng, 0, state_values - 1));
      t.terminated = s + 1 == length;
      t.episode_id = episode;
      t.step_index = static_cast<std::uint64_t>(s);
      buffer.push(t);
      log.items.push_back(std::move(t));
    }
    ++episode;
  }
}

}  // namespace lcr::testing

namespace lcr::testing {

namespace {

constexpr double kink_tolerance = 1e-4;
constexpr int max_redraws = 200;

// sum(R * y^2) for a random fixed R: nonlinear in y and sensitive to every entry.
Var probe_loss(Var y, const Tensor& r) {
  Graph& graph = *y.graph();
  return numerics::sum(numerics::mul(numerics::square(y), graph.constant(r)));
}

GradCheck layer_case(GradientCase c, Rng& rng) {
  using numerics::LayerSpec;
  const std::size_t batch = uniform_int(rng, 1, 3);
  for (int attempt = 0; attempt < max_redraws; ++attempt) {
    LayerSpec spec;
    Shape in;
    switch (c) {
      case GradientCase::dense:
        in = {static_cast<std::size_t>(uniform_int(rng, 1, 6))};
        spec = LayerSpec::dense(in[0], uniform_int(rng, 1, 6));
        break;
      case GradientCase::conv2d: {
        const std::size_t channels = uniform_int(rng, 1, 3), h = uniform_int(rng, 2, 6), w = uniform_int(rng, 2, 6);
        in = {channels, h, w};
        spec = LayerSpec::conv2d(channels, uniform_int(rng, 1, 3), uniform_int(rng, 1, static_cast<int>(std::min<std::size_t>({h, w, 3}))));
        break;
      }
      case GradientCase::maxpool2d:
        in = {static_cast<std::size_t>(uniform_int(rng, 1, 3)), static_cast<std::size_t>(uniform_int(rng, 2, 7)),
              static_cast<std::size_t>(uniform_int(rng, 2, 7))};
        spec = LayerSpec::maxpool2d();
        break;
      case GradientCase::relu:
        in = {static_cast<std::size_t>(uniform_int(rng, 1, 8))};
        spec = LayerSpec::relu();
        break;
      default:
        in = {2, static_cast<std::size_t>(uniform_int(rng, 1, 3)), 3};
        spec = LayerSpec::flatten();
        break;
    }
    Shape batched{batch};
    batched.insert(batched.end(), in.begin(), in.end());
    Parameter x("x", c == GradientCase::relu ? away_from_zero(batched, rng, 1e-2) : random_tensor(batched, rng));
    numerics::Sequential net({spec}, in, rng);
    for (auto* p : net.parameters()) {
      for (double& v : p->value.data()) v = 2.0 * uniform01(rng) - 1.0;
    }
    if (kink_margin(net, x.value) < kink_tolerance) continue;
    Shape out{batch};
    const Shape& o = net.output_shape();
    out.insert(out.end(), o.begin(), o.end());
    const Tensor r = random_tensor(out, rng);
    ParameterList params = net.parameters();
    params.push_back(&x);
    return check_gradients([&](Graph& g) { return probe_loss(net.forward(g, g.parameter(x)), r); }, params);
  }
  throw std::runtime_error("could not draw a kink-free layer instance");
}

agent::NetworkSpec small_spec(bool conv, Rng& rng) {
  if (conv) return agent::conv_network_spec({2, 10, 10}, {2, 3, 2}, {4}, 3);
  return agent::mlp_network_spec(3, {static_cast<std::size_t>(uniform_int(rng, 2, 5)), 4}, {}, 2);
}

Tensor random_observation(const Shape& shape, Rng& rng) { return random_tensor(shape, rng); }

GradCheck td_case(bool conv, Rng& rng) {
  for (int attempt = 0; attempt < max_redraws; ++attempt) {
    agent::AgentConfig config;
    config.gamma = uniform01(rng);
    agent::DqnAgent learner(config, small_spec(conv, rng), rng);
    // Perturb the online copy so the target differs from it.
    for (auto* p : learner.online().parameters())
      for (double& v : p->value.data()) v += 0.1 * (2.0 * uniform01(rng) - 1.0);
    const std::size_t n = uniform_int(rng, 1, 4);
    const Shape& shape = learner.online().input_shape();
    std::vector<replay::Transition> transitions(n);
    std::vector<const Tensor*> states;
    for (auto& t : transitions) {
      t.state = random_observation(shape, rng);
      t.next_state = random_observation(shape, rng);
      t.action = uniform_int(rng, 0, static_cast<int>(learner.online().num_actions()) - 1);
      t.reward = 2.0 * uniform01(rng) - 1.0;
      t.terminated = uniform01(rng) < 0.3;
      states.push_back(&t.state);
    }
    if (kink_margin(learner.online(), numerics::stack(states)) < kink_tolerance) continue;
    std::vector<replay::TransitionRef> batch(transitions.begin(), transitions.end());
    return check_gradients([&](Graph& g) { return learner.td_loss(g, batch); }, learner.online().parameters());
  }
  throw std::runtime_error("could not draw a kink-free TD instance");
}

GradCheck lcr_case(bool conv, Rng& rng) {
  for (int attempt = 0; attempt < max_redraws; ++attempt) {
    const auto spec = small_spec(conv, rng);
    agent::QNetwork network(spec, rng);
    const std::size_t k = 2 * static_cast<std::size_t>(uniform_int(rng, 1, 2));
    replay::ReplayBuffer buffer(64);
    const int episodes = uniform_int(rng, 1, 3);
    for (int e = 0; e < episodes; ++e) {
      const int length = uniform_int(rng, static_cast<int>(k) + 1, static_cast<int>(k) + 4);
      for (int s = 0; s < length; ++s) {
        replay::Transition t;
        t.state = random_observation(spec.input_shape, rng);
        t.next_state = t.state;
        t.episode_id = static_cast<std::uint64_t>(e);
        t.step_index = static_cast<std::uint64_t>(s);
        buffer.push(std::move(t));
      }
    }
    const auto windows = auxiliary::build_windows(buffer, buffer.size(), k);
    if (kink_margin(network.encoder_network(), windows.states) < kink_tolerance) continue;
    Parameter w = auxiliary::init_w(k, rng);
    ParameterList params = network.encoder_parameters();
    params.push_back(&w);
    return check_gradients([&](Graph& g) { return auxiliary::lcr_loss(network, g, g.parameter(w), windows); },
                           params);
  }
  throw std::runtime_error("could not draw a kink-free LCR instance");
}

}  // namespace

std::vector<GradientCase> all_gradient_cases() {
  return {GradientCase::dense,       GradientCase::conv2d,       GradientCase::maxpool2d,
          GradientCase::relu,        GradientCase::flatten,      GradientCase::td_loss_mlp,
          GradientCase::td_loss_conv, GradientCase::lcr_loss_mlp, GradientCase::lcr_loss_conv};
}

const char* to_string(GradientCase c) {
  switch (c) {
    case GradientCase::dense: return "dense";
    case GradientCase::conv2d: return "conv2d";
    case GradientCase::maxpool2d: return "maxpool2d";
    case GradientCase::relu: return "relu";
    case GradientCase::flatten: return "flatten";
    case GradientCase::td_loss_mlp: return "td_loss_mlp";
    case GradientCase::td_loss_conv: return "td_loss_conv";
    case GradientCase::lcr_loss_mlp: return "lcr_loss_mlp";
    case GradientCase::lcr_loss_conv: return "lcr_loss_conv";
  }
  return "?";
}

GradCheck run_gradient_case(GradientCase c, Rng& rng) {
  switch (c) {
    case GradientCase::td_loss_mlp: return td_case(false, rng);
    case GradientCase::td_loss_conv: return td_case(true, rng);
    case GradientCase::lcr_loss_mlp: return lcr_case(false, rng);
    case GradientCase::lcr_loss_conv: return lcr_case(true, rng);
    default: return layer_case(c, rng);
  }
}

}  // namespace lcr::testing
