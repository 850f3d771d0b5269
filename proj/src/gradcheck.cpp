#include "sgan/gradcheck.hpp"

#include "sgan/networks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace sgan {

GradCheckReport grad_check(const std::function<Tensor()>& f, std::vector<Tensor> params, Scalar h, Scalar tol) {
  for (Tensor& p : params) p.zero_grad();
  backward(f());
  std::vector<Matrix> analytic;
  analytic.reserve(params.size());
  for (const Tensor& p : params) analytic.push_back(p.grad());

  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Matrix& value = params[k].mutable_value();
    for (Index i = 0; i < value.size(); ++i) {
      const Scalar saved = value.data()[i];
      value.data()[i] = saved + h;
      const Scalar up = f().item();
      value.data()[i] = saved - h;
      const Scalar down = f().item();
      value.data()[i] = saved;
      const Scalar numeric = (up - down) / (2 * h);
      const Scalar a = analytic[k].data()[i];
      const Scalar denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
      report.max_rel_err = std::max(report.max_rel_err, std::abs(a - numeric) / denom);
      ++report.coordinates_checked;
    }
  }
  for (Tensor& p : params) p.zero_grad();
  report.pass = report.max_rel_err < tol;
  return report;
}

namespace {

class InputFactory {
 public:
  explicit InputFactory(std::uint64_t seed) : rng_(seed) {}

  Tensor normal(Index r, Index c, bool grad = true) {
    std::normal_distribution<Scalar> d(0.0, 1.0);
    return fill(r, c, grad, [&] { return d(rng_); });
  }
  Tensor positive(Index r, Index c, bool grad = true) {
    std::uniform_real_distribution<Scalar> d(0.2, 2.0);
    return fill(r, c, grad, [&] { return d(rng_); });
  }
  // Bounded away from 0 so piecewise-linear kinks stay outside [-h, h].
  Tensor away_from_zero(Index r, Index c, bool grad = true) {
    std::uniform_real_distribution<Scalar> mag(0.05, 2.0);
    std::bernoulli_distribution sign(0.5);
    return fill(r, c, grad, [&] { return sign(rng_) ? mag(rng_) : -mag(rng_); });
  }
  Tensor one_hot_rows(Index r, Index c) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(c) - 1);
    std::vector<int> labels(static_cast<std::size_t>(r));
    for (auto& l : labels) l = pick(rng_);
    return Tensor(one_hot(labels, c));
  }

 private:
  template <typename Gen>
  Tensor fill(Index r, Index c, bool grad, Gen&& gen) {
    Matrix m(r, c);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = gen();
    return Tensor(std::move(m), grad);
  }
  std::mt19937_64 rng_;
};

// Contracts a tensor-valued output against fixed random weights so that every
// entry of the Jacobian contributes to the checked scalar.
Tensor contract(const Tensor& out, const Tensor& weights) { return sum(mul(out, weights)); }

struct OpCase {
  std::string name;
  // Builds inputs from the factory and returns (loss closure, parameters).
  std::function<std::pair<std::function<Tensor()>, std::vector<Tensor>>(InputFactory&)> make;
};

template <typename Op>
OpCase unary_case(std::string name, Op op, int domain) {
  return {name, [op, domain](InputFactory& in) {
            Tensor a = domain == 0 ? in.normal(3, 4) : domain == 1 ? in.positive(3, 4) : in.away_from_zero(3, 4);
            Tensor w = in.normal(3, 4, false);
            std::function<Tensor()> f = [=] { return contract(op(a), w); };
            return std::make_pair(f, std::vector<Tensor>{a});
          }};
}

template <typename Op>
OpCase reduction_case(std::string name, Op op) {
  return {name, [op](InputFactory& in) {
            Tensor a = in.normal(3, 4);
            Tensor w = in.normal(1, 1, false);
            std::function<Tensor()> f = [=] { return mul(op(a), w); };
            return std::make_pair(f, std::vector<Tensor>{a});
          }};
}

std::vector<OpCase> catalog_cases(bool inject_fault) {
  std::vector<OpCase> cases;
  cases.push_back({"matmul", [](InputFactory& in) {
                     Tensor a = in.normal(3, 4), b = in.normal(4, 2), w = in.normal(3, 2, false);
                     std::function<Tensor()> f = [=] { return contract(matmul(a, b), w); };
                     return std::make_pair(f, std::vector<Tensor>{a, b});
                   }});
  cases.push_back({"add", [](InputFactory& in) {
                     Tensor a = in.normal(3, 4), b = in.normal(3, 4), row = in.normal(1, 4), s = in.normal(1, 1);
                     Tensor w = in.normal(3, 4, false);
                     std::function<Tensor()> f = [=] {
                       return contract(add(add(add(a, b), row), s), w);
                     };
                     return std::make_pair(f, std::vector<Tensor>{a, b, row, s});
                   }});
  cases.push_back({"sub", [](InputFactory& in) {
                     Tensor a = in.normal(3, 4), b = in.normal(1, 4), w = in.normal(3, 4, false);
                     std::function<Tensor()> f = [=] { return contract(sub(a, b), w); };
                     return std::make_pair(f, std::vector<Tensor>{a, b});
                   }});
  cases.push_back({"mul", [](InputFactory& in) {
                     Tensor a = in.normal(3, 4), b = in.normal(3, 4), w = in.normal(3, 4, false);
                     std::function<Tensor()> f = [=] { return contract(mul(a, b), w); };
                     return std::make_pair(f, std::vector<Tensor>{a, b});
                   }});
  cases.push_back(unary_case("scale", [](const Tensor& a) { return scale(a, -1.7); }, 0));
  cases.push_back(unary_case("add_scalar", [](const Tensor& a) { return add_scalar(a, 0.3); }, 0));
  cases.push_back({"concat", [](InputFactory& in) {
                     Tensor a = in.normal(3, 2), b = in.normal(3, 3), w = in.normal(3, 5, false);
                     std::function<Tensor()> f = [=] { return contract(concat(a, b), w); };
                     return std::make_pair(f, std::vector<Tensor>{a, b});
                   }});
  cases.push_back(unary_case("relu", [](const Tensor& a) { return relu(a); }, 2));
  cases.push_back(unary_case("leaky_relu", [](const Tensor& a) { return leaky_relu(a, 0.2); }, 2));
  cases.push_back(unary_case("sigmoid", [](const Tensor& a) { return sigmoid(a); }, 0));
  cases.push_back(unary_case("tanh", [](const Tensor& a) { return tanh(a); }, 0));
  cases.push_back(unary_case("softmax", [](const Tensor& a) { return softmax(a); }, 0));
  cases.push_back(unary_case("log", [](const Tensor& a) { return log(a); }, 1));
  cases.push_back(unary_case("log_sigmoid", [](const Tensor& a) { return log_sigmoid(a); }, 0));
  cases.push_back(unary_case("log_softmax", [](const Tensor& a) { return log_softmax(a); }, 0));
  cases.push_back(reduction_case("sum", [](const Tensor& a) { return sum(a); }));
  cases.push_back(reduction_case("mean", [](const Tensor& a) { return mean(a); }));
  cases.push_back({"row_sum", [](InputFactory& in) {
                     Tensor a = in.normal(3, 4), w = in.normal(3, 1, false);
                     std::function<Tensor()> f = [=] { return contract(row_sum(a), w); };
                     return std::make_pair(f, std::vector<Tensor>{a});
                   }});
  cases.push_back({"squared_error", [](InputFactory& in) {
                     Tensor a = in.normal(3, 4), b = in.normal(3, 4);
                     std::function<Tensor()> f = [=] { return squared_error(a, b); };
                     return std::make_pair(f, std::vector<Tensor>{a, b});
                   }});
  cases.push_back({"cross_entropy", [](InputFactory& in) {
                     Tensor p = in.positive(3, 4), y = in.one_hot_rows(3, 4);
                     std::function<Tensor()> f = [=] { return cross_entropy(p, y); };
                     return std::make_pair(f, std::vector<Tensor>{p});
                   }});
  cases.push_back({"cross_entropy_with_logits", [](InputFactory& in) {
                     Tensor l = in.normal(3, 4), y = in.one_hot_rows(3, 4);
                     std::function<Tensor()> f = [=] { return cross_entropy_with_logits(l, y); };
                     return std::make_pair(f, std::vector<Tensor>{l});
                   }});
  if (inject_fault) {
    // sigmoid value with the derivative of exp: a wrong backward rule.
    cases.push_back(unary_case(
        "faulty_sigmoid",
        [](const Tensor& a) {
          return elementwise(
              a, [](Scalar v) { return 1.0 / (1.0 + std::exp(-v)); }, [](Scalar v) { return std::exp(v); },
              "faulty_sigmoid");
        },
        0));
  }
  return cases;
}

struct NetworkCase {
  Role role;
  std::string name;
};

Matrix network_input(Role role, const Tensor& x, const Tensor& y, const Tensor& z) {
  auto join = [](const Matrix& a, const Matrix& b) {
    Matrix m(a.rows(), a.cols() + b.cols());
    m << a, b;
    return m;
  };
  switch (role) {
    case Role::kGenerator:
      return join(y.value(), z.value());
    case Role::kCriticXY:
      return join(x.value(), y.value());
    case Role::kCriticXZ:
      return join(x.value(), z.value());
    default:
      return x.value();
  }
}

// Smallest |pre-activation| over all hidden units and rows.
Scalar min_hidden_margin(const Network& net, const Matrix& input) {
  const auto& tensors = net.params().tensors;
  const std::size_t layers = tensors.size() / 2;
  const Scalar slope = net.spec().leaky_slope;
  Matrix h = input;
  Scalar margin = std::numeric_limits<Scalar>::infinity();
  for (std::size_t l = 0; l + 1 < layers; ++l) {
    Matrix pre = h * tensors[2 * l].tensor.value();
    pre.rowwise() += tensors[2 * l + 1].tensor.value().row(0);
    margin = std::min(margin, pre.cwiseAbs().minCoeff());
    switch (net.spec().activations[l]) {
      case Activation::kRelu:
        h = pre.cwiseMax(0.0);
        break;
      case Activation::kLeakyRelu:
        h = pre.unaryExpr([slope](Scalar v) { return v > 0 ? v : slope * v; });
        break;
      case Activation::kTanh:
        h = pre.array().tanh().matrix();
        break;
      case Activation::kSigmoid:
        h = pre.unaryExpr([](Scalar v) { return 1.0 / (1.0 + std::exp(-v)); });
        break;
    }
  }
  return margin;
}

GradCheckReport check_network(Role role, std::uint64_t seed, Scalar h, Scalar tol) {
  LatentDims dims{3, 3, 2};
  Network net = build_network(default_spec(role, dims, {6, 5}), seed);
  InputFactory in(seed + 1000);
  Tensor x, z, y;
  for (int attempt = 0;; ++attempt) {
    x = in.normal(4, dims.x_dim);
    z = in.normal(4, dims.z_dim);
    y = in.one_hot_rows(4, dims.y_dim);
    if (min_hidden_margin(net, network_input(role, x, y, z)) >= 0.05) break;
    if (attempt == 1000) throw std::runtime_error("gradcheck: could not draw kink-free network inputs");
  }
  std::vector<Tensor> params = net.params().list();
  std::function<Tensor()> f;
  Tensor w = in.normal(4, net.spec().output_width(), false);
  switch (role) {
    case Role::kGenerator:
      params.push_back(z);
      f = [=] { return contract(generator_forward(net, y, z), w); };
      break;
    case Role::kInference:
      params.push_back(x);
      f = [=] { return contract(infer_z(net, x), w); };
      break;
    case Role::kClassifier:
      params.push_back(x);
      f = [=] { return contract(classify(net, x), w); };
      break;
    case Role::kCriticXY:
      params.push_back(x);
      f = [=] { return contract(critic_xy(net, x, y), w); };
      break;
    case Role::kCriticXZ:
      params.push_back(x);
      params.push_back(z);
      f = [=] { return contract(critic_xz(net, x, z), w); };
      break;
  }
  return grad_check(f, params, h, tol);
}

}  // namespace

std::vector<GradCheckCase> run_gradcheck_suite(const GradCheckSuiteOptions& options) {
  std::vector<GradCheckCase> out;
  for (const OpCase& c : catalog_cases(options.inject_fault)) {
    GradCheckCase result{c.name, {}};
    for (int seed = 0; seed < options.seeds; ++seed) {
      InputFactory in(static_cast<std::uint64_t>(seed) * 7919 + 17);
      auto [f, params] = c.make(in);
      const GradCheckReport r = grad_check(f, params, options.h, options.tol);
      result.report.max_rel_err = std::max(result.report.max_rel_err, r.max_rel_err);
      result.report.coordinates_checked += r.coordinates_checked;
    }
    result.report.pass = result.report.max_rel_err < options.tol;
    out.push_back(result);
  }
  const NetworkCase networks[] = {{Role::kGenerator, "network:G"},
                                  {Role::kInference, "network:I"},
                                  {Role::kClassifier, "network:C"},
                                  {Role::kCriticXY, "network:Dxy"},
                                  {Role::kCriticXZ, "network:Dxz"}};
  const int network_seeds = std::max(1, std::min(options.seeds, 10));
  for (const auto& nc : networks) {
    GradCheckCase result{nc.name, {}};
    for (int seed = 0; seed < network_seeds; ++seed) {
      const GradCheckReport r = check_network(nc.role, static_cast<std::uint64_t>(seed), options.h, options.tol);
      result.report.max_rel_err = std::max(result.report.max_rel_err, r.max_rel_err);
      result.report.coordinates_checked += r.coordinates_checked;
    }
    result.report.pass = result.report.max_rel_err < options.tol;
    out.push_back(result);
  }
  return out;
}

}  // namespace sgan
