// Copyright 2026 The ngd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ngd/network.hpp"

#include "ngd/errors.hpp"
#include "ngd/rng.hpp"

#include <cmath>
#include <string>

namespace ngd::nn {

std::string_view activation_name(Activation act) {
  switch (act) {
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Tanh: return "tanh";
    case Activation::Identity: return "identity";
    case Activation::Softmax: return "softmax";
  }
  return "unknown";
}

Activation parse_activation(std::string_view name) {
  for (Activation a : {Activation::Sigmoid, Activation::Tanh, Activation::Identity,
                       Activation::Softmax})
    if (activation_name(a) == name) return a;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

std::string_view loss_name(Loss::Kind kind) {
  switch (kind) {
    case Loss::Kind::Squared: return "squared";
    case Loss::Kind::BinaryCE: return "bce";
    case Loss::Kind::MultiClassCE: return "mce";
  }
  return "unknown";
}

Loss::Kind parse_loss(std::string_view name) {
  for (Loss::Kind k : {Loss::Kind::Squared, Loss::Kind::BinaryCE, Loss::Kind::MultiClassCE})
    if (loss_name(k) == name) return k;
  throw ConfigError("unknown loss '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Network

Network::Network(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ShapeMismatch("network needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& l = layers_[i];
    if (l.weights.rows() == 0 || l.weights.cols() == 0)
      throw ShapeMismatch("layer " + std::to_string(i) + " has an empty weight matrix");
    if (l.bias.size() != l.weights.rows())
      throw ShapeMismatch("layer " + std::to_string(i) + " bias length != output width");
    if (i > 0 && l.weights.cols() != layers_[i - 1].weights.rows())
      throw ShapeMismatch("layer " + std::to_string(i) + " input width != previous output width");
    if (l.act == Activation::Softmax && i + 1 != layers_.size())
      throw ConfigError("softmax is only allowed on the final layer");
    param_count_ += l.weights.size() + l.bias.size();
  }
}

Network Network::random(const std::vector<Index>& sizes, const std::vector<Activation>& acts,
                        std::uint64_t seed) {
  if (sizes.size() < 2 || acts.size() + 1 != sizes.size())
    throw ShapeMismatch("need one activation per layer and at least two layer sizes");
  Rng rng(seed);
  std::vector<Layer> layers;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    const Index in = sizes[i], out = sizes[i + 1];
    if (in <= 0 || out <= 0) throw ShapeMismatch("layer sizes must be positive");
    const double scale = std::sqrt(0.5 / static_cast<double>(in));
    Layer l{Matrix(out, in), Vector::Zero(out), acts[i]};
    for (Index r = 0; r < out; ++r)
      for (Index c = 0; c < in; ++c) l.weights(r, c) = scale * rng.normal();
    layers.push_back(std::move(l));
  }
  return Network(std::move(layers));
}

Vector Network::flatten() const {
  Vector flat(param_count_);
  Index k = 0;
  for (const Layer& l : layers_) {
    for (Index r = 0; r < l.weights.rows(); ++r)
      for (Index c = 0; c < l.weights.cols(); ++c) flat(k++) = l.weights(r, c);
    for (Index r = 0; r < l.bias.size(); ++r) flat(k++) = l.bias(r);
  }
  return flat;
}

Network Network::unflatten(const Vector& flat) const {
  if (flat.size() != param_count_)
    throw LengthMismatch("flat vector has length " + std::to_string(flat.size()) +
                         ", network has " + std::to_string(param_count_) + " parameters");
  Network out = *this;
  Index k = 0;
  for (Layer& l : out.layers_) {
    for (Index r = 0; r < l.weights.rows(); ++r)
      for (Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = flat(k++);
    for (Index r = 0; r < l.bias.size(); ++r) l.bias(r) = flat(k++);
  }
  return out;
}

bool operator==(const Network& a, const Network& b) {
  if (a.layers_.size() != b.layers_.size()) return false;
  for (std::size_t i = 0; i < a.layers_.size(); ++i) {
    const Layer& x = a.layers_[i];
    const Layer& y = b.layers_[i];
    if (x.act != y.act || x.weights.rows() != y.weights.rows() ||
        x.weights.cols() != y.weights.cols() || x.weights != y.weights || x.bias != y.bias)
      return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Validation

void validate_loss(const Network& net, const Loss& loss) {
  const Activation out = net.output_activation();
  switch (loss.kind) {
    case Loss::Kind::Squared:
      if (!(loss.sigma2 > 0.0) || !std::isfinite(loss.sigma2))
        throw ConfigError("squared loss needs sigma2 > 0");
      if (out != Activation::Identity)
        throw ConfigError("squared loss requires an identity output activation");
      break;
    case Loss::Kind::BinaryCE:
      if (out != Activation::Sigmoid)
        throw ConfigError("binary cross-entropy requires a sigmoid output activation");
      break;
    case Loss::Kind::MultiClassCE:
      if (out != Activation::Softmax)
        throw ConfigError("multi-class cross-entropy requires a softmax output activation");
      break;
  }
  if (!(loss.max_clamped_fraction >= 0.0 && loss.max_clamped_fraction <= 1.0))
    throw ConfigError("max_clamped_fraction must lie in [0, 1]");
}

void validate_batch(const Network& net, const Loss& loss, const Batch& batch) {
  validate_loss(net, loss);
  if (batch.inputs.rows() == 0) throw ShapeMismatch("batch is empty");
  if (batch.inputs.cols() != net.input_dim())
    throw ShapeMismatch("batch input width != network input width");
  if (batch.targets.rows() != batch.inputs.rows() || batch.targets.cols() != net.output_dim())
    throw ShapeMismatch("batch targets shape does not match (n_samples x out_dim)");
  if (!batch.inputs.allFinite() || !batch.targets.allFinite())
    throw NonFiniteState("batch contains non-finite values");
  if (loss.kind == Loss::Kind::BinaryCE) {
    for (Index i = 0; i < batch.targets.size(); ++i) {
      const double t = batch.targets.data()[i];
      if (t != 0.0 && t != 1.0) throw ConfigError("binary cross-entropy targets must be 0 or 1");
    }
  } else if (loss.kind == Loss::Kind::MultiClassCE) {
    for (Index r = 0; r < batch.targets.rows(); ++r) {
      int ones = 0;
      for (Index c = 0; c < batch.targets.cols(); ++c) {
        const double t = batch.targets(r, c);
        if (t == 1.0) ++ones;
        else if (t != 0.0) ones = -1000;
      }
      if (ones != 1) throw ConfigError("multi-class targets must be one-hot rows");
    }
  }
}

namespace {

// ---------------------------------------------------------------------------
// Activations. Elementwise ones are described by phi' and phi'' expressed in
// terms of the output value a = phi(s).

void check_direction(const Network& net, const Vector& v) {
  if (v.size() != net.param_count())
    throw ShapeMismatch("direction has length " + std::to_string(v.size()) + ", expected " +
                        std::to_string(net.param_count()));
}

Matrix apply(Activation act, const Matrix& s) {
  switch (act) {
    case Activation::Sigmoid: return s.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
    case Activation::Tanh: return s.array().tanh().matrix();
    case Activation::Identity: return s;
    case Activation::Softmax: {
      Matrix y(s.rows(), s.cols());
      for (Index r = 0; r < s.rows(); ++r) {
        const double m = s.row(r).maxCoeff();
        double z = 0.0;
        for (Index c = 0; c < s.cols(); ++c) z += (y(r, c) = std::exp(s(r, c) - m));
        y.row(r) /= z;
      }
      return y;
    }
  }
  return s;
}

Matrix d1(Activation act, const Matrix& a) {
  switch (act) {
    case Activation::Sigmoid: return (a.array() * (1.0 - a.array())).matrix();
    case Activation::Tanh: return (1.0 - a.array().square()).matrix();
    default: return Matrix::Ones(a.rows(), a.cols());
  }
}

Matrix d2(Activation act, const Matrix& a) {
  switch (act) {
    case Activation::Sigmoid:
      return (a.array() * (1.0 - a.array()) * (1.0 - 2.0 * a.array())).matrix();
    case Activation::Tanh: return (-2.0 * a.array() * (1.0 - a.array().square())).matrix();
    default: return Matrix::Zero(a.rows(), a.cols());
  }
}

// Row-wise y ⊙ (x - <y, x>), the softmax Jacobian applied to x (symmetric).
Matrix softmax_jvp(const Matrix& y, const Matrix& x) {
  const Vector dots = (y.array() * x.array()).rowwise().sum();
  return (y.array() * (x.colwise() - dots).array()).matrix();
}

// ---------------------------------------------------------------------------
// Forward trace with optional first and second directional derivatives.

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct LayerSlice {
  Matrix w;
  Vector b;
};

std::vector<LayerSlice> split_direction(const Network& net, const Vector& v) {
  std::vector<LayerSlice> out;
  Index k = 0;
  for (const Layer& l : net.layers()) {
    const Index r = l.weights.rows(), c = l.weights.cols();
    LayerSlice s;
    s.w = Eigen::Map<const RowMajor>(v.data() + k, r, c);
    k += r * c;
    s.b = v.segment(k, r);
    k += r;
    out.push_back(std::move(s));
  }
  return out;
}

struct Trace {
  int order = 0;              // 0: values, 1: +R, 2: +R and S
  std::vector<Matrix> a;      // a[0] = inputs, a[i] = output of layer i
  std::vector<Matrix> ra, sa; // same indexing
  std::vector<Matrix> rs, ss; // rs[i] = R(s) of layer i+1
  std::vector<LayerSlice> dir;
};

Trace run_forward(const Network& net, const Matrix& inputs, const Vector* v, int order) {
  if (inputs.cols() != net.input_dim())
    throw ShapeMismatch("input width " + std::to_string(inputs.cols()) + " != network input " +
                        std::to_string(net.input_dim()));
  Trace t;
  t.order = v ? order : 0;
  if (v) {
    check_direction(net, *v);
    t.dir = split_direction(net, *v);
  }
  const Index n = inputs.rows();
  t.a.push_back(inputs);
  if (t.order >= 1) t.ra.push_back(Matrix::Zero(n, inputs.cols()));
  if (t.order >= 2) t.sa.push_back(Matrix::Zero(n, inputs.cols()));

  const auto& layers = net.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Layer& l = layers[i];
    const Matrix& prev = t.a[i];
    Matrix s = prev * l.weights.transpose();
    s.rowwise() += l.bias.transpose();
    Matrix a = apply(l.act, s);

    if (t.order >= 1) {
      const LayerSlice& d = t.dir[i];
      Matrix rs = prev * d.w.transpose() + t.ra[i] * l.weights.transpose();
      rs.rowwise() += d.b.transpose();
      Matrix ra = l.act == Activation::Softmax ? softmax_jvp(a, rs)
                                               : Matrix(d1(l.act, a).cwiseProduct(rs));
      if (t.order >= 2) {
        const Matrix ss = 2.0 * t.ra[i] * d.w.transpose() + t.sa[i] * l.weights.transpose();
        Matrix sa;
        if (l.act == Activation::Softmax) {
          // S(y) = R(y) ⊙ (R(s) - <y,R(s)>) + y ⊙ (S(s) - <R(y),R(s)> - <y,S(s)>)
          const Vector y_rs = (a.array() * rs.array()).rowwise().sum();
          const Vector ry_rs = (ra.array() * rs.array()).rowwise().sum();
          const Vector y_ss = (a.array() * ss.array()).rowwise().sum();
          sa = (ra.array() * (rs.colwise() - y_rs).array() +
                a.array() * (ss.colwise() - (ry_rs + y_ss)).array())
                   .matrix();
        } else {
          sa = (d2(l.act, a).array() * rs.array().square() + d1(l.act, a).array() * ss.array())
                   .matrix();
        }
        t.ss.push_back(ss);
        t.sa.push_back(std::move(sa));
      }
      t.rs.push_back(std::move(rs));
      t.ra.push_back(std::move(ra));
    }
    t.a.push_back(std::move(a));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Backward pass of a pseudo-loss sum_x <seed(x), top(x)>, seed held constant.
// `top` is either the network output a_l or, with at_preactivation, s_l.
// With `with_r` the pass is additionally differentiated along the trace's
// direction (R-backprop), returning mean_x d/de [sum seed . d_theta top].

struct Backward {
  Vector grad;
  Vector rgrad;
};

// D(s) = D(a) ⊙ phi'(s) for elementwise activations.
Matrix back_through(Activation act, const Matrix& a, const Matrix& da) {
  if (act == Activation::Softmax) return softmax_jvp(a, da);
  return d1(act, a).cwiseProduct(da);
}

using LayerHook = std::function<void(std::size_t layer, const Matrix& ds)>;

Backward run_backward(const Network& net, const Trace& t, const Matrix& seed, bool with_r,
                      bool at_preactivation, const LayerHook& hook = {}) {
  if (with_r && t.order < 1) throw Error("internal", "R-backprop needs an R trace");
  const auto& layers = net.layers();
  const std::size_t nl = layers.size();
  const Index n = seed.rows();

  std::vector<Matrix> gw(nl), rgw(nl);
  std::vector<Vector> gb(nl), rgb(nl);

  Matrix da = seed;
  Matrix rda = Matrix::Zero(seed.rows(), seed.cols());
  for (std::size_t ii = nl; ii-- > 0;) {
    const Layer& l = layers[ii];
    const Matrix& a = t.a[ii + 1];
    const Matrix& prev = t.a[ii];
    const bool skip = at_preactivation && ii + 1 == nl;

    const Matrix ds = skip ? da : back_through(l.act, a, da);
    if (hook) hook(ii, ds);
    gw[ii] = ds.transpose() * prev;
    gb[ii] = ds.colwise().sum().transpose();

    Matrix rds;
    if (with_r) {
      if (skip) {
        rds = rda;
      } else if (l.act == Activation::Softmax) {
        // R(D s) = R(y) ⊙ (Da - <y,Da>) + y ⊙ (R(Da) - <R(y),Da> - <y,R(Da)>)
        const Matrix& ry = t.ra[ii + 1];
        const Vector y_da = (a.array() * da.array()).rowwise().sum();
        const Vector ry_da = (ry.array() * da.array()).rowwise().sum();
        const Vector y_rda = (a.array() * rda.array()).rowwise().sum();
        rds = (ry.array() * (da.colwise() - y_da).array() +
               a.array() * (rda.colwise() - (ry_da + y_rda)).array())
                  .matrix();
      } else {
        rds = (rda.array() * d1(l.act, a).array() +
               da.array() * d2(l.act, a).array() * t.rs[ii].array())
                  .matrix();
      }
      rgw[ii] = rds.transpose() * prev + ds.transpose() * t.ra[ii];
      rgb[ii] = rds.colwise().sum().transpose();
      if (ii > 0) rda = ds * t.dir[ii].w + rds * l.weights;
    }
    if (ii > 0) da = ds * l.weights;
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  auto pack = [&](const std::vector<Matrix>& w, const std::vector<Vector>& b) {
    Vector flat(net.param_count());
    Index k = 0;
    for (std::size_t i = 0; i < nl; ++i) {
      for (Index r = 0; r < w[i].rows(); ++r)
        for (Index c = 0; c < w[i].cols(); ++c) flat(k++) = w[i](r, c) * inv_n;
      for (Index r = 0; r < b[i].size(); ++r) flat(k++) = b[i](r) * inv_n;
    }
    return flat;
  };
  Backward out;
  out.grad = pack(gw, gb);
  if (with_r) out.rgrad = pack(rgw, rgb);
  return out;
}

// ---------------------------------------------------------------------------
// Loss coefficients, all in terms of the post-activation output y.

// Clamps y into [kOutputClamp, 1 - kOutputClamp] for the cross-entropy losses.
Matrix clamp_outputs(const Loss& loss, const Matrix& y) {
  if (loss.kind == Loss::Kind::Squared) return y;
  Index clamped = 0;
  Matrix c = y;
  for (Index i = 0; i < c.size(); ++i) {
    double& v = c.data()[i];
    if (!std::isfinite(v)) throw NonFiniteState("network output is not finite");
    if (v < kOutputClamp) {
      v = kOutputClamp;
      ++clamped;
    } else if (v > 1.0 - kOutputClamp) {
      v = 1.0 - kOutputClamp;
      ++clamped;
    }
  }
  if (static_cast<double>(clamped) > loss.max_clamped_fraction * static_cast<double>(c.size()))
    throw NumericalUnderflow(std::to_string(clamped) + " of " + std::to_string(c.size()) +
                             " outputs clamped");
  return c;
}

// Metric coefficient lambda_m(y).
Matrix metric_coeff(const Loss& loss, const Matrix& yc) {
  switch (loss.kind) {
    case Loss::Kind::Squared: return Matrix::Constant(yc.rows(), yc.cols(), 1.0 / loss.sigma2);
    case Loss::Kind::BinaryCE: return (1.0 / (yc.array() * (1.0 - yc.array()))).matrix();
    case Loss::Kind::MultiClassCE: return yc.cwiseInverse();
  }
  return {};
}

// Second connection coefficient lambda_2(y); lambda_1 equals lambda_m.
Matrix connection_coeff2(const Loss& loss, const Matrix& yc) {
  switch (loss.kind) {
    case Loss::Kind::Squared: return Matrix::Zero(yc.rows(), yc.cols());
    case Loss::Kind::BinaryCE: {
      const auto y = yc.array();
      return ((2.0 * y - 1.0) / (2.0 * y.square() * (1.0 - y).square())).matrix();
    }
    case Loss::Kind::MultiClassCE: return (-0.5 / yc.array().square()).matrix();
  }
  return {};
}

// dL/dz for the matched output activation.
Matrix loss_dz(const Loss& loss, const Matrix& y, const Matrix& t) {
  if (loss.kind == Loss::Kind::Squared) return (y - t) / loss.sigma2;
  return y - t;
}

// (d^2 L / dz^2) w, row by row.
Matrix loss_dzz(const Loss& loss, const Matrix& y, const Matrix& w) {
  switch (loss.kind) {
    case Loss::Kind::Squared: return w / loss.sigma2;
    case Loss::Kind::BinaryCE: return (y.array() * (1.0 - y.array()) * w.array()).matrix();
    case Loss::Kind::MultiClassCE: return softmax_jvp(y, w);
  }
  return {};
}

double mean_loss(const Loss& loss, const Matrix& y, const Matrix& t) {
  double total = 0.0;
  switch (loss.kind) {
    case Loss::Kind::Squared:
      total = (t - y).squaredNorm() / (2.0 * loss.sigma2);
      break;
    case Loss::Kind::BinaryCE: {
      const Matrix yc = clamp_outputs(loss, y);
      for (Index i = 0; i < yc.size(); ++i) {
        const double p = yc.data()[i], tt = t.data()[i];
        total -= tt * std::log(p) + (1.0 - tt) * std::log1p(-p);
      }
      break;
    }
    case Loss::Kind::MultiClassCE: {
      const Matrix yc = clamp_outputs(loss, y);
      for (Index i = 0; i < yc.size(); ++i)
        if (t.data()[i] != 0.0) total -= t.data()[i] * std::log(yc.data()[i]);
      break;
    }
  }
  return total / static_cast<double>(y.rows());
}

}  // namespace

// ---------------------------------------------------------------------------
// Public operations

Matrix forward(const Network& net, const Matrix& inputs) {
  return run_forward(net, inputs, nullptr, 0).a.back();
}

double loss_value(const Network& net, const Loss& loss, const Batch& batch) {
  validate_batch(net, loss, batch);
  return mean_loss(loss, forward(net, batch.inputs), batch.targets);
}

LossAndGrad loss_and_grad(const Network& net, const Loss& loss, const Batch& batch) {
  validate_batch(net, loss, batch);
  const Trace t = run_forward(net, batch.inputs, nullptr, 0);
  const Matrix& y = t.a.back();
  const double value = mean_loss(loss, y, batch.targets);
  const Backward b = run_backward(net, t, loss_dz(loss, y, batch.targets), false, true);
  return {value, b.grad};
}

DirectionalPass rs_pass(const Network& net, const Matrix& inputs, const Vector& v) {
  Trace t = run_forward(net, inputs, &v, 2);
  return {std::move(t.a.back()), std::move(t.ra.back()), std::move(t.sa.back())};
}

Vector fisher_vp(const Network& net, const Loss& loss, const Batch& batch, const Vector& v) {
  validate_batch(net, loss, batch);
  const Trace t = run_forward(net, batch.inputs, &v, 1);
  const Matrix yc = clamp_outputs(loss, t.a.back());
  const Matrix seed = metric_coeff(loss, yc).cwiseProduct(t.ra.back());
  return run_backward(net, t, seed, false, false).grad;
}

Vector fisher_diagonal(const Network& net, const Loss& loss, const Batch& batch) {
  validate_batch(net, loss, batch);
  const Trace t = run_forward(net, batch.inputs, nullptr, 0);
  const Matrix yc = clamp_outputs(loss, t.a.back());
  const Matrix root = metric_coeff(loss, yc).cwiseSqrt();
  const auto& layers = net.layers();

  std::vector<Matrix> dw(layers.size());
  std::vector<Vector> db(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    dw[i] = Matrix::Zero(layers[i].weights.rows(), layers[i].weights.cols());
    db[i] = Vector::Zero(layers[i].bias.size());
  }
  // Per-sample gradients of sqrt(lambda_j) y_j; squares summed over samples.
  const LayerHook hook = [&](std::size_t i, const Matrix& ds) {
    const Matrix ds2 = ds.array().square().matrix();
    dw[i] += ds2.transpose() * t.a[i].array().square().matrix();
    db[i] += ds2.colwise().sum().transpose();
  };
  for (Index j = 0; j < net.output_dim(); ++j) {
    Matrix seed = Matrix::Zero(yc.rows(), yc.cols());
    seed.col(j) = root.col(j);
    run_backward(net, t, seed, false, false, hook);
  }

  Vector flat(net.param_count());
  Index k = 0;
  const double inv_n = 1.0 / static_cast<double>(batch.inputs.rows());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    for (Index r = 0; r < dw[i].rows(); ++r)
      for (Index c = 0; c < dw[i].cols(); ++c) flat(k++) = dw[i](r, c) * inv_n;
    for (Index r = 0; r < db[i].size(); ++r) flat(k++) = db[i](r) * inv_n;
  }
  return flat;
}

Vector connection_vp(const Network& net, const Loss& loss, const Batch& batch, const Vector& v) {
  validate_batch(net, loss, batch);
  const Trace t = run_forward(net, batch.inputs, &v, 2);
  const Matrix yc = clamp_outputs(loss, t.a.back());
  const Matrix& ry = t.ra.back();
  const Matrix seed = (metric_coeff(loss, yc).array() * t.sa.back().array() +
                       connection_coeff2(loss, yc).array() * ry.array().square())
                          .matrix();
  return run_backward(net, t, seed, false, false).grad;
}

Vector term3_vp(const Network& net, const Loss& loss, const Batch& batch, const Vector& v) {
  validate_batch(net, loss, batch);
  const Trace t = run_forward(net, batch.inputs, &v, 1);
  const Matrix yc = clamp_outputs(loss, t.a.back());
  const Matrix seed = metric_coeff(loss, yc).cwiseProduct(t.ra.back());
  return run_backward(net, t, seed, true, false).rgrad;
}

SecondOrderRhs second_order_rhs(const Network& net, const Loss& loss, const Batch& batch,
                                const Vector& v) {
  validate_batch(net, loss, batch);
  const Trace t = run_forward(net, batch.inputs, &v, 2);
  const Matrix& y = t.a.back();
  clamp_outputs(loss, y);
  const Matrix& rz = t.rs.back();
  const Matrix& sz = t.ss.back();

  // Mixed term and residual term share one R-backprop with the combined seed.
  const Matrix mixed_seed = loss_dzz(loss, y, rz) + loss_dz(loss, y, batch.targets);
  const Vector mixed = run_backward(net, t, mixed_seed, true, true).rgrad;
  const Vector half_hess = run_backward(net, t, 0.5 * loss_dzz(loss, y, sz), false, true).grad;
  return {half_hess, half_hess + mixed};
}

}  // namespace ngd::nn
