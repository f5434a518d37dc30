/*
 * Copyright 2026 The v2gsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "v2g/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <iterator>
#include <ostream>
#include <stdexcept>

#include "v2g/bytes.hpp"
#include "v2g/rng.hpp"

namespace v2g {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Activations kept from the forward pass for backpropagation.
struct Trace {
  std::size_t steps = 0;
  std::size_t hidden = 0;
  std::vector<double> gates;  // [layer][t][4H], activated
  std::vector<double> cell;   // [layer][t+1][H], slot 0 is the zero state
  std::vector<double> hid;    // [layer][t+1][H]
  std::vector<double> tcell;  // [layer][t][H], tanh(cell)

  void reset(const LstmShape& s, std::size_t t) {
    steps = t;
    hidden = s.hidden;
    gates.assign(s.layers * t * 4 * s.hidden, 0.0);
    cell.assign(s.layers * (t + 1) * s.hidden, 0.0);
    hid.assign(s.layers * (t + 1) * s.hidden, 0.0);
    tcell.assign(s.layers * t * s.hidden, 0.0);
  }
  double* g(std::size_t l, std::size_t t) { return &gates[(l * steps + t) * 4 * hidden]; }
  double* c(std::size_t l, std::size_t t1) { return &cell[(l * (steps + 1) + t1) * hidden]; }
  double* h(std::size_t l, std::size_t t1) { return &hid[(l * (steps + 1) + t1) * hidden]; }
  double* tc(std::size_t l, std::size_t t) { return &tcell[(l * steps + t) * hidden]; }
};

/// Input vector seen by `layer` at step t.
const double* layer_input(Trace& tr, std::span<const double> inputs, const LstmShape& s, std::size_t layer,
                          std::size_t t) {
  return layer == 0 ? inputs.data() + t * s.input_dim : tr.h(layer - 1, t + 1);
}

void forward_pass(const LstmParams& p, std::span<const double> inputs, Trace& tr, double* out) {
  const LstmShape& s = p.shape;
  const std::size_t H = s.hidden;
  const std::size_t steps = inputs.size() / s.input_dim;
  tr.reset(s, steps);
  const double* w = p.values.data();
  for (std::size_t l = 0; l < s.layers; ++l) {
    const std::size_t in = s.layer_input(l);
    const double* wih = w + p.w_ih_offset(l);
    const double* whh = w + p.w_hh_offset(l);
    const double* b = w + p.bias_offset(l);
    for (std::size_t t = 0; t < steps; ++t) {
      const double* x = layer_input(tr, inputs, s, l, t);
      const double* hp = tr.h(l, t);
      const double* cp = tr.c(l, t);
      double* z = tr.g(l, t);
      for (std::size_t r = 0; r < 4 * H; ++r) {
        double acc = b[r];
        const double* wr = wih + r * in;
        for (std::size_t j = 0; j < in; ++j) acc += wr[j] * x[j];
        const double* ur = whh + r * H;
        for (std::size_t j = 0; j < H; ++j) acc += ur[j] * hp[j];
        z[r] = acc;
      }
      double* cn = tr.c(l, t + 1);
      double* hn = tr.h(l, t + 1);
      double* tc = tr.tc(l, t);
      for (std::size_t j = 0; j < H; ++j) {
        const double gi = sigmoid(z[j]);
        const double gf = sigmoid(z[H + j]);
        const double gg = std::tanh(z[2 * H + j]);
        const double go = sigmoid(z[3 * H + j]);
        z[j] = gi;
        z[H + j] = gf;
        z[2 * H + j] = gg;
        z[3 * H + j] = go;
        cn[j] = gf * cp[j] + gi * gg;
        tc[j] = std::tanh(cn[j]);
        hn[j] = go * tc[j];
      }
    }
  }
  const double* top = tr.h(s.layers - 1, steps);
  const double* wo = w + p.head_w_offset();
  const double* bo = w + p.head_b_offset();
  for (std::size_t k = 0; k < s.output_dim; ++k) {
    double acc = bo[k];
    for (std::size_t j = 0; j < H; ++j) acc += wo[k * H + j] * top[j];
    out[k] = acc;
  }
}

/// Accumulates into `grad` the gradient for output sensitivity `dy`.
void backward_pass(const LstmParams& p, std::span<const double> inputs, Trace& tr, const double* dy,
                   double* grad, std::vector<double>& ext, std::vector<double>& ext_below) {
  const LstmShape& s = p.shape;
  const std::size_t H = s.hidden;
  const std::size_t steps = tr.steps;
  const double* w = p.values.data();

  const double* top = tr.h(s.layers - 1, steps);
  const double* wo = w + p.head_w_offset();
  double* gwo = grad + p.head_w_offset();
  double* gbo = grad + p.head_b_offset();
  ext.assign(steps * H, 0.0);
  for (std::size_t k = 0; k < s.output_dim; ++k) {
    gbo[k] += dy[k];
    for (std::size_t j = 0; j < H; ++j) {
      gwo[k * H + j] += dy[k] * top[j];
      ext[(steps - 1) * H + j] += wo[k * H + j] * dy[k];
    }
  }

  std::vector<double> dh_next(H), dc_next(H), da(4 * H);
  for (std::size_t l = s.layers; l-- > 0;) {
    const std::size_t in = s.layer_input(l);
    const double* wih = w + p.w_ih_offset(l);
    const double* whh = w + p.w_hh_offset(l);
    double* gwih = grad + p.w_ih_offset(l);
    double* gwhh = grad + p.w_hh_offset(l);
    double* gb = grad + p.bias_offset(l);
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    std::fill(dc_next.begin(), dc_next.end(), 0.0);
    if (l > 0) ext_below.assign(steps * H, 0.0);
    for (std::size_t t = steps; t-- > 0;) {
      const double* gt = tr.g(l, t);
      const double* cp = tr.c(l, t);
      const double* tc = tr.tc(l, t);
      for (std::size_t j = 0; j < H; ++j) {
        const double gi = gt[j], gf = gt[H + j], gg = gt[2 * H + j], go = gt[3 * H + j];
        const double dh = ext[t * H + j] + dh_next[j];
        const double d_o = dh * tc[j];
        const double dc = dh * go * (1.0 - tc[j] * tc[j]) + dc_next[j];
        da[j] = dc * gg * gi * (1.0 - gi);
        da[H + j] = dc * cp[j] * gf * (1.0 - gf);
        da[2 * H + j] = dc * gi * (1.0 - gg * gg);
        da[3 * H + j] = d_o * go * (1.0 - go);
        dc_next[j] = dc * gf;
      }
      const double* x = layer_input(tr, inputs, s, l, t);
      const double* hp = tr.h(l, t);
      std::fill(dh_next.begin(), dh_next.end(), 0.0);
      double* dx = l > 0 ? &ext_below[t * H] : nullptr;
      for (std::size_t r = 0; r < 4 * H; ++r) {
        const double a = da[r];
        gb[r] += a;
        double* gr = gwih + r * in;
        const double* wr = wih + r * in;
        for (std::size_t j = 0; j < in; ++j) gr[j] += a * x[j];
        if (dx) {
          for (std::size_t j = 0; j < in; ++j) dx[j] += wr[j] * a;
        }
        double* ur_g = gwhh + r * H;
        const double* ur = whh + r * H;
        for (std::size_t j = 0; j < H; ++j) {
          ur_g[j] += a * hp[j];
          dh_next[j] += ur[j] * a;
        }
      }
    }
    if (l > 0) ext.swap(ext_below);
  }
}

void check_inputs(const LstmParams& p, std::span<const double> inputs) {
  p.check();
  if (inputs.empty() || inputs.size() % p.shape.input_dim != 0) {
    throw std::invalid_argument("input length must be a positive multiple of input_dim");
  }
  if (!std::all_of(inputs.begin(), inputs.end(), [](double v) { return std::isfinite(v); })) {
    throw std::invalid_argument("LSTM input contains non-finite values");
  }
}

}  // namespace

std::size_t LstmParams::w_ih_offset(std::size_t layer) const {
  std::size_t off = 0;
  for (std::size_t l = 0; l < layer && l < shape.layers; ++l) off += shape.layer_size(l);
  return off;
}

bool LstmParams::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

void LstmParams::check() const {
  if (shape.input_dim == 0 || shape.hidden == 0 || shape.layers == 0 || shape.output_dim == 0) {
    throw std::invalid_argument("LSTM shape has a zero dimension");
  }
  if (values.size() != shape.param_count()) throw std::invalid_argument("LSTM parameter count mismatch");
  if (!all_finite()) throw std::invalid_argument("LSTM parameters contain non-finite values");
}

LstmParams random_params(const LstmShape& shape, std::uint64_t seed, double scale) {
  LstmParams p(shape, 0);
  Rng rng(seed);
  for (auto& v : p.values) v = rng.uniform(-scale, scale);
  return p;
}

std::vector<double> lstm_forward(const LstmParams& params, std::span<const double> inputs) {
  check_inputs(params, inputs);
  Trace tr;
  std::vector<double> out(params.shape.output_dim);
  forward_pass(params, inputs, tr, out.data());
  return out;
}

double batch_mse(const LstmParams& params, std::span<const WindowSample> batch) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  params.check();
  if (params.shape.input_dim != kWindowFeatures || params.shape.output_dim != 2) {
    throw std::invalid_argument("window samples need input_dim 3 and output_dim 2");
  }
  Trace tr;
  double sum = 0.0;
  double out[2];
  for (const auto& s : batch) {
    forward_pass(params, s.inputs, tr, out);
    for (int k = 0; k < 2; ++k) sum += (out[k] - s.target[k]) * (out[k] - s.target[k]);
  }
  return sum / static_cast<double>(batch.size() * 2);
}

double loss_and_gradient(const LstmParams& params, std::span<const WindowSample> batch,
                         std::vector<double>& grad) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  params.check();
  if (params.shape.input_dim != kWindowFeatures || params.shape.output_dim != 2) {
    throw std::invalid_argument("window samples need input_dim 3 and output_dim 2");
  }
  grad.assign(params.values.size(), 0.0);
  const double n = static_cast<double>(batch.size() * 2);
  Trace tr;
  std::vector<double> ext, ext_below;
  double sum = 0.0;
  double out[2];
  double dy[2];
  for (const auto& s : batch) {
    forward_pass(params, s.inputs, tr, out);
    for (int k = 0; k < 2; ++k) {
      const double e = out[k] - s.target[k];
      sum += e * e;
      dy[k] = 2.0 * e / n;
    }
    backward_pass(params, s.inputs, tr, dy, grad.data(), ext, ext_below);
  }
  return sum / n;
}

TrainOutcome train_step(const LstmParams& params, const AdamState& adam, std::span<const WindowSample> batch) {
  if (batch.empty()) throw std::invalid_argument("train_step needs a non-empty batch");
  if (adam.m.size() != params.values.size() || adam.v.size() != params.values.size()) {
    throw std::invalid_argument("Adam moments do not match the parameter shape");
  }
  std::vector<double> grad;
  TrainOutcome out{params, adam, loss_and_gradient(params, batch, grad), true};
  const bool finite = std::isfinite(out.mse) &&
                      std::all_of(grad.begin(), grad.end(), [](double g) { return std::isfinite(g); });
  if (!finite) {
    out.applied = false;
    return out;
  }
  AdamState& a = out.adam;
  a.step_count += 1;
  const double t = static_cast<double>(a.step_count);
  const double c1 = 1.0 - std::pow(a.beta1, t);
  const double c2 = 1.0 - std::pow(a.beta2, t);
  std::vector<double>& v = out.params.values;
  for (std::size_t i = 0; i < v.size(); ++i) {
    a.m[i] = a.beta1 * a.m[i] + (1.0 - a.beta1) * grad[i];
    a.v[i] = a.beta2 * a.v[i] + (1.0 - a.beta2) * grad[i] * grad[i];
    const double mhat = a.m[i] / c1;
    const double vhat = a.v[i] / c2;
    v[i] -= a.lr * mhat / (std::sqrt(vhat) + a.epsilon);
  }
  if (!out.params.all_finite()) {
    return TrainOutcome{params, adam, out.mse, false};
  }
  return out;
}

std::string encode_checkpoint(const LstmParams& params) {
  ByteWriter w;
  w.raw("V2GLSTM1");
  w.u32(static_cast<std::uint32_t>(params.shape.input_dim));
  w.u32(static_cast<std::uint32_t>(params.shape.hidden));
  w.u32(static_cast<std::uint32_t>(params.shape.layers));
  w.u32(static_cast<std::uint32_t>(params.shape.output_dim));
  w.u64(params.version);
  w.u64(params.values.size());
  for (double v : params.values) w.f64(v);
  return w.take();
}

LstmParams decode_checkpoint(const std::string& bytes) {
  ByteReader r(bytes);
  try {
    if (r.raw(8) != "V2GLSTM1") throw std::invalid_argument("not an LSTM checkpoint");
    LstmShape s;
    s.input_dim = r.u32();
    s.hidden = r.u32();
    s.layers = r.u32();
    s.output_dim = r.u32();
    const std::uint64_t version = r.u64();
    const std::uint64_t count = r.u64();
    if (count != s.param_count()) throw std::invalid_argument("checkpoint count does not match its shape");
    LstmParams p(s, version);
    for (auto& v : p.values) v = r.f64();
    if (!r.done()) throw std::invalid_argument("trailing bytes in checkpoint");
    p.check();
    return p;
  } catch (const std::out_of_range&) {
    throw std::invalid_argument("truncated LSTM checkpoint");
  }
}

void write_checkpoint(const LstmParams& params, std::ostream& out) {
  const std::string bytes = encode_checkpoint(params);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

LstmParams read_checkpoint(std::istream& in) {
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace v2g
