#include "sonilab/nn/ops.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "sonilab/error.hpp"

namespace sonilab::nn {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

thread_local bool g_kink_enabled = false;
thread_local std::uint64_t g_kink_hash = 1469598103934665603ull;

[[noreturn]] void mismatch(const std::string& op, const Shape& a, const Shape& b) {
  throw_usage("shape_mismatch", op + ": incompatible shapes " + shape_string(a) + " and " + shape_string(b));
}

void require_rank(const std::string& op, const Tensor& t, std::size_t rank) {
  if (t.shape().size() != rank)
    throw_usage("shape_mismatch", op + ": expected rank " + std::to_string(rank) + ", got " +
                                      shape_string(t.shape()));
}

struct ConvGeom {
  std::size_t n, c, h, w, o, kh, kw, groups, cg, og, ho, wo;
  Padding2d pad;
  std::size_t k() const { return cg * kh * kw; }
  std::size_t p() const { return ho * wo; }
};

// Output columns [lo, hi) of a row read inside the input for kernel tap j.
std::pair<std::size_t, std::size_t> valid_range(const ConvGeom& g, std::size_t j) {
  const auto shift = static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(g.pad.left);
  const auto lo = std::clamp<std::ptrdiff_t>(-shift, 0, static_cast<std::ptrdiff_t>(g.wo));
  const auto hi = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(g.w) - shift, lo,
                                             static_cast<std::ptrdiff_t>(g.wo));
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

void im2col(const double* x, const ConvGeom& g, double* cols) {
  const auto P = g.p();
  for (std::size_t c = 0; c < g.cg; ++c)
    for (std::size_t i = 0; i < g.kh; ++i)
      for (std::size_t j = 0; j < g.kw; ++j) {
        double* dst = cols + ((c * g.kh + i) * g.kw + j) * P;
        const double* plane = x + c * g.h * g.w;
        const auto [lo, hi] = valid_range(g, j);
        for (std::size_t oh = 0; oh < g.ho; ++oh) {
          const auto ih = static_cast<std::ptrdiff_t>(oh + i) - static_cast<std::ptrdiff_t>(g.pad.top);
          double* row = dst + oh * g.wo;
          if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(g.h)) {
            std::fill(row, row + g.wo, 0.0);
            continue;
          }
          const double* src = plane + static_cast<std::size_t>(ih) * g.w + j - g.pad.left;
          std::fill(row, row + lo, 0.0);
          std::copy(src + lo, src + hi, row + lo);
          std::fill(row + hi, row + g.wo, 0.0);
        }
      }
}

void col2im(const double* cols, const ConvGeom& g, double* dx) {
  const auto P = g.p();
  for (std::size_t c = 0; c < g.cg; ++c)
    for (std::size_t i = 0; i < g.kh; ++i)
      for (std::size_t j = 0; j < g.kw; ++j) {
        const double* srcrow = cols + ((c * g.kh + i) * g.kw + j) * P;
        double* plane = dx + c * g.h * g.w;
        const auto [lo, hi] = valid_range(g, j);
        for (std::size_t oh = 0; oh < g.ho; ++oh) {
          const auto ih = static_cast<std::ptrdiff_t>(oh + i) - static_cast<std::ptrdiff_t>(g.pad.top);
          if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(g.h)) continue;
          double* dst = plane + static_cast<std::size_t>(ih) * g.w + j - g.pad.left;
          const double* src = srcrow + oh * g.wo;
          for (std::size_t ow = lo; ow < hi; ++ow) dst[ow] += src[ow];
        }
      }
}

}  // namespace

void KinkMonitor::enable(bool on) { g_kink_enabled = on; }
void KinkMonitor::reset() { g_kink_hash = 1469598103934665603ull; }
std::uint64_t KinkMonitor::fingerprint() { return g_kink_hash; }
bool KinkMonitor::enabled() { return g_kink_enabled; }
void KinkMonitor::record(std::uint64_t value) {
  g_kink_hash = (g_kink_hash ^ value) * 1099511628211ull;
}

Padding2d same_padding(std::size_t kh, std::size_t kw) {
  return {(kh - 1) / 2, kh - 1 - (kh - 1) / 2, (kw - 1) / 2, kw - 1 - (kw - 1) / 2};
}

Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, Padding2d pad,
              std::size_t groups) {
  require_rank("conv2d", x, 4);
  require_rank("conv2d", weight, 4);
  ConvGeom g{};
  g.n = x.dim(0), g.c = x.dim(1), g.h = x.dim(2), g.w = x.dim(3);
  g.o = weight.dim(0), g.kh = weight.dim(2), g.kw = weight.dim(3);
  g.groups = groups, g.pad = pad;
  if (groups == 0 || g.c % groups || g.o % groups || weight.dim(1) != g.c / groups)
    mismatch("conv2d", x.shape(), weight.shape());
  if (bias.defined() && bias.shape() != Shape{g.o}) mismatch("conv2d bias", weight.shape(), bias.shape());
  g.cg = g.c / groups, g.og = g.o / groups;
  const auto hp = g.h + pad.top + pad.bottom, wp = g.w + pad.left + pad.right;
  if (hp < g.kh || wp < g.kw) mismatch("conv2d", x.shape(), weight.shape());
  g.ho = hp - g.kh + 1, g.wo = wp - g.kw + 1;

  const auto K = g.k(), P = g.p();
  std::vector<double> out(g.n * g.o * P, 0.0);
  std::vector<double> cols(K * P);
  const double* xd = x.data().data();
  const double* wd = weight.data().data();
  for (std::size_t n = 0; n < g.n; ++n)
    for (std::size_t gr = 0; gr < groups; ++gr) {
      im2col(xd + (n * g.c + gr * g.cg) * g.h * g.w, g, cols.data());
      ConstMapMat W(wd + gr * g.og * K, static_cast<Eigen::Index>(g.og), static_cast<Eigen::Index>(K));
      ConstMapMat C(cols.data(), static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(P));
      MapMat Y(out.data() + (n * g.o + gr * g.og) * P, static_cast<Eigen::Index>(g.og),
               static_cast<Eigen::Index>(P));
      Y.noalias() = W * C;
    }
  if (bias.defined()) {
    const double* bd = bias.data().data();
    for (std::size_t n = 0; n < g.n; ++n)
      for (std::size_t o = 0; o < g.o; ++o) {
        double* y = out.data() + (n * g.o + o) * P;
        for (std::size_t p = 0; p < P; ++p) y[p] += bd[o];
      }
  }

  return make_result({g.n, g.o, g.ho, g.wo}, std::move(out), {x, weight, bias},
                     [x, weight, bias, g](Node& self) mutable {
    const auto K = g.k(), P = g.p();
    const double* dy = self.grad.data();
    std::vector<double> cols(K * P), dcols(K * P);
    const bool need_x = x.requires_grad(), need_w = weight.requires_grad();
    double* dx = need_x ? x.mutable_grad().data() : nullptr;
    double* dw = need_w ? weight.mutable_grad().data() : nullptr;
    const double* xd = x.data().data();
    const double* wd = weight.data().data();
    for (std::size_t n = 0; n < g.n; ++n)
      for (std::size_t gr = 0; gr < g.groups; ++gr) {
        ConstMapMat DY(dy + (n * g.o + gr * g.og) * P, static_cast<Eigen::Index>(g.og),
                       static_cast<Eigen::Index>(P));
        if (need_w) {
          im2col(xd + (n * g.c + gr * g.cg) * g.h * g.w, g, cols.data());
          ConstMapMat C(cols.data(), static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(P));
          MapMat DW(dw + gr * g.og * K, static_cast<Eigen::Index>(g.og), static_cast<Eigen::Index>(K));
          DW.noalias() += DY * C.transpose();
        }
        if (need_x) {
          ConstMapMat W(wd + gr * g.og * K, static_cast<Eigen::Index>(g.og), static_cast<Eigen::Index>(K));
          MapMat DC(dcols.data(), static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(P));
          DC.noalias() = W.transpose() * DY;
          col2im(dcols.data(), g, dx + (n * g.c + gr * g.cg) * g.h * g.w);
        }
      }
    if (bias.defined() && bias.requires_grad()) {
      auto db = bias.mutable_grad();
      for (std::size_t n = 0; n < g.n; ++n)
        for (std::size_t o = 0; o < g.o; ++o) {
          const double* row = dy + (n * g.o + o) * P;
          double s = 0.0;
          for (std::size_t p = 0; p < P; ++p) s += row[p];
          db[o] += s;
        }
    }
  });
}

Tensor conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_rank("conv1d", x, 3);
  require_rank("conv1d", weight, 3);
  const auto k = weight.dim(2);
  auto x4 = reshape(x, {x.dim(0), x.dim(1), 1, x.dim(2)});
  auto w4 = reshape(weight, {weight.dim(0), weight.dim(1), 1, k});
  auto y = conv2d(x4, w4, bias, same_padding(1, k));
  return reshape(y, {y.dim(0), y.dim(1), y.dim(3)});
}

namespace {

Tensor pool2d(const Tensor& x, std::size_t kh, std::size_t kw, bool is_max) {
  require_rank(is_max ? "maxpool2d" : "avgpool2d", x, 4);
  if (kh == 0 || kw == 0) throw_usage("bad_pool", "pool kernel must be positive");
  const auto N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const auto Ho = H / kh, Wo = W / kw;
  if (Ho == 0 || Wo == 0)
    throw_usage("shape_mismatch", std::string(is_max ? "maxpool2d" : "avgpool2d") + ": input " +
                                      shape_string(x.shape()) + " too small for kernel " +
                                      shape_string({kh, kw}));
  std::vector<double> out(N * C * Ho * Wo);
  std::vector<std::size_t> arg(is_max ? out.size() : 0);
  const double* xd = x.data().data();
  const double inv = 1.0 / static_cast<double>(kh * kw);
  for (std::size_t nc = 0; nc < N * C; ++nc) {
    const double* plane = xd + nc * H * W;
    for (std::size_t oh = 0; oh < Ho; ++oh)
      for (std::size_t ow = 0; ow < Wo; ++ow) {
        const auto oi = (nc * Ho + oh) * Wo + ow;
        if (is_max) {
          double best = -std::numeric_limits<double>::infinity();
          std::size_t at = 0;
          for (std::size_t i = 0; i < kh; ++i)
            for (std::size_t j = 0; j < kw; ++j) {
              const auto idx = (oh * kh + i) * W + ow * kw + j;
              if (plane[idx] > best) best = plane[idx], at = idx;
            }
          out[oi] = best;
          arg[oi] = nc * H * W + at;
          if (KinkMonitor::enabled()) KinkMonitor::record(at);
        } else {
          double s = 0.0;
          for (std::size_t i = 0; i < kh; ++i)
            for (std::size_t j = 0; j < kw; ++j) s += plane[(oh * kh + i) * W + ow * kw + j];
          out[oi] = s * inv;
        }
      }
  }
  return make_result({N, C, Ho, Wo}, std::move(out), {x},
                     [x, arg = std::move(arg), is_max, kh, kw, H, W, Ho, Wo, inv](Node& self) mutable {
    auto dx = x.mutable_grad();
    if (is_max) {
      for (std::size_t i = 0; i < arg.size(); ++i) dx[arg[i]] += self.grad[i];
      return;
    }
    const auto NC = self.grad.size() / (Ho * Wo);
    for (std::size_t nc = 0; nc < NC; ++nc)
      for (std::size_t oh = 0; oh < Ho; ++oh)
        for (std::size_t ow = 0; ow < Wo; ++ow) {
          const double g = self.grad[(nc * Ho + oh) * Wo + ow] * inv;
          for (std::size_t i = 0; i < kh; ++i)
            for (std::size_t j = 0; j < kw; ++j) dx[nc * H * W + (oh * kh + i) * W + ow * kw + j] += g;
        }
  });
}

}  // namespace

Tensor maxpool2d(const Tensor& x, std::size_t kh, std::size_t kw) { return pool2d(x, kh, kw, true); }
Tensor avgpool2d(const Tensor& x, std::size_t kh, std::size_t kw) { return pool2d(x, kh, kw, false); }

Tensor maxpool1d(const Tensor& x, std::size_t k) {
  require_rank("maxpool1d", x, 3);
  auto y = maxpool2d(reshape(x, {x.dim(0), x.dim(1), 1, x.dim(2)}), 1, k);
  return reshape(y, {y.dim(0), y.dim(1), y.dim(3)});
}

Tensor dense(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_rank("dense", x, 2);
  require_rank("dense", weight, 2);
  const auto N = x.dim(0), in = x.dim(1), out = weight.dim(0);
  if (weight.dim(1) != in) mismatch("dense", x.shape(), weight.shape());
  if (bias.defined() && bias.shape() != Shape{out}) mismatch("dense bias", weight.shape(), bias.shape());
  std::vector<double> y(N * out);
  const auto n_ = static_cast<Eigen::Index>(N), in_ = static_cast<Eigen::Index>(in),
             out_ = static_cast<Eigen::Index>(out);
  {
    ConstMapMat X(x.data().data(), n_, in_);
    ConstMapMat Wm(weight.data().data(), out_, in_);
    MapMat Y(y.data(), n_, out_);
    Y.noalias() = X * Wm.transpose();
    if (bias.defined()) {
      const auto b = bias.data();
      for (Eigen::Index r = 0; r < n_; ++r)
        for (Eigen::Index c = 0; c < out_; ++c) Y(r, c) += b[static_cast<std::size_t>(c)];
    }
  }
  return make_result({N, out}, std::move(y), {x, weight, bias}, [x, weight, bias, n_, in_, out_](Node& self) mutable {
    ConstMapMat DY(self.grad.data(), n_, out_);
    if (x.requires_grad()) {
      MapMat DX(x.mutable_grad().data(), n_, in_);
      ConstMapMat Wm(weight.data().data(), out_, in_);
      DX.noalias() += DY * Wm;
    }
    if (weight.requires_grad()) {
      MapMat DW(weight.mutable_grad().data(), out_, in_);
      ConstMapMat X(x.data().data(), n_, in_);
      DW.noalias() += DY.transpose() * X;
    }
    if (bias.defined() && bias.requires_grad()) {
      auto db = bias.mutable_grad();
      for (Eigen::Index c = 0; c < out_; ++c) {
        double acc = 0.0;
        for (Eigen::Index r = 0; r < n_; ++r) acc += DY(r, c);
        db[static_cast<std::size_t>(c)] += acc;
      }
    }
  });
}

Tensor relu(const Tensor& x) {
  std::vector<double> y(x.size());
  const auto xd = x.data();
  const bool monitor = KinkMonitor::enabled();
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = xd[i] > 0.0 ? xd[i] : 0.0;
    if (monitor) KinkMonitor::record(xd[i] > 0.0);
  }
  return make_result(x.shape(), std::move(y), {x}, [x](Node& self) mutable {
    auto dx = x.mutable_grad();
    const auto xd = x.data();
    for (std::size_t i = 0; i < dx.size(); ++i)
      if (xd[i] > 0.0) dx[i] += self.grad[i];
  });
}

Tensor sigmoid(const Tensor& x) {
  std::vector<double> y(x.size());
  const auto xd = x.data();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = 1.0 / (1.0 + std::exp(-xd[i]));
  auto out = make_result(x.shape(), y, {x}, [x, y](Node& self) mutable {
    auto dx = x.mutable_grad();
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += self.grad[i] * y[i] * (1.0 - y[i]);
  });
  return out;
}

Tensor batchnorm(const Tensor& x, const Tensor& gamma, const Tensor& beta, BatchNormState& state,
                 bool training) {
  if (x.shape().size() < 2) throw_usage("shape_mismatch", "batchnorm: need (N,F,...) input, got " + shape_string(x.shape()));
  const auto N = x.dim(0), F = x.dim(1);
  const auto inner = x.size() / (N * F);
  if (gamma.shape() != Shape{F}) mismatch("batchnorm gamma", x.shape(), gamma.shape());
  if (beta.shape() != Shape{F}) mismatch("batchnorm beta", x.shape(), beta.shape());
  if (state.running_mean.size() != F) state.running_mean.assign(F, 0.0);
  if (state.running_var.size() != F) state.running_var.assign(F, 1.0);
  const double m = static_cast<double>(N * inner);
  if (training && N * inner < 2) throw_usage("batch_too_small", "batchnorm in training mode needs at least 2 values per feature");

  const auto xd = x.data();
  const auto gd = gamma.data(), bd = beta.data();
  std::vector<double> mu(F), inv_std(F);
  for (std::size_t f = 0; f < F; ++f) {
    if (training) {
      double s = 0.0;
      for (std::size_t n = 0; n < N; ++n)
        for (std::size_t i = 0; i < inner; ++i) s += xd[(n * F + f) * inner + i];
      const double mean = s / m;
      double v = 0.0;
      for (std::size_t n = 0; n < N; ++n)
        for (std::size_t i = 0; i < inner; ++i) {
          const double d = xd[(n * F + f) * inner + i] - mean;
          v += d * d;
        }
      const double var = v / m;
      mu[f] = mean;
      inv_std[f] = 1.0 / std::sqrt(var + state.eps);
      state.running_mean[f] = (1.0 - state.momentum) * state.running_mean[f] + state.momentum * mean;
      state.running_var[f] = (1.0 - state.momentum) * state.running_var[f] + state.momentum * var * m / (m - 1.0);
    } else {
      mu[f] = state.running_mean[f];
      inv_std[f] = 1.0 / std::sqrt(state.running_var[f] + state.eps);
    }
  }
  std::vector<double> xhat(x.size()), y(x.size());
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t f = 0; f < F; ++f)
      for (std::size_t i = 0; i < inner; ++i) {
        const auto idx = (n * F + f) * inner + i;
        xhat[idx] = (xd[idx] - mu[f]) * inv_std[f];
        y[idx] = gd[f] * xhat[idx] + bd[f];
      }
  return make_result(x.shape(), std::move(y), {x, gamma, beta},
                     [x, gamma, beta, xhat = std::move(xhat), inv_std, training, N, F, inner, m](Node& self) mutable {
    const auto& dy = self.grad;
    const auto gd = gamma.data();
    std::vector<double> sum_dy(F, 0.0), sum_dy_xhat(F, 0.0);
    for (std::size_t n = 0; n < N; ++n)
      for (std::size_t f = 0; f < F; ++f)
        for (std::size_t i = 0; i < inner; ++i) {
          const auto idx = (n * F + f) * inner + i;
          sum_dy[f] += dy[idx];
          sum_dy_xhat[f] += dy[idx] * xhat[idx];
        }
    if (gamma.requires_grad()) {
      auto dg = gamma.mutable_grad();
      for (std::size_t f = 0; f < F; ++f) dg[f] += sum_dy_xhat[f];
    }
    if (beta.requires_grad()) {
      auto db = beta.mutable_grad();
      for (std::size_t f = 0; f < F; ++f) db[f] += sum_dy[f];
    }
    if (!x.requires_grad()) return;
    auto dx = x.mutable_grad();
    for (std::size_t n = 0; n < N; ++n)
      for (std::size_t f = 0; f < F; ++f)
        for (std::size_t i = 0; i < inner; ++i) {
          const auto idx = (n * F + f) * inner + i;
          if (training)
            dx[idx] += gd[f] * inv_std[f] / m * (m * dy[idx] - sum_dy[f] - xhat[idx] * sum_dy_xhat[f]);
          else
            dx[idx] += gd[f] * inv_std[f] * dy[idx];
        }
  });
}

Tensor dropout(const Tensor& x, double p, bool training, Rng& rng) {
  if (p < 0.0 || p >= 1.0) throw_usage("bad_dropout", "dropout probability must be in [0,1)");
  if (!training || p == 0.0) return x;
  const double scale = 1.0 / (1.0 - p);
  std::vector<double> mask(x.size());
  for (auto& v : mask) v = rng.uniform() < p ? 0.0 : scale;
  std::vector<double> y(x.size());
  const auto xd = x.data();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = xd[i] * mask[i];
  return make_result(x.shape(), std::move(y), {x}, [x, mask = std::move(mask)](Node& self) mutable {
    auto dx = x.mutable_grad();
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += self.grad[i] * mask[i];
  });
}

Tensor reshape(const Tensor& x, const Shape& shape) {
  if (numel(shape) != x.size()) mismatch("reshape", x.shape(), shape);
  return make_result(shape, std::vector<double>(x.data().begin(), x.data().end()), {x}, [x](Node& self) mutable {
    auto dx = x.mutable_grad();
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += self.grad[i];
  });
}

Tensor flatten(const Tensor& x) {
  if (x.shape().empty()) throw_usage("shape_mismatch", "flatten: scalar input");
  return reshape(x, {x.dim(0), x.size() / x.dim(0)});
}

Tensor concat(const Tensor& a, const Tensor& b) {
  require_rank("concat", a, 2);
  require_rank("concat", b, 2);
  if (a.dim(0) != b.dim(0)) mismatch("concat", a.shape(), b.shape());
  const auto N = a.dim(0), da = a.dim(1), db = b.dim(1);
  std::vector<double> y(N * (da + db));
  for (std::size_t n = 0; n < N; ++n) {
    std::copy_n(a.data().data() + n * da, da, y.data() + n * (da + db));
    std::copy_n(b.data().data() + n * db, db, y.data() + n * (da + db) + da);
  }
  return make_result({N, da + db}, std::move(y), {a, b}, [a, b, N, da, db](Node& self) mutable {
    if (a.requires_grad()) {
      auto ga = a.mutable_grad();
      for (std::size_t n = 0; n < N; ++n)
        for (std::size_t j = 0; j < da; ++j) ga[n * da + j] += self.grad[n * (da + db) + j];
    }
    if (b.requires_grad()) {
      auto gb = b.mutable_grad();
      for (std::size_t n = 0; n < N; ++n)
        for (std::size_t j = 0; j < db; ++j) gb[n * db + j] += self.grad[n * (da + db) + da + j];
    }
  });
}

Tensor gather_rows(const Tensor& x, const std::vector<std::size_t>& rows) {
  if (x.shape().empty()) throw_usage("shape_mismatch", "gather_rows: scalar input");
  const auto N = x.dim(0), D = x.size() / N;
  Shape shape = x.shape();
  shape[0] = rows.size();
  std::vector<double> y(rows.size() * D);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= N) throw_usage("index_range", "gather_rows: row " + std::to_string(rows[r]) + " out of range");
    std::copy_n(x.data().data() + rows[r] * D, D, y.data() + r * D);
  }
  return make_result(shape, std::move(y), {x}, [x, rows, D](Node& self) mutable {
    auto dx = x.mutable_grad();
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t j = 0; j < D; ++j) dx[rows[r] * D + j] += self.grad[r * D + j];
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) mismatch("add", a.shape(), b.shape());
  std::vector<double> y(a.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.data()[i] + b.data()[i];
  return make_result(a.shape(), std::move(y), {a, b}, [a, b](Node& self) mutable {
    for (auto* t : {&a, &b})
      if (t->requires_grad()) {
        auto g = t->mutable_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
      }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) mismatch("mul", a.shape(), b.shape());
  std::vector<double> y(a.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.data()[i] * b.data()[i];
  return make_result(a.shape(), std::move(y), {a, b}, [a, b](Node& self) mutable {
    if (a.requires_grad()) {
      auto g = a.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * b.data()[i];
    }
    if (b.requires_grad()) {
      auto g = b.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * a.data()[i];
    }
  });
}

Tensor sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.data()) s += v;
  return make_result({1}, {s}, {x}, [x](Node& self) mutable {
    auto g = x.mutable_grad();
    for (auto& v : g) v += self.grad[0];
  });
}

Tensor mean(const Tensor& x) {
  const double n = static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x.data()) s += v;
  return make_result({1}, {s / n}, {x}, [x, n](Node& self) mutable {
    auto g = x.mutable_grad();
    for (auto& v : g) v += self.grad[0] / n;
  });
}

std::vector<double> softmax(const Tensor& logits) {
  require_rank("softmax", logits, 2);
  const auto N = logits.dim(0), K = logits.dim(1);
  std::vector<double> p(N * K);
  const auto z = logits.data();
  for (std::size_t n = 0; n < N; ++n) {
    const double mx = *std::max_element(z.begin() + static_cast<std::ptrdiff_t>(n * K),
                                        z.begin() + static_cast<std::ptrdiff_t>((n + 1) * K));
    double s = 0.0;
    for (std::size_t k = 0; k < K; ++k) s += p[n * K + k] = std::exp(z[n * K + k] - mx);
    for (std::size_t k = 0; k < K; ++k) p[n * K + k] /= s;
  }
  return p;
}

Tensor softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
  require_rank("softmax_cross_entropy", logits, 2);
  const auto N = logits.dim(0), K = logits.dim(1);
  if (labels.size() != N) mismatch("softmax_cross_entropy", logits.shape(), {labels.size()});
  auto p = softmax(logits);
  double loss = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    if (labels[n] < 0 || static_cast<std::size_t>(labels[n]) >= K)
      throw_usage("bad_label", "label " + std::to_string(labels[n]) + " outside [0," + std::to_string(K) + ")");
    const auto z = logits.data().subspan(n * K, K);
    const double mx = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double v : z) s += std::exp(v - mx);
    loss += mx + std::log(s) - z[static_cast<std::size_t>(labels[n])];
  }
  loss /= static_cast<double>(N);
  return make_result({1}, {loss}, {logits}, [logits, labels, p = std::move(p), N, K](Node& self) mutable {
    auto g = logits.mutable_grad();
    const double s = self.grad[0] / static_cast<double>(N);
    for (std::size_t n = 0; n < N; ++n)
      for (std::size_t k = 0; k < K; ++k)
        g[n * K + k] += s * (p[n * K + k] - (static_cast<std::size_t>(labels[n]) == k ? 1.0 : 0.0));
  });
}

Tensor l2_distance(const Tensor& a, const Tensor& b) {
  require_rank("l2_distance", a, 2);
  if (a.shape() != b.shape()) mismatch("l2_distance", a.shape(), b.shape());
  const auto N = a.dim(0), D = a.dim(1);
  std::vector<double> d(N);
  for (std::size_t n = 0; n < N; ++n) {
    double s = 0.0;
    for (std::size_t j = 0; j < D; ++j) {
      const double diff = a.data()[n * D + j] - b.data()[n * D + j];
      s += diff * diff;
    }
    d[n] = std::sqrt(s);
  }
  return make_result({N}, d, {a, b}, [a, b, d, N, D](Node& self) mutable {
    // The norm has no gradient at zero distance; use the zero subgradient.
    for (std::size_t n = 0; n < N; ++n) {
      if (d[n] == 0.0) continue;
      const double s = self.grad[n] / d[n];
      for (std::size_t j = 0; j < D; ++j) {
        const double diff = a.data()[n * D + j] - b.data()[n * D + j];
        if (a.requires_grad()) a.mutable_grad()[n * D + j] += s * diff;
        if (b.requires_grad()) b.mutable_grad()[n * D + j] -= s * diff;
      }
    }
  });
}

Tensor contrastive_loss(const Tensor& d, const std::vector<int>& y, double margin) {
  require_rank("contrastive_loss", d, 1);
  const auto N = d.dim(0);
  if (y.size() != N) mismatch("contrastive_loss", d.shape(), {y.size()});
  double loss = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    const double dn = d.data()[n];
    const double hinge = std::max(0.0, margin - dn);
    loss += y[n] ? dn * dn : hinge * hinge;
  }
  loss /= static_cast<double>(N);
  return make_result({1}, {loss}, {d}, [d, y, margin, N](Node& self) mutable {
    auto g = d.mutable_grad();
    const double s = self.grad[0] / static_cast<double>(N);
    for (std::size_t n = 0; n < N; ++n) {
      const double dn = d.data()[n];
      g[n] += s * (y[n] ? 2.0 * dn : -2.0 * std::max(0.0, margin - dn));
    }
  });
}

}  // namespace sonilab::nn
