#include <cmath>
#include <numbers>
#include <string>

#include "sharp/error.h"
#include "sharp/nn/layers.h"

namespace sharp::nn {

void check_finite(const Tensor2& t, std::string_view where) {
  if (!t.allFinite()) throw NumericFault("non-finite value in " + std::string(where));
}

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw StructuralError(what);
}

}  // namespace

Tensor2 linear(const Tensor2& x, const Tensor2& w, const Tensor2& b) {
  require(x.cols() == w.rows(), "linear: x columns must match w rows");
  require(b.rows() == 1 && b.cols() == w.cols(), "linear: bias must be 1 x E");
  Tensor2 y(x.rows(), w.cols());
  y.noalias() = x * w;
  y.rowwise() += b.row(0);
  return y;
}

LinearGrads linear_backward(const Tensor2& x, const Tensor2& w, const Tensor2& dy) {
  LinearGrads g;
  g.dw = Tensor2::Zero(w.rows(), w.cols());
  g.db = Tensor2::Zero(1, w.cols());
  g.dx = linear_backward_acc(x, w, dy, g.dw, g.db);
  return g;
}

Tensor2 linear_backward_acc(const Tensor2& x, const Tensor2& w, const Tensor2& dy, Tensor2& dw,
                            Tensor2& db) {
  require(dy.rows() == x.rows() && dy.cols() == w.cols(), "linear_backward: dy shape");
  dw.noalias() += x.transpose() * dy;
  db.row(0) += dy.colwise().sum();
  Tensor2 dx(x.rows(), x.cols());
  dx.noalias() = dy * w.transpose();
  return dx;
}

Tensor2 layer_norm(const Tensor2& x, const Tensor2& gamma, const Tensor2& beta, double eps,
                   LayerNormCache* cache) {
  const auto d = x.cols();
  require(d >= 2, "layer_norm: needs at least 2 features");
  require(gamma.rows() == 1 && gamma.cols() == d && beta.rows() == 1 && beta.cols() == d,
          "layer_norm: gamma/beta must be 1 x D");
  Tensor2 xhat(x.rows(), d);
  std::vector<double> rstd(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().mean();
    const double s = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (x.row(r).array() - mean) * s;
    rstd[static_cast<std::size_t>(r)] = s;
  }
  Tensor2 y = (xhat.array().rowwise() * gamma.row(0).array()).rowwise() + beta.row(0).array();
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->rstd = std::move(rstd);
  }
  return y;
}

LayerNormGrads layer_norm_backward(const Tensor2& dy, const Tensor2& gamma,
                                   const LayerNormCache& cache) {
  LayerNormGrads g;
  g.dgamma = Tensor2::Zero(1, gamma.cols());
  g.dbeta = Tensor2::Zero(1, gamma.cols());
  g.dx = layer_norm_backward_acc(dy, gamma, cache, g.dgamma, g.dbeta);
  return g;
}

Tensor2 layer_norm_backward_acc(const Tensor2& dy, const Tensor2& gamma,
                                const LayerNormCache& cache, Tensor2& dgamma, Tensor2& dbeta) {
  const Tensor2& xhat = cache.xhat;
  require(dy.rows() == xhat.rows() && dy.cols() == xhat.cols(), "layer_norm_backward: dy shape");
  dgamma.row(0).array() += (dy.array() * xhat.array()).colwise().sum();
  dbeta.row(0) += dy.colwise().sum();
  const Tensor2 dxhat = dy.array().rowwise() * gamma.row(0).array();
  Tensor2 dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const double mean_d = dxhat.row(r).mean();
    const double mean_dx = dxhat.row(r).dot(xhat.row(r)) / static_cast<double>(dy.cols());
    dx.row(r) = (dxhat.row(r).array() - mean_d - xhat.row(r).array() * mean_dx) *
                cache.rstd[static_cast<std::size_t>(r)];
  }
  return dx;
}

Tensor2 softmax_rows(const Tensor2& x) {
  Tensor2 y(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double m = x.row(r).maxCoeff();
    y.row(r) = (x.row(r).array() - m).exp();
    y.row(r) /= y.row(r).sum();
  }
  return y;
}

Tensor2 gelu(const Tensor2& x) {
  return x.unaryExpr([](double v) { return 0.5 * v * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0)); });
}

Tensor2 gelu_backward(const Tensor2& x, const Tensor2& dy) {
  constexpr double kInvSqrt2Pi = 0.3989422804014327;
  Tensor2 d = x.unaryExpr([](double v) {
    const double cdf = 0.5 * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0));
    return cdf + v * kInvSqrt2Pi * std::exp(-0.5 * v * v);
  });
  return d.cwiseProduct(dy);
}

CrossEntropyResult cross_entropy(const Tensor2& logits, std::span<const int> labels) {
  require(static_cast<std::size_t>(logits.rows()) == labels.size(),
          "cross_entropy: one label per row required");
  require(logits.rows() > 0, "cross_entropy: empty batch");
  const auto classes = logits.cols();
  for (int l : labels)
    if (l < 0 || l >= classes)
      throw ValidationError("cross_entropy: label " + std::to_string(l) + " outside [0, " +
                            std::to_string(classes) + ")");
  CrossEntropyResult res;
  res.dlogits = softmax_rows(logits);
  const double inv_b = 1.0 / static_cast<double>(logits.rows());
  double total = 0.0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const int l = labels[static_cast<std::size_t>(r)];
    // log-sum-exp form stays accurate when the true-class probability is ~1.
    const double m = logits.row(r).maxCoeff();
    const double lse = m + std::log((logits.row(r).array() - m).exp().sum());
    total += lse - logits(r, l);
    res.dlogits(r, l) -= 1.0;
  }
  res.dlogits *= inv_b;
  res.loss = total * inv_b;
  return res;
}

}  // namespace sharp::nn
