#include "sonilab/classical.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numbers>

#include "sonilab/error.hpp"

namespace sonilab {

namespace {

void check_training_set(const Matrix& x, std::span<const int> y) {
  if (x.rows() != y.size()) throw_usage("shape_mismatch", "X rows and label count differ");
  bool has0 = false, has1 = false;
  for (int label : y) {
    if (label != 0 && label != 1) throw_usage("bad_label", "labels must be 0 or 1");
    has0 = has0 || label == 0;
    has1 = has1 || label == 1;
  }
  if (!has0 || !has1) throw_data("single_class", "training set must contain both classes");
}

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double kernel(const SvmParams& p, std::span<const double> a, std::span<const double> b) {
  return p.rbf ? std::exp(-p.gamma * sq_dist(a, b)) : dot(a, b);
}

double gnb_log_posterior(const GnbParams& p, int cls, std::span<const double> x) {
  double lp = p.log_prior[cls];
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double var = p.variance[cls][j];
    const double d = x[j] - p.mean[cls][j];
    lp -= 0.5 * std::log(2.0 * std::numbers::pi * var) + d * d / (2.0 * var);
  }
  return lp;
}

}  // namespace

std::string to_string(ClassicalKind k) {
  switch (k) {
    case ClassicalKind::GNB: return "gnb";
    case ClassicalKind::LDA: return "lda";
    case ClassicalKind::SvmLinear: return "svm-linear";
    case ClassicalKind::SvmRbf: return "svm-rbf";
  }
  return "?";
}

ClassicalKind parse_classical_kind(const std::string& text) {
  for (auto k : {ClassicalKind::GNB, ClassicalKind::LDA, ClassicalKind::SvmLinear, ClassicalKind::SvmRbf})
    if (to_string(k) == text) return k;
  throw_usage("unknown_model", "unknown classical model '" + text + "'");
}

ClassicalModel fit_gnb(const Matrix& x, std::span<const int> y) {
  check_training_set(x, y);
  const std::size_t d = x.cols();
  ClassicalModel m;
  m.kind = ClassicalKind::GNB;
  m.dims = d;
  std::array<double, 2> count{0, 0};
  for (int c = 0; c < 2; ++c) {
    m.gnb.mean[c].assign(d, 0.0);
    m.gnb.variance[c].assign(d, 0.0);
  }
  for (std::size_t i = 0; i < x.rows(); ++i) {
    count[y[i]] += 1;
    for (std::size_t j = 0; j < d; ++j) m.gnb.mean[y[i]][j] += x(i, j);
  }
  for (int c = 0; c < 2; ++c)
    for (double& v : m.gnb.mean[c]) v /= count[c];
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double dev = x(i, j) - m.gnb.mean[y[i]][j];
      m.gnb.variance[y[i]][j] += dev * dev;
    }
  const double n = count[0] + count[1];
  for (int c = 0; c < 2; ++c) {
    for (double& v : m.gnb.variance[c]) v = std::max(v / count[c], kGnbVarianceFloor);
    m.gnb.log_prior[c] = std::log(count[c] / n);
  }
  return m;
}

ClassicalModel fit_lda(const Matrix& x, std::span<const int> y, double ridge) {
  check_training_set(x, y);
  const std::size_t d = x.cols();
  const Eigen::Index de = static_cast<Eigen::Index>(d);
  std::array<Eigen::VectorXd, 2> mu{Eigen::VectorXd::Zero(de), Eigen::VectorXd::Zero(de)};
  std::array<double, 2> count{0, 0};
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> xm(
      x.data().data(), static_cast<Eigen::Index>(x.rows()), de);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    mu[y[i]] += xm.row(static_cast<Eigen::Index>(i)).transpose();
    count[y[i]] += 1;
  }
  mu[0] /= count[0];
  mu[1] /= count[1];
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(de, de);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const Eigen::VectorXd dev = xm.row(static_cast<Eigen::Index>(i)).transpose() - mu[y[i]];
    scatter.noalias() += dev * dev.transpose();
  }
  const double dof = std::max(1.0, count[0] + count[1] - 2.0);
  scatter /= dof;
  scatter.diagonal().array() += ridge;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(scatter);
  if (!lu.isInvertible()) throw_numeric("singular_scatter", "within-class scatter is singular");
  const Eigen::VectorXd w = lu.solve(mu[1] - mu[0]);
  if (!w.allFinite() || w.norm() <= 1e-12 * std::max(1.0, mu[1].norm() + mu[0].norm()))
    throw_numeric("degenerate_direction", "class means coincide; no discriminant direction");

  ClassicalModel m;
  m.kind = ClassicalKind::LDA;
  m.dims = d;
  m.lda.weights.assign(w.data(), w.data() + d);
  m.lda.threshold = 0.5 * w.dot(mu[0] + mu[1]) - std::log(count[1] / count[0]);
  return m;
}

ClassicalModel fit_svm(const Matrix& x, std::span<const int> y, ClassicalKind kind,
                       const SvmOptions& options) {
  check_training_set(x, y);
  if (kind != ClassicalKind::SvmLinear && kind != ClassicalKind::SvmRbf)
    throw_usage("unknown_model", "fit_svm requires an SVM kind");
  if (!(options.c > 0.0)) throw_usage("bad_hyperparameter", "C must be positive");
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();

  ClassicalModel m;
  m.kind = kind;
  m.dims = d;
  SvmParams& p = m.svm;
  p.rbf = kind == ClassicalKind::SvmRbf;
  p.c = options.c;
  if (options.gamma) {
    p.gamma = *options.gamma;
  } else {
    double mean_var = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      double mean = 0.0, sq = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += x(i, j);
      mean /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) sq += (x(i, j) - mean) * (x(i, j) - mean);
      mean_var += sq / static_cast<double>(n);
    }
    mean_var /= static_cast<double>(d);
    p.gamma = mean_var > 0.0 ? 1.0 / (static_cast<double>(d) * mean_var) : 1.0;
  }

  p.sign.resize(n);
  for (std::size_t i = 0; i < n; ++i) p.sign[i] = y[i] == 1 ? 1 : -1;
  std::vector<double> k(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) k[i * n + j] = k[j * n + i] = kernel(p, x.row(i), x.row(j));

  const double c = options.c;
  constexpr double tau = 1e-12;
  std::vector<double> alpha(n, 0.0), grad(n, -1.0);
  const auto& s = p.sign;
  auto q = [&](std::size_t i, std::size_t j) { return s[i] * s[j] * k[i * n + j]; };

  std::size_t iter = 0;
  bool converged = false;
  for (; iter < options.max_iterations; ++iter) {
    // Maximal violating index i, then j by second-order gain.
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (s[t] == 1 ? alpha[t] < c : alpha[t] > 0) {
        const double v = -s[t] * grad[t];
        if (v >= gmax) {
          gmax = v;
          i = t;
        }
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    std::size_t j = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (!(s[t] == 1 ? alpha[t] > 0 : alpha[t] < c)) continue;
      const double v = s[t] * grad[t];
      gmax2 = std::max(gmax2, v);
      const double diff = gmax + v;
      if (i < n && diff > 0) {
        double quad = k[i * n + i] + k[t * n + t] - 2.0 * s[i] * s[t] * k[i * n + t];
        if (quad <= 0) quad = tau;
        const double obj = -diff * diff / quad;
        if (obj <= best) {
          best = obj;
          j = t;
        }
      }
    }
    if (i == n || j == n || gmax + gmax2 < options.tolerance) {
      converged = true;
      break;
    }

    const double old_i = alpha[i], old_j = alpha[j];
    if (s[i] != s[j]) {
      double quad = k[i * n + i] + k[j * n + j] + 2.0 * q(i, j);
      if (quad <= 0) quad = tau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = diff; }
      } else {
        if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = -diff; }
      }
      if (diff > 0) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = c - diff; }
      } else {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = c + diff; }
      }
    } else {
      double quad = k[i * n + i] + k[j * n + j] - 2.0 * q(i, j);
      if (quad <= 0) quad = tau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = sum - c; }
      } else {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = sum; }
      }
      if (sum > c) {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = sum - c; }
      } else {
        if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = sum; }
      }
    }
    const double di = alpha[i] - old_i, dj = alpha[j] - old_j;
    for (std::size_t t = 0; t < n; ++t) grad[t] += q(i, t) * di + q(j, t) * dj;
  }
  p.iterations = iter;
  p.converged = converged;

  // Offset from free vectors, or the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity(), lb = -ub, free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = s[t] * grad[t];
    if (alpha[t] >= c) {
      if (s[t] == -1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0) {
      if (s[t] == 1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : 0.5 * (ub + lb);
  p.bias = -rho;

  double objective = 0.0;
  for (std::size_t t = 0; t < n; ++t) objective += alpha[t] - 0.5 * alpha[t] * (grad[t] + 1.0);
  p.dual_objective = objective;
  p.alpha = alpha;

  std::vector<double> support_values;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] <= 0) continue;
    p.coef.push_back(alpha[t] * s[t]);
    support_values.insert(support_values.end(), x.row(t).begin(), x.row(t).end());
  }
  p.support = Matrix(p.coef.size(), d, std::move(support_values));
  return m;
}

double decision_value(const ClassicalModel& m, std::span<const double> x) {
  if (x.size() != m.dims) throw_usage("shape_mismatch", "feature width does not match the model");
  switch (m.kind) {
    case ClassicalKind::GNB:
      return gnb_log_posterior(m.gnb, 1, x) - gnb_log_posterior(m.gnb, 0, x);
    case ClassicalKind::LDA:
      return dot(m.lda.weights, x) - m.lda.threshold;
    case ClassicalKind::SvmLinear:
    case ClassicalKind::SvmRbf: {
      double f = m.svm.bias;
      for (std::size_t i = 0; i < m.svm.coef.size(); ++i) f += m.svm.coef[i] * kernel(m.svm, m.svm.support.row(i), x);
      return f;
    }
  }
  return 0.0;
}

int predict(const ClassicalModel& m, std::span<const double> x) { return decision_value(m, x) > 0.0 ? 1 : 0; }

std::vector<int> predict_all(const ClassicalModel& m, const Matrix& x) {
  std::vector<int> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict(m, x.row(i));
  return out;
}

std::vector<double> svm_linear_weights(const ClassicalModel& m) {
  if (m.kind != ClassicalKind::SvmLinear) throw_usage("unknown_model", "primal weights need a linear SVM");
  std::vector<double> w(m.dims, 0.0);
  for (std::size_t i = 0; i < m.svm.coef.size(); ++i)
    for (std::size_t j = 0; j < m.dims; ++j) w[j] += m.svm.coef[i] * m.svm.support(i, j);
  return w;
}

std::string hex_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

double parse_hex_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || s.empty())
    throw_data("malformed_value", "bad hex-float '" + s + "'");
  return v;
}

namespace {

nlohmann::json hex_array(std::span<const double> values) {
  nlohmann::json a = nlohmann::json::array();
  for (double v : values) a.push_back(hex_double(v));
  return a;
}

std::vector<double> from_hex_array(const nlohmann::json& a) {
  std::vector<double> out;
  for (const auto& v : a) out.push_back(parse_hex_double(v.get<std::string>()));
  return out;
}

}  // namespace

nlohmann::json model_to_json(const ClassicalModel& m) {
  nlohmann::json j{{"format", "sonilab-classical"}, {"version", 1}, {"kind", to_string(m.kind)}, {"dims", m.dims}};
  switch (m.kind) {
    case ClassicalKind::GNB:
      j["mean"] = {hex_array(m.gnb.mean[0]), hex_array(m.gnb.mean[1])};
      j["variance"] = {hex_array(m.gnb.variance[0]), hex_array(m.gnb.variance[1])};
      j["log_prior"] = hex_array(m.gnb.log_prior);
      break;
    case ClassicalKind::LDA:
      j["weights"] = hex_array(m.lda.weights);
      j["threshold"] = hex_double(m.lda.threshold);
      break;
    case ClassicalKind::SvmLinear:
    case ClassicalKind::SvmRbf:
      j["gamma"] = hex_double(m.svm.gamma);
      j["c"] = hex_double(m.svm.c);
      j["bias"] = hex_double(m.svm.bias);
      j["coef"] = hex_array(m.svm.coef);
      j["support"] = hex_array(m.svm.support.data());
      j["converged"] = m.svm.converged;
      break;
  }
  return j;
}

ClassicalModel model_from_json(const nlohmann::json& j) {
  try {
    ClassicalModel m;
    m.kind = parse_classical_kind(j.at("kind").get<std::string>());
    m.dims = j.at("dims").get<std::size_t>();
    switch (m.kind) {
      case ClassicalKind::GNB:
        for (int c = 0; c < 2; ++c) {
          m.gnb.mean[c] = from_hex_array(j.at("mean")[c]);
          m.gnb.variance[c] = from_hex_array(j.at("variance")[c]);
        }
        {
          const auto lp = from_hex_array(j.at("log_prior"));
          m.gnb.log_prior = {lp.at(0), lp.at(1)};
        }
        break;
      case ClassicalKind::LDA:
        m.lda.weights = from_hex_array(j.at("weights"));
        m.lda.threshold = parse_hex_double(j.at("threshold").get<std::string>());
        break;
      case ClassicalKind::SvmLinear:
      case ClassicalKind::SvmRbf:
        m.svm.rbf = m.kind == ClassicalKind::SvmRbf;
        m.svm.gamma = parse_hex_double(j.at("gamma").get<std::string>());
        m.svm.c = parse_hex_double(j.at("c").get<std::string>());
        m.svm.bias = parse_hex_double(j.at("bias").get<std::string>());
        m.svm.coef = from_hex_array(j.at("coef"));
        m.svm.support = Matrix(m.svm.coef.size(), m.dims, from_hex_array(j.at("support")));
        m.svm.converged = j.at("converged").get<bool>();
        break;
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw_data("malformed_model", std::string("bad classical model JSON: ") + e.what());
  }
}

}  // namespace sonilab
