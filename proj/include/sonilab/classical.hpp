#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sonilab/matrix.hpp"

namespace sonilab {

enum class ClassicalKind { GNB, LDA, SvmLinear, SvmRbf };

std::string to_string(ClassicalKind k);
/// "gnb" | "lda" | "svm-linear" | "svm-rbf"; throws Error{Usage, "unknown_model"}.
ClassicalKind parse_classical_kind(const std::string& text);

inline constexpr double kGnbVarianceFloor = 1e-9;

struct GnbParams {
  std::array<std::vector<double>, 2> mean;
  std::array<std::vector<double>, 2> variance;
  std::array<double, 2> log_prior{};
};

struct LdaParams {
  std::vector<double> weights;
  double threshold = 0.0;  // predict 1 iff w.x > threshold
};

struct SvmParams {
  bool rbf = false;
  double gamma = 0.0;
  double c = 1.0;
  Matrix support;             // rows are support vectors
  std::vector<double> coef;   // alpha_i * y_i for each support vector, y in {-1, +1}
  double bias = 0.0;
  std::vector<double> alpha;  // all dual variables, training order
  std::vector<int> sign;      // training labels as -1/+1
  double dual_objective = 0.0;  // sum(alpha) - 0.5 alpha' Q alpha
  std::size_t iterations = 0;
  bool converged = true;
};

struct ClassicalModel {
  ClassicalKind kind = ClassicalKind::GNB;
  std::size_t dims = 0;
  GnbParams gnb;
  LdaParams lda;
  SvmParams svm;
};

/// Binary labels are 0 and 1. Every fit throws Error{Data, "single_class"}
/// when either class is absent and Error{Usage, "shape_mismatch"} when X and
/// y disagree.
ClassicalModel fit_gnb(const Matrix& x, std::span<const int> y);

/// `ridge` is added to the diagonal of the pooled within-class scatter.
/// Throws Error{Numeric, "singular_scatter"} or "degenerate_direction".
ClassicalModel fit_lda(const Matrix& x, std::span<const int> y, double ridge = 1e-6);

struct SvmOptions {
  double c = 1.0;
  std::optional<double> gamma;  // default 1 / (dims * mean per-feature variance)
  double tolerance = 1e-3;
  std::size_t max_iterations = 200000;
};

/// SMO on the dual with second-order working-set selection. Hitting the
/// iteration cap returns the current iterate with `converged == false`.
ClassicalModel fit_svm(const Matrix& x, std::span<const int> y, ClassicalKind kind,
                       const SvmOptions& options = {});

/// Real-valued score; positive means class 1. For GNB it is the
/// log-posterior difference.
double decision_value(const ClassicalModel& model, std::span<const double> x);

/// Ties go to label 0.
int predict(const ClassicalModel& model, std::span<const double> x);
std::vector<int> predict_all(const ClassicalModel& model, const Matrix& x);

/// Primal weights of a linear SVM.
std::vector<double> svm_linear_weights(const ClassicalModel& model);

/// Doubles are stored as C99 hex-float strings so they round-trip exactly.
nlohmann::json model_to_json(const ClassicalModel& model);
ClassicalModel model_from_json(const nlohmann::json& j);

std::string hex_double(double v);
double parse_hex_double(const std::string& s);

}  // namespace sonilab
