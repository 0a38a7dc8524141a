#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dlo/bspline.hpp"
#include "dlo/geometry.hpp"

namespace dlo {

/// One ellipse of the chain. center is the curve point at t; sample_mean and
/// scatter are the sufficient statistics of the points currently assigned.
struct RmmComponent {
  std::size_t count = 0;
  double t = 0.0;
  Point2 center;
  SymMat2 sigma = SymMat2::identity();
  Point2 sample_mean;
  SymMat2 scatter;
};

/// Equally weighted ellipses whose centers ride on one spline.
struct ChainedModel {
  BSplineCurve curve;
  std::vector<RmmComponent> components;

  std::size_t size() const { return components.size(); }
  double weight() const { return components.empty() ? 0.0 : 1.0 / static_cast<double>(components.size()); }
  /// Re-evaluates every center from its parameter.
  void refresh_centers();
  ChainedModel with_controls(std::vector<Point2> ctrl) const;
};

/// labels[r] is the component index of point r; counts[k] = number of labels equal to k.
struct Assignment {
  std::vector<std::size_t> labels;
  std::vector<std::size_t> counts;
};

Point2 sample_mean(std::span<const Point2> points);
SymMat2 scatter_matrix(std::span<const Point2> points, const Point2& mean);

/// Adds eps*I when the smallest eigenvalue is below eps = 1e-6 * max(trace, 1).
SymMat2 regularize(const SymMat2& sigma);

/// Raises every eigenvalue below floor to floor, keeping the eigenvectors.
SymMat2 floor_eigenvalues(const SymMat2& sigma, double floor);

/// Smallest covariance eigenvalue the fit allows, mm^2.
inline constexpr double kSigmaFloor = 1e-6;

/// Recomputes count, sample_mean and scatter of every component from the assignment.
void update_statistics(ChainedModel& model, const Assignment& assignment, const PointCloud2& points);

/// Chained log-likelihood from the stored statistics, constants dropped.
/// Empty components contribute nothing.
double log_likelihood(const ChainedModel& model);
/// Same after recomputing the statistics from an assignment.
double log_likelihood(const ChainedModel& model, const Assignment& assignment, const PointCloud2& points);

/// Hard assignment of each point to the component of highest Gaussian
/// density (lowest index on ties); refreshes the statistics, then the
/// parameters t_k by centripetal spacing of the ordered sample means and the
/// centers from the curve. Empty components keep their current center in the ordering.
Assignment e_step(ChainedModel& model, const PointCloud2& points);

/// Weighted least-squares control points for the current t_k, Sigma_k and
/// statistics. Among minimizers, the one closest to the current controls.
/// Throws std::runtime_error if every component is empty.
std::vector<Point2> m_step_controls(const ChainedModel& model);

/// Gradient of the log-likelihood with respect to the stacked controls [b_x; b_y].
Eigen::VectorXd control_gradient(const ChainedModel& model);

/// Covariance update about the current centers, eigenvalues held at or above
/// floor; empty components keep Sigma.
std::vector<SymMat2> m_step_sigma(const ChainedModel& model, const Assignment& assignment, const PointCloud2& points,
                                  double floor = kSigmaFloor);

struct FitOptions {
  int max_iter = 3;
  int inner_iter = 5;
  double outer_tol = 1e-6;   // relative increase that counts as convergence
  double inner_tol = 1e-12;  // relative increase that ends the inner alternation
  int drop_after = 2;        // consecutive empty outer iterations before a component is removed
};

struct FitTrace {
  /// inner_values[o] holds the log-likelihood before the first inner step of
  /// outer iteration o and after every subsequent control and covariance update.
  std::vector<std::vector<double>> inner_values;
  std::vector<double> outer_values;
  int outer_iterations = 0;
  bool converged = false;
};

struct FitResult {
  ChainedModel model;
  Assignment assignment;
  double log_likelihood = 0.0;
  FitTrace trace;
};

/// Classification EM; returns the highest-likelihood state encountered.
FitResult fit(const PointCloud2& points, const ChainedModel& init, const FitOptions& options = {});

}  // namespace dlo
