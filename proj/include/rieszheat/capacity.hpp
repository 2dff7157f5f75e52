#ifndef RIESZHEAT_CAPACITY_HPP
#define RIESZHEAT_CAPACITY_HPP

// Riesz capacities of compact sets by energy minimization over discrete
// probability measures.
//
// Kernel of index a: r^{-a} for a > 0; kappa_0(r) = log(e N0 / min(r, N0)) with
// N0 = 2 M sqrt(d) the diameter of [-M, M]^d, so kappa_0 >= 1 on the set; the
// constant 1 for a < 0 (capacity 1 for every nonempty set).

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rieszheat {

/// d - (4 + 2k) / (2 - beta); requires 0 < beta < min(2, k).
double critical_dimension(int d, int k, double beta);

class CompactSet {
 public:
  enum class Kind { Point, Box, Ball, PointCloud };

  static CompactSet point(Eigen::VectorXd p, double bound_m);
  /// Axis-aligned box [lo, hi]; zero-width axes lower the intrinsic dimension.
  static CompactSet box(Eigen::VectorXd lo, Eigen::VectorXd hi, int resolution, double bound_m);
  static CompactSet ball(Eigen::VectorXd center, double radius, int resolution, double bound_m);
  /// Finite set; columns are points.
  static CompactSet cloud(Eigen::MatrixXd points, double bound_m);
  /// Image under x -> a x (resolution kept).
  CompactSet scaled(double a) const;

  Kind kind() const { return kind_; }
  int dim() const { return static_cast<int>(a_.size()); }
  int intrinsic_dimension() const;
  int resolution() const { return resolution_; }
  double bound_m() const { return bound_m_; }
  const Eigen::VectorXd& lo_or_center() const { return a_; }
  const Eigen::VectorXd& hi() const { return b_; }
  double radius() const { return radius_; }
  const Eigen::MatrixXd& points() const { return points_; }
  std::string describe() const;

 private:
  CompactSet() = default;
  void check_bound() const;

  Kind kind_ = Kind::Point;
  Eigen::VectorXd a_;
  Eigen::VectorXd b_;
  double radius_ = 0.0;
  Eigen::MatrixXd points_;
  int resolution_ = 1;
  double bound_m_ = 1.0;
};

/// Discrete measure support: node positions (columns) with the energy of
/// the uniform measure on the cell each node represents.
struct Discretization {
  Eigen::MatrixXd nodes;
  Eigen::VectorXd self_energy;
};

Discretization discretize(const CompactSet& set, double index);

/// Kernel of the given index; `diameter` is N0.
double riesz_kernel(double r, double index, double diameter);

/// Self-energy of the uniform probability measure on an axis box with the
/// given side lengths (zero sides dropped), index in (0, #positive sides).
double box_self_energy(const Eigen::VectorXd& sides, double index);
/// Same for an m-dimensional ball of radius a (index < m), and for index 0
/// with the logarithmic kernel of diameter N0 (pass index = 0).
double ball_self_energy(int m, double a, double index, double diameter = 0.0);

/// sum_{i != j} w_i w_j kappa(|x_i - x_j|) + sum_i w_i^2 self_i. Weights must
/// sum to 1 within 1e-12. Coincident distinct nodes with index >= 0 throw.
double energy(const Eigen::MatrixXd& nodes, const Eigen::VectorXd& weights, double index,
              const Eigen::VectorXd& self_energy, double diameter);

struct CapacityResult {
  double index = 0.0;
  double value = 0.0;
  double energy = 0.0;
  Eigen::MatrixXd nodes;
  Eigen::VectorXd weights;
  long iterations = 0;
  std::string set_description;
};

/// 1 / min energy over the probability simplex: projected gradient with
/// Barzilai-Borwein steps and Armijo backtracking, stopping once the relative
/// energy change is below 1e-8 and the convexity bound 2 min_i (Kw)_i - E
/// lies within 1e-7 of E (or no descent step exists).
/// index < 0 gives exactly 1; points, clouds and sets whose intrinsic
/// dimension does not exceed the index give 0.
CapacityResult capacity(const CompactSet& set, double index);

/// Euclidean projection onto the probability simplex.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

}  // namespace rieszheat

#endif  // RIESZHEAT_CAPACITY_HPP
