#pragma once

// Collision models on a PhaseGrid: equilibria, the linearised operator
// L = K - Lambda as a dense velocity matrix, projections, and the quadratic
// remainder of the semi-classical model.
//
// All three operators act pointwise in x, so they are stored as n_v x n_v
// matrices and applied row by row. "Self-adjoint" always means with respect
// to the discrete pairing sum_j w_j a_j b_j.
//
// The Maxwellian used inside the models is renormalised so that its
// quadrature mass is exactly one; conservation and kernel identities then
// hold to round-off instead of to truncation error.

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hypokin/phase_grid.hpp"

namespace hypokin {

enum class ModelKind { Relaxation, SemiClassical, FokkerPlanck };

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

struct PotentialSpec {
  std::vector<double> values;  // V at the x nodes, zero mean
  double c2_bound = 0.0;       // max(|V|, |V'|, |V''|) on the grid

  // V(x) = amplitude * cos(mode * 2 pi x / length_x).
  static PotentialSpec cosine(const PhaseGrid& grid, double amplitude, int mode = 1);
  static PotentialSpec from_values(const PhaseGrid& grid, std::vector<double> values);
};

struct ModelSpec {
  ModelKind kind = ModelKind::Relaxation;
  double kappa = 1.0;
  int epsilon = 0;
  double rho = 1.0;
  std::optional<PotentialSpec> potential;
  bool poisson = false;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct EquilibriumSpec {
  ModelKind kind = ModelKind::Relaxation;
  double kappa_inf = 1.0;
  double rho_inf = 1.0;
};

// Analytic Maxwellian e^{-v^2/2}/sqrt(2 pi) at the v nodes.
std::vector<double> maxwellian(const PhaseGrid& grid);
// Maxwellian rescaled to unit quadrature mass.
std::vector<double> discrete_maxwellian(const PhaseGrid& grid);

// Solves sum_j w_j k M_j / (1 + eps k M_j) = rho for k with the discrete
// Maxwellian. Throws std::runtime_error on bracket failure or when a boson
// root reaches the regularity bound 1 - k max M > 0.
EquilibriumSpec solve_kappa_inf(double rho, int epsilon, const PhaseGrid& grid);

// nu(v) = int |v - v*|^gamma M(v*) dv*, times c_phi, by Gauss-Laguerre-type
// quadrature on each half line. gamma_exp must lie in [0, 1].
std::vector<double> collision_frequency_boltzmann(double gamma_exp, std::span<const double> v_nodes,
                                                  double c_phi = 1.0);

class Model {
 public:
  Model(ModelSpec spec, GridPtr grid);

  const ModelSpec& spec() const { return spec_; }
  ModelKind kind() const { return spec_.kind; }
  const PhaseGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const EquilibriumSpec& equilibrium() const { return equilibrium_; }

  const Eigen::MatrixXd& L() const { return L_; }
  const Eigen::MatrixXd& K() const { return K_; }
  const Eigen::MatrixXd& Lambda() const { return Lambda_; }
  // ||h||_Lambda^2 = h^T G h at one x node.
  const Eigen::MatrixXd& lambda_gram() const { return lambda_gram_; }
  const RowMatrix& L_rows() const { return L_rows_; }

  // Kernel profile of L with unit weighted norm.
  std::span<const double> kernel() const { return kernel_; }
  // Quadrature-normalised Maxwellian and its square root.
  std::span<const double> maxwell() const { return maxwell_; }
  std::span<const double> sqrt_maxwell() const { return sqrt_maxwell_; }
  // Equilibrium distribution f_inf(v) and linearisation scaling m(v):
  // f = f_inf + m h.
  std::span<const double> f_inf() const { return f_inf_; }
  std::span<const double> scaling() const { return scaling_; }
  // Collision frequency when Lambda is multiplicative; empty otherwise.
  std::span<const double> nu() const { return nu_; }
  bool multiplicative_lambda() const { return !nu_.empty(); }

  // Global kernel element of the full x-v problem (unit L2 norm). Differs
  // from the broadcast local kernel only when an external potential is set.
  const DistributionField& global_kernel() const { return global_kernel_; }

 private:
  ModelSpec spec_;
  GridPtr grid_;
  EquilibriumSpec equilibrium_;
  Eigen::MatrixXd L_, K_, Lambda_, lambda_gram_;
  RowMatrix L_rows_;
  std::vector<double> kernel_, maxwell_, sqrt_maxwell_, f_inf_, scaling_, nu_;
  DistributionField global_kernel_;
};

DistributionField apply_L(const Model& model, const DistributionField& h);
std::pair<DistributionField, DistributionField> split_K_Lambda(const Model& model,
                                                               const DistributionField& h);
DistributionField project_local(const Model& model, const DistributionField& h);
DistributionField project_global(const Model& model, const DistributionField& h);
// Conserved functional <h, phi> with phi the global kernel element.
double kernel_moment(const Model& model, const DistributionField& h);

// Quadratic remainder m^{-1} Q(f_inf + m h) - L h, symmetrised in its two
// slots. Zero field for the linear models.
DistributionField gamma_bilinear(const Model& model, const DistributionField& h1,
                                 const DistributionField& h2);

// Nonlinear collision operator Q(f) applied at each x. Its quadrature mass
// vanishes to round-off. For FokkerPlanck this is d_v(d_v f + v f).
DistributionField apply_Q_nonlinear(const Model& model, const DistributionField& f);

// V'(x) at the x nodes (spectral derivative); empty without a potential.
std::vector<double> potential_gradient(const Model& model);

// Staggered velocity differences used by the Fokker-Planck Dirichlet form:
// (n_v - 1) x n_v, fourth order inside, second order at the outer half points.
Eigen::MatrixXd staggered_difference(const PhaseGrid& grid);

}  // namespace hypokin
