#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vpm/quadrature.hpp"
#include "vpm/smatrix.hpp"

namespace vpm {

/// Separation between the grating center planes and lateral displacement, in l0.
struct GeometryConfig {
  double delta_z = 6.0;
  double delta_x = 0.0;
};

/// Diagonal of the translation matrix in TE/TM coordinates (each harmonic's
/// entry exp(i kx dx) exp(i kz dz) appears twice).
CVector translation_matrix(const ModeBasis& basis, double delta_z, double delta_x);

/// Basis at (-kx0, -ky0) with harmonics reindexed n -> -n, so that it acts on
/// the same coordinates as `basis`.
ModeBasis mirrored_basis(const ModeBasis& basis);

struct LogDet {
  double real = 0.0;
  double imag = 0.0;  // principal phase of det, reduced to (-pi, pi]
};

/// log det(1 - U(kx0, ky0) r U(-kx0, -ky0) r) for a projected reflection r.
LogDet round_trip_log_det(const CMatrix& r_transverse, const ModeBasis& basis, const GeometryConfig& geometry);

/// Throws ChannelError unless |imag| < 1e-6 |real| + 1e-12.
double checked_real(const LogDet& value, const ModeBasis& basis);

/// Full per-node pipeline on the imaginary axis: Re log det(...).
double integrand(const FourierProfile& profile, double kappa, double kx0, double ky0, int n_trunc,
                 const GeometryConfig& geometry, const ChannelOptions& options);

/// Fresnel reflection of a slab of dielectric eps and half-width w,
/// referenced to the slab center plane.
struct SlabReflection {
  cplx te;
  cplx tm;
};

/// rho is the transverse wavenumber sqrt(kx^2 + ky^2).
SlabReflection slab_reflection(double epsilon, double w, const Frequency& frequency, double rho);

/// sum over harmonics and polarizations of log(1 - r^2 exp(-2 q dz)).
double slab_integrand(double epsilon, double w, double kappa, double kx0, double ky0, int n_trunc,
                      double period, double delta_z);

inline constexpr double kEnergyPrefactor = 1.0 / (4.0 * kPi * kPi * kPi);

/// Projected reflection of one quadrature node, all that the energy needs.
struct NodeReflection {
  QuadratureNode node;
  CMatrix r_transverse;
  double condition = 1.0;
  long ode_steps = 0;
};

/// Optional persistence hook for node results (resumable sweeps).
struct NodeCache {
  std::function<std::optional<CMatrix>(std::size_t)> lookup;
  std::function<void(std::size_t, const NodeReflection&)> store;
};

struct NodeFailure {
  std::size_t index = 0;
  QuadratureNode node;
  std::string message;
};

struct NodeBatch {
  std::vector<NodeReflection> results;  // same order as the input nodes
  std::vector<NodeFailure> failures;
  std::size_t cache_hits = 0;
};

/// Evaluates the scattering pipeline on every node with `workers` threads
/// (0 = hardware concurrency). Results are independent of the worker count.
NodeBatch compute_node_reflections(const FourierProfile& profile, const std::vector<QuadratureNode>& nodes,
                                   int n_trunc, const ChannelOptions& options, int workers = 0,
                                   const NodeCache* cache = nullptr);

/// Running diagnostics of an energy evaluation.
struct IntegrandStats {
  double max_imag_ratio = 0.0;  // |Im| / max(|Re|, 1e-12)
  double max_value = -std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;
};

/// (1/4 pi^3) sum_nodes w log det(...), in units hbar c / l0^3.
double energy_from_reflections(const std::vector<NodeReflection>& reflections, int n_trunc, double period,
                               const GeometryConfig& geometry, IntegrandStats* stats = nullptr);

double slab_energy_from_nodes(double epsilon, double w, const std::vector<QuadratureNode>& nodes, int n_trunc,
                              double period, double delta_z);

struct EnergyEstimate {
  double value = 0.0;
  double coarse_value = 0.0;
  double est_error = 0.0;
  bool converged = true;
};

/// Slab energy with the same quadrature the grating energy uses; the error
/// estimate compares against the halved rule.
EnergyEstimate slab_energy(double epsilon, double w, double delta_z, const QuadratureSpec& quadrature,
                           int n_trunc, double period, double convergence_rtol = 1e-2);

struct EnergyResult {
  GeometryConfig geometry;
  EnergyEstimate energy;
  EnergyEstimate slab;
  double ratio = 0.0;
  IntegrandStats stats;
};

/// Single-geometry convenience wrapper around the node pipeline.
EnergyResult energy_per_area(const FourierProfile& profile, const GeometryConfig& geometry,
                             const QuadratureSpec& quadrature, int n_trunc, const ChannelOptions& options,
                             double slab_epsilon, double slab_w, double convergence_rtol = 1e-2,
                             int workers = 0);

}  // namespace vpm
