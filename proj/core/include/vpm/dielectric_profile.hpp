#pragma once

#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "vpm/types.hpp"

namespace vpm {

/// One Fourier component eps_n(k, z) of the dielectric, stored as the
/// deviation from vacuum, together with its first two z-derivatives.
/// The wavenumber argument is complex so the same component can be
/// evaluated on the real and the imaginary frequency axis.
struct ComponentFunctions {
  std::function<cplx(cplx k, double z)> value;
  std::function<cplx(cplx k, double z)> dz;
  std::function<cplx(cplx k, double z)> dz2;
};

/// Values of every stored component at a single (k, z), indexed by
/// harmonic n in [-max_harmonic, max_harmonic].
struct ComponentSample {
  int max_harmonic = 0;
  std::vector<cplx> value;
  std::vector<cplx> dz;
  std::vector<cplx> dz2;

  cplx at(const std::vector<cplx>& v, int n) const {
    return (n < -max_harmonic || n > max_harmonic) ? cplx{} : v[n + max_harmonic];
  }
};

/// A location |z| = center around which the profile varies on the length
/// scale `width` (a Fermi edge, a table node). The ODE integration restarts
/// its step control at features so a narrow edge cannot be stepped over.
struct ProfileFeature {
  double center = 0.0;
  double width = 0.0;
};

/// A dielectric background periodic in x with period L, independent of y
/// and even in z. The total dielectric is 1 + sum_n eps_n(k,z) exp(2 pi i n x / L).
/// Immutable after construction.
class FourierProfile {
 public:
  FourierProfile() = default;
  FourierProfile(double period, std::map<int, ComponentFunctions> components,
                 std::vector<ProfileFeature> features = {});

  double period() const { return period_; }
  int max_harmonic() const { return max_harmonic_; }
  bool is_vacuum() const { return components_->empty(); }
  std::vector<int> stored_harmonics() const;
  const std::vector<ProfileFeature>& features() const { return *features_; }

  cplx component(int n, cplx k, double z) const;
  cplx component_dz(int n, cplx k, double z) const;
  cplx component_dz2(int n, cplx k, double z) const;

  ComponentSample sample(cplx k, double z) const;

 private:
  double period_ = 2.0 * kPi;
  int max_harmonic_ = 0;
  std::shared_ptr<const std::map<int, ComponentFunctions>> components_ =
      std::make_shared<const std::map<int, ComponentFunctions>>();
  std::shared_ptr<const std::vector<ProfileFeature>> features_ =
      std::make_shared<const std::vector<ProfileFeature>>();
};

struct FermiStepParams {
  double h = 2.0;
  double w = 2.0;
  double s = 16.0;
  double L = 2.0 * kPi;
};

/// Throws vpm::Error naming the offending parameter.
void validate(const FermiStepParams& p);

/// eps_0 = 2 eps_1 = 2 eps_{-1} = h / (1 + exp[s(|z| - w)]).
FourierProfile make_fermi_step(const FermiStepParams& p);

/// x-independent Fermi step: only eps_0 = h / (1 + exp[s(|z| - w)]).
FourierProfile make_fermi_slab(double h, double w, double s, double L);

FourierProfile make_vacuum(double L);

/// Per-harmonic coefficient table over |z| (ascending, starting at 0).
/// Values are linearly interpolated and vanish beyond the last node.
struct TabulatedComponent {
  int n = 0;
  std::vector<cplx> values;
};

/// Harmonics must be non-negative; eps_{-n} is filled in as conj(eps_n).
FourierProfile make_tabulated(double L, std::vector<double> z_nodes,
                              const std::vector<TabulatedComponent>& components);

cplx eval_component(const FourierProfile& profile, int n, cplx k, double z);
cplx eval_component_dz(const FourierProfile& profile, int n, cplx k, double z);
cplx eval_component_dz2(const FourierProfile& profile, int n, cplx k, double z);
cplx eval_total(const FourierProfile& profile, cplx k, double x, double z);

}  // namespace vpm
