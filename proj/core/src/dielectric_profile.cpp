#include "vpm/dielectric_profile.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vpm {

namespace {

double sign_of(double z) { return (z > 0.0) - (z < 0.0); }

// Logistic factor g = 1/(1+e^u) and its complement 1-g, both computed
// without cancellation.
struct Logistic {
  double g;
  double gc;
};

Logistic logistic(double u) {
  if (u > 0.0) {
    const double e = std::exp(-u);
    return {e / (1.0 + e), 1.0 / (1.0 + e)};
  }
  const double e = std::exp(u);
  return {1.0 / (1.0 + e), e / (1.0 + e)};
}

ComponentFunctions fermi_component(double amplitude, double w, double s) {
  ComponentFunctions f;
  f.value = [=](cplx, double z) {
    return cplx{amplitude * logistic(s * (std::abs(z) - w)).g, 0.0};
  };
  f.dz = [=](cplx, double z) {
    const auto l = logistic(s * (std::abs(z) - w));
    return cplx{-s * sign_of(z) * amplitude * l.g * l.gc, 0.0};
  };
  // The |z| kink contributes a delta at z = 0 whose weight is of order
  // exp(-s w); it is dropped.
  f.dz2 = [=](cplx, double z) {
    const auto l = logistic(s * (std::abs(z) - w));
    return cplx{s * s * amplitude * l.g * l.gc * (l.gc - l.g), 0.0};
  };
  return f;
}

}  // namespace

FourierProfile::FourierProfile(double period, std::map<int, ComponentFunctions> components,
                               std::vector<ProfileFeature> features)
    : period_(period) {
  if (!(period > 0.0)) throw Error("period must be positive");
  for (const auto& [n, f] : components) {
    if (!f.value || !f.dz || !f.dz2)
      throw Error("component " + std::to_string(n) + " is missing a derivative");
    max_harmonic_ = std::max(max_harmonic_, std::abs(n));
  }
  for (const auto& f : features)
    if (!(f.center >= 0.0 && f.width > 0.0)) throw Error("profile features need center >= 0 and width > 0");
  components_ = std::make_shared<const std::map<int, ComponentFunctions>>(std::move(components));
  features_ = std::make_shared<const std::vector<ProfileFeature>>(std::move(features));
}

std::vector<int> FourierProfile::stored_harmonics() const {
  std::vector<int> out;
  for (const auto& [n, f] : *components_) out.push_back(n);
  return out;
}

cplx FourierProfile::component(int n, cplx k, double z) const {
  const auto it = components_->find(n);
  return it == components_->end() ? cplx{} : it->second.value(k, z);
}

cplx FourierProfile::component_dz(int n, cplx k, double z) const {
  const auto it = components_->find(n);
  return it == components_->end() ? cplx{} : it->second.dz(k, z);
}

cplx FourierProfile::component_dz2(int n, cplx k, double z) const {
  const auto it = components_->find(n);
  return it == components_->end() ? cplx{} : it->second.dz2(k, z);
}

ComponentSample FourierProfile::sample(cplx k, double z) const {
  ComponentSample s;
  s.max_harmonic = max_harmonic_;
  const auto size = static_cast<std::size_t>(2 * max_harmonic_ + 1);
  s.value.assign(size, cplx{});
  s.dz.assign(size, cplx{});
  s.dz2.assign(size, cplx{});
  for (const auto& [n, f] : *components_) {
    const auto i = static_cast<std::size_t>(n + max_harmonic_);
    s.value[i] = f.value(k, z);
    s.dz[i] = f.dz(k, z);
    s.dz2[i] = f.dz2(k, z);
  }
  return s;
}

void validate(const FermiStepParams& p) {
  if (!(p.h > 0.0)) throw Error("height must be positive");
  if (!(p.w > 0.0)) throw Error("width must be positive");
  if (!(p.s > 0.0)) throw Error("steepness must be positive");
  if (!(p.L > 0.0)) throw Error("period must be positive");
}

FourierProfile make_fermi_step(const FermiStepParams& p) {
  validate(p);
  std::map<int, ComponentFunctions> c;
  c[0] = fermi_component(p.h, p.w, p.s);
  c[1] = fermi_component(0.5 * p.h, p.w, p.s);
  c[-1] = fermi_component(0.5 * p.h, p.w, p.s);
  return FourierProfile(p.L, std::move(c), {{p.w, 1.0 / p.s}});
}

FourierProfile make_fermi_slab(double h, double w, double s, double L) {
  validate(FermiStepParams{h, w, s, L});
  std::map<int, ComponentFunctions> c;
  c[0] = fermi_component(h, w, s);
  return FourierProfile(L, std::move(c), {{w, 1.0 / s}});
}

FourierProfile make_vacuum(double L) { return FourierProfile(L, {}); }

namespace {

struct Table {
  std::vector<double> z;
  std::vector<cplx> v;

  // Segment index i with z[i] <= a < z[i+1], or -1 beyond the table.
  int segment(double a) const {
    if (a >= z.back()) return -1;
    const auto it = std::upper_bound(z.begin(), z.end(), a);
    return static_cast<int>(it - z.begin()) - 1;
  }
  cplx slope(int i) const { return (v[i + 1] - v[i]) / (z[i + 1] - z[i]); }
};

ComponentFunctions table_component(std::shared_ptr<const Table> t, bool conjugate) {
  auto fix = [conjugate](cplx c) { return conjugate ? std::conj(c) : c; };
  ComponentFunctions f;
  f.value = [t, fix](cplx, double z) {
    const double a = std::abs(z);
    const int i = t->segment(a);
    if (i < 0) return cplx{};
    return fix(t->v[i] + t->slope(i) * (a - t->z[i]));
  };
  f.dz = [t, fix](cplx, double z) {
    const int i = t->segment(std::abs(z));
    if (i < 0) return cplx{};
    return fix(sign_of(z) * t->slope(i));
  };
  f.dz2 = [](cplx, double) { return cplx{}; };
  return f;
}

}  // namespace

FourierProfile make_tabulated(double L, std::vector<double> z_nodes,
                              const std::vector<TabulatedComponent>& components) {
  if (z_nodes.size() < 2) throw Error("tabulated profile needs at least two z nodes");
  if (z_nodes.front() != 0.0) throw Error("tabulated z grid must start at 0");
  for (std::size_t i = 1; i < z_nodes.size(); ++i)
    if (!(z_nodes[i] > z_nodes[i - 1])) throw Error("tabulated z grid must be strictly increasing");

  std::map<int, ComponentFunctions> c;
  for (const auto& comp : components) {
    if (comp.n < 0) throw Error("tabulated harmonics must be non-negative (negative ones are implied)");
    if (comp.values.size() != z_nodes.size()) {
      std::ostringstream os;
      os << "harmonic " << comp.n << " has " << comp.values.size() << " values but the z grid has "
         << z_nodes.size();
      throw Error(os.str());
    }
    if (c.count(comp.n)) throw Error("harmonic " + std::to_string(comp.n) + " given twice");
    auto table = std::make_shared<const Table>(Table{z_nodes, comp.values});
    if (comp.n == 0) {
      for (const auto& v : comp.values)
        if (std::abs(v.imag()) > 0.0) throw Error("harmonic 0 of a real profile must be real");
      c[0] = table_component(table, false);
    } else {
      c[comp.n] = table_component(table, false);
      c[-comp.n] = table_component(table, true);
    }
  }
  // Every node is a kink of the interpolant.
  std::vector<ProfileFeature> kinks;
  for (std::size_t i = 0; i < z_nodes.size(); ++i) {
    const double gap = i + 1 < z_nodes.size() ? z_nodes[i + 1] - z_nodes[i] : z_nodes[i] - z_nodes[i - 1];
    kinks.push_back({z_nodes[i], 0.1 * gap});
  }
  return FourierProfile(L, std::move(c), std::move(kinks));
}

cplx eval_component(const FourierProfile& profile, int n, cplx k, double z) {
  return profile.component(n, k, z);
}

cplx eval_component_dz(const FourierProfile& profile, int n, cplx k, double z) {
  return profile.component_dz(n, k, z);
}

cplx eval_component_dz2(const FourierProfile& profile, int n, cplx k, double z) {
  return profile.component_dz2(n, k, z);
}

cplx eval_total(const FourierProfile& profile, cplx k, double x, double z) {
  cplx total{1.0, 0.0};
  for (int n : profile.stored_harmonics())
    total += profile.component(n, k, z) * std::exp(kI * (2.0 * kPi * n * x / profile.period()));
  return total;
}

}  // namespace vpm
