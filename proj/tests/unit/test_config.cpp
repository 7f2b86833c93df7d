#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cache.hpp"
#include "commands.hpp"
#include "config.hpp"

using namespace vpm;
using namespace vpm::cli;

namespace {

std::string error_of(const std::string& yaml) {
  try {
    parse_config(yaml);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("defaults are the reference parameters") {
  const auto c = parse_config("");
  CHECK(c.profile.type == ProfileType::fermi_step);
  CHECK(c.profile.fermi.h == 2.0);
  CHECK(c.profile.fermi.w == 2.0);
  CHECK(c.profile.fermi.s == 16.0);
  CHECK(c.profile.period == doctest::Approx(2.0 * kPi));
  CHECK(c.numerics.n_trunc == 2);
  CHECK(c.numerics.channel.z_fit == 2.0);
  CHECK(c.numerics.channel.z_start == 8.0);
  CHECK(c.slab.epsilon == 4.0);
  CHECK(c.slab.w == 2.0);
}

TEST_CASE("shipped configs parse") {
  const std::string dir = VPM_CONFIG_DIR;
  const auto reference = load_config(dir + "/reference.yaml");
  CHECK(reference.geometry.delta_z.size() == 7);
  CHECK(reference.geometry.delta_x.size() == 9);
  CHECK(reference.geometry.delta_x.back() == reference.profile.period);
  // Spelling out the defaults does not change the hash of the node data.
  auto bare = parse_config("");
  bare.geometry = reference.geometry;
  CHECK(node_cache_key(bare) == node_cache_key(reference));
  CHECK(load_config(dir + "/coarse.yaml").quadrature.n_kappa == 4);
  CHECK(load_config(dir + "/vacuum.yaml").profile.type == ProfileType::vacuum);
}

TEST_CASE("strict parsing") {
  CHECK(error_of("profile:\n  type: fermi_step\n  hieght: 2\n").find("unknown key 'hieght'") != std::string::npos);
  CHECK(error_of("profile:\n  type: fermi_step\n  hieght: 2\n").find("line 3") != std::string::npos);
  CHECK(error_of("bogus: 1\n").find("unknown key 'bogus'") != std::string::npos);
  CHECK(error_of("profile:\n  s: -1\n").find("steepness must be positive") != std::string::npos);
  CHECK(error_of("profile:\n  type: sawtooth\n").find("unknown profile type") != std::string::npos);
  CHECK(error_of("quadrature:\n  n_kappa: 1\n") != "");
  CHECK(error_of("quadrature:\n  n_kappa: two\n").find("wrong type") != std::string::npos);
  CHECK(error_of("geometry:\n  delta_z: [3.0]\n").find("must exceed 2w") != std::string::npos);
  CHECK(error_of("numerics:\n  ode_method: euler\n") != "");
  CHECK(error_of("slab:\n  epsilon: 0.5\n") != "");
  CHECK(error_of("profile: [1, 2\n").find("line") != std::string::npos);
}

TEST_CASE("tabulated profile") {
  const std::string yaml = R"(profile:
  type: tabulated_fourier
  L: 6.0
  z: [0.0, 1.0, 2.0]
  components:
    - {n: 0, re: [1.0, 1.0, 0.0]}
    - {n: 1, re: [0.5, 0.5, 0.0], im: [0.1, 0.0, 0.0]}
slab:
  epsilon: 3.0
  w: 1.5
)";
  const auto c = parse_config(yaml);
  CHECK(c.numerics.channel.z_fit == 2.0);
  CHECK(c.numerics.channel.z_start == 8.0);
  const auto p = build_profile(c.profile);
  CHECK(p.period() == 6.0);
  CHECK(p.component(-1, 1.0, 0.0) == std::conj(p.component(1, 1.0, 0.0)));
  CHECK(error_of("profile:\n  type: tabulated_fourier\n  z: [0.0, 1.0]\n  components:\n    - {n: 0, re: [1.0, 0.0]}\n")
            .find("explicit 'slab'") != std::string::npos);
  CHECK(error_of("profile:\n  type: tabulated_fourier\n  z: [0.0, 1.0]\n  components:\n    - {n: 0, re: [1.0]}\n")
            .find("one value per z node") != std::string::npos);
}

TEST_CASE("overrides and hashes") {
  auto c = parse_config("numerics:\n  n_trunc: 3\n");
  CHECK_FALSE(c.numerics.n_trunc_auto);
  const auto key = node_cache_key(c);
  const auto hash = config_hash(c);
  Overrides o;
  o.workers = 3;
  o.csv = "out.csv";
  apply(o, c);
  CHECK(c.workers == 3);
  CHECK(node_cache_key(c) == key);
  CHECK(config_hash(c) == hash);
  o.n_trunc = 1;
  apply(o, c);
  CHECK(node_cache_key(c) != key);
  c.geometry.delta_z = {9.0};
  CHECK(config_hash(c) != hash);
  CHECK(hash_hex(nlohmann::json::object()).size() == 16);
  o.workers = -1;
  CHECK_THROWS_AS(apply(o, c), ConfigError);
}

TEST_CASE("cache lines round trip bit for bit") {
  QuadratureNode n{0.1234567890123, 0.3, 1.0 / 3.0, 0.5};
  CMatrix r(2, 2);
  r << cplx{1.0 / 7.0, -2e-300}, cplx{0.0, 1.0}, cplx{-3.5, 1e-17}, cplx{std::nextafter(1.0, 2.0), 0.0};
  std::size_t index = 0;
  QuadratureNode m;
  CMatrix s;
  REQUIRE(parse_node_line(format_node_line(17, n, r), 2, index, m, s));
  CHECK(index == 17);
  CHECK(m.kappa == n.kappa);
  CHECK(m.ky0 == n.ky0);
  CHECK(s == r);
  CHECK_FALSE(parse_node_line(format_node_line(17, n, r), 3, index, m, s));
  const auto line = format_node_line(17, n, r);
  CHECK_FALSE(parse_node_line(line.substr(0, line.size() - 5), 2, index, m, s));
}

TEST_CASE("file cache ignores entries for other nodes") {
  const auto dir = std::filesystem::temp_directory_path() / "vpm_test_cache";
  std::filesystem::remove_all(dir);
  std::vector<QuadratureNode> nodes{{0.5, 0.1, 0.2, 1.0}, {0.6, 0.1, 0.2, 1.0}};
  const CMatrix r = CMatrix::Identity(2, 2);
  {
    NodeFileCache cache(dir / "nodes", nodes, 2);
    cache.hooks().store(0, {nodes[0], r});
    cache.hooks().store(1, {nodes[0], r});  // coordinates do not match node 1
  }
  NodeFileCache reloaded(dir / "nodes", nodes, 2);
  CHECK(reloaded.loaded() == 1);
  const auto hooks = reloaded.hooks();
  CHECK(hooks.lookup(0).has_value());
  CHECK_FALSE(hooks.lookup(1).has_value());
  std::filesystem::remove_all(dir);
}

TEST_CASE("vacuum commands") {
  auto c = load_config(std::string(VPM_CONFIG_DIR) + "/vacuum.yaml");
  c.workers = 1;
  std::ostringstream out, log;
  CHECK(cmd_energy(c, out, log) == exit_ok);
  CHECK(out.str().find("delta_z,delta_x,energy,slab_energy,ratio,est_error\n6,0,0,0,0,0\n") == 0);
  c.diagnostics.channels = 3;
  DiagnosticsRequest req;
  std::ostringstream dout;
  CHECK(cmd_diagnostics(c, req, dout, log) == exit_ok);
  CHECK(cmd_validate(c, out) == exit_ok);
}

TEST_CASE("validate the reference profile") {
  const auto c = parse_config("");
  std::ostringstream out;
  CHECK(cmd_validate(c, out) == exit_ok);
  CHECK(out.str().find("FAIL") == std::string::npos);
}
