#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace gravalloc {

enum class Status { Pass, Fail, Censored };
std::string to_string(Status s);

struct Check {
  std::string name;
  Status status = Status::Pass;
  std::string summary;
  nlohmann::json data;
};

// Zero / negative values mean "suite default".
struct SuiteOptions {
  int dim = 0;
  double R = 0.0;
  double gamma = -1.0;
  std::uint64_t seed = 1;
  std::size_t replicas = 0;
  double tol = 0.0;
  bool full = false;  // acceptance-sized runs
  int threads = 0;
};

struct SuiteReport {
  std::string suite;
  std::vector<Check> checks;

  // 2 on any failure, else 3 if anything is censored, else 0
  int exit_code() const;
  nlohmann::json to_json() const;
};

const std::vector<std::string>& suite_names();
SuiteReport run_suite(const std::string& name, const SuiteOptions& opt);

// acceptance criteria 1..14
inline constexpr int kCriteria = 14;
std::string criterion_title(int i);
Check run_criterion(int i, const SuiteOptions& opt);

// individual checks, also used by the CLI
Check check_equal_volume(std::uint64_t seed, int n_fine, int n_coarse, int threads);
Check check_divergence(int d, std::size_t probes, std::uint64_t seed);
Check check_flow_time(std::size_t samples, std::uint64_t seed);
Check check_liouville_ratio(std::size_t samples, std::uint64_t seed);
Check check_time_potential(int d, std::size_t trajectories, std::uint64_t seed);
Check check_taylor(const std::vector<int>& dims, int kmax, std::size_t samples, std::uint64_t seed);
Check check_cubature(int d, double L, double W, double tau, int k, double delta);
Check check_density(std::size_t replicas, std::uint64_t seed);
Check check_wormhole_force(const std::vector<double>& gammas, const std::vector<double>& Rs, std::uint64_t seed,
                           std::size_t max_points);
Check check_wormhole_e1(double R, double gamma, std::uint64_t seed);
Check check_wormhole_rho(double R, std::uint64_t seed);
Check check_galaxy(int d, const std::vector<double>& Rs, const std::vector<long>& ks, std::uint64_t seed);
Check check_equilibrium(const std::vector<int>& dims, int probes, std::uint64_t seed);
Check check_empty_box(int d, double L, const std::vector<double>& Ws, int probes, std::uint64_t seed);
Check check_dominated_boxes(int d, double eps, double R);
Check check_rates(int d_lo, int d_hi);
Check check_tails(std::size_t replicas, std::uint64_t seed);
Check check_kernel(std::uint64_t seed);

}  // namespace gravalloc
