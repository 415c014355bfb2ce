#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "lqcertify/audit.hpp"
#include "lqcertify/bounds.hpp"
#include "lqcertify/core.hpp"
#include "lqcertify/io.hpp"
#include "lqcertify/rng.hpp"
#include "lqcertify/solvers.hpp"

namespace lqc {

using json = nlohmann::json;

enum class DictionaryKind { Gaussian, TwoOrthoSpikesDct, TwoOrthoSpikesHadamard };
enum class AmplitudeModel { Unit, Uniform, Gaussian };

struct ExperimentConfig {
  std::uint64_t seed = 0;
  int trials = 100;
  int m = 64;
  int n = 128;
  int N = 2;
  std::vector<double> q_list = {0.5, 1.0};
  double epsilon = 0.01;
  double sigma = 0.02;
  DictionaryKind dictionary_kind = DictionaryKind::TwoOrthoSpikesHadamard;
  AmplitudeModel amplitude_model = AmplitudeModel::Unit;
  std::string output_path = "out";
  // multistart kept small: the ground-truth warm start carries the solve
  SolverConfig solver = [] {
    SolverConfig s;
    s.multistart_count = 2;
    return s;
  }();

  void validate() const {
    if (trials < 1) throw DomainError("ExperimentConfig: trials must be >= 1");
    if (m < 1 || n < 1 || m > n) throw DomainError("ExperimentConfig: need 1 <= m <= n");
    if (N < 1 || N > n) throw DomainError("ExperimentConfig: need 1 <= N <= n");
    if (q_list.empty()) throw DomainError("ExperimentConfig: q_list must be nonempty");
    for (double q : q_list) detail::require_q(q);
    if (epsilon < 0.0 || sigma < 0.0) throw DomainError("ExperimentConfig: epsilon, sigma >= 0");
    if (dictionary_kind != DictionaryKind::Gaussian) {
      if (n != 2 * m) throw DomainError("ExperimentConfig: two-ortho kinds require n = 2m");
      if (dictionary_kind == DictionaryKind::TwoOrthoSpikesHadamard && (m & (m - 1)) != 0)
        throw DomainError("ExperimentConfig: Hadamard kind requires m to be a power of two");
    }
  }

  bool sigma_ge_epsilon() const { return sigma >= epsilon; }
};

inline DictionaryKind dictionary_kind_from_string(const std::string& s) {
  if (s == "gaussian") return DictionaryKind::Gaussian;
  if (s == "two_ortho_spikes_dct") return DictionaryKind::TwoOrthoSpikesDct;
  if (s == "two_ortho_spikes_hadamard") return DictionaryKind::TwoOrthoSpikesHadamard;
  throw InputError("unknown dictionary_kind: " + s);
}

inline std::string to_string(DictionaryKind k) {
  switch (k) {
    case DictionaryKind::Gaussian: return "gaussian";
    case DictionaryKind::TwoOrthoSpikesDct: return "two_ortho_spikes_dct";
    default: return "two_ortho_spikes_hadamard";
  }
}

inline AmplitudeModel amplitude_model_from_string(const std::string& s) {
  if (s == "unit") return AmplitudeModel::Unit;
  if (s == "uniform") return AmplitudeModel::Uniform;
  if (s == "gaussian") return AmplitudeModel::Gaussian;
  throw InputError("unknown amplitude_model: " + s);
}

inline std::string to_string(AmplitudeModel a) {
  switch (a) {
    case AmplitudeModel::Unit: return "unit";
    case AmplitudeModel::Uniform: return "uniform";
    default: return "gaussian";
  }
}

inline ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig c;
  c.seed = j.at("seed").get<std::uint64_t>();
  c.trials = j.at("trials").get<int>();
  c.m = j.at("m").get<int>();
  c.n = j.at("n").get<int>();
  c.N = j.at("N").get<int>();
  c.q_list = j.at("q_list").get<std::vector<double>>();
  c.epsilon = j.at("epsilon").get<double>();
  c.sigma = j.at("sigma").get<double>();
  c.dictionary_kind = dictionary_kind_from_string(j.at("dictionary_kind").get<std::string>());
  if (j.contains("amplitude_model"))
    c.amplitude_model = amplitude_model_from_string(j.at("amplitude_model").get<std::string>());
  if (j.contains("output_path")) c.output_path = j.at("output_path").get<std::string>();
  if (j.contains("multistart_count")) c.solver.multistart_count = j.at("multistart_count").get<int>();
  c.validate();
  return c;
}

namespace detail {

inline Matrix dct_basis(int m) {
  Matrix C(m, m);
  const double pi = 3.14159265358979323846;
  for (int j = 0; j < m; ++j) {
    const double s = j == 0 ? std::sqrt(1.0 / m) : std::sqrt(2.0 / m);
    for (int k = 0; k < m; ++k)
      C(k, j) = s * std::cos(pi * (2.0 * k + 1.0) * j / (2.0 * m));
  }
  return C;
}

inline Matrix hadamard_basis(int m) {
  Matrix H(1, 1);
  H(0, 0) = 1.0;
  while (H.rows() < m) {
    const Eigen::Index r = H.rows();
    Matrix H2(2 * r, 2 * r);
    H2.topLeftCorner(r, r) = H;
    H2.topRightCorner(r, r) = H;
    H2.bottomLeftCorner(r, r) = H;
    H2.bottomRightCorner(r, r) = -H;
    H = std::move(H2);
  }
  return H / std::sqrt(static_cast<double>(m));
}

}  // namespace detail

struct Instance {
  Dictionary dictionary;
  SparseSignal ground_truth;
  Observation observation;
};

/// Deterministic per-trial instance; same (seed, trial_index) gives a
/// bit-identical draw regardless of trial execution order.
inline Instance generate_instance(const ExperimentConfig& cfg, int trial_index) {
  cfg.validate();
  std::mt19937_64 gen(derive_seed(cfg.seed, static_cast<std::uint64_t>(trial_index)));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Matrix Araw;
  switch (cfg.dictionary_kind) {
    case DictionaryKind::Gaussian: {
      Araw.resize(cfg.m, cfg.n);
      for (Eigen::Index j = 0; j < Araw.cols(); ++j)
        for (Eigen::Index i = 0; i < Araw.rows(); ++i) Araw(i, j) = gauss(gen);
      break;
    }
    case DictionaryKind::TwoOrthoSpikesDct: {
      Araw.resize(cfg.m, cfg.n);
      Araw.leftCols(cfg.m) = Matrix::Identity(cfg.m, cfg.m);
      Araw.rightCols(cfg.m) = detail::dct_basis(cfg.m);
      break;
    }
    case DictionaryKind::TwoOrthoSpikesHadamard: {
      Araw.resize(cfg.m, cfg.n);
      Araw.leftCols(cfg.m) = Matrix::Identity(cfg.m, cfg.m);
      Araw.rightCols(cfg.m) = detail::hadamard_basis(cfg.m);
      break;
    }
  }
  Dictionary A = normalize_columns(Araw);

  // support: N distinct indices, uniform without replacement
  std::vector<int> pool(static_cast<std::size_t>(cfg.n));
  for (int i = 0; i < cfg.n; ++i) pool[static_cast<std::size_t>(i)] = i;
  for (int k = 0; k < cfg.N; ++k) {
    std::uniform_int_distribution<int> pick(k, cfg.n - 1);
    std::swap(pool[static_cast<std::size_t>(k)], pool[static_cast<std::size_t>(pick(gen))]);
  }
  Vector x0 = Vector::Zero(cfg.n);
  for (int k = 0; k < cfg.N; ++k) {
    double amp = 1.0;
    switch (cfg.amplitude_model) {
      case AmplitudeModel::Unit: amp = 1.0; break;
      case AmplitudeModel::Uniform: amp = 0.5 + unif(gen); break;
      case AmplitudeModel::Gaussian: amp = std::abs(gauss(gen)) + 0.1; break;
    }
    const double sign = unif(gen) < 0.5 ? -1.0 : 1.0;
    x0[pool[static_cast<std::size_t>(k)]] = sign * amp;
  }
  SparseSignal signal = SparseSignal::from_vector(x0, 0.0);

  // noise: uniform direction on the epsilon-sphere, shrunk by u in (0,1]
  Vector w = Vector::Zero(cfg.m);
  if (cfg.epsilon > 0.0) {
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = gauss(gen);
    const double nrm = w.norm();
    const double u = 1.0 - unif(gen);  // (0,1]
    if (nrm > 0.0) w *= cfg.epsilon * u / nrm;
  }
  Vector y_clean = A.entries() * x0;
  Observation obs(std::move(y_clean), std::move(w), cfg.epsilon);
  return Instance{std::move(A), std::move(signal), std::move(obs)};
}

struct TrialRecord {
  int trial_index = 0;
  double q = 1.0;
  double M = 0.0;
  int N = 0;
  std::optional<double> gamma;  // absent at q = 1 or when e = 0
  double threshold = 0.0;
  bool admissible = false;
  double error_l2 = 0.0;
  std::optional<double> bound_value;
  bool bound_satisfied = false;
  double residual = 0.0;
  double objective = 0.0;
  std::optional<double> oracle_gap;  // only on oracle-guarded instance sizes
  bool chain_all_pass = false;
  bool converged = false;
};

inline const char* kRecordsCsvHeader =
    "trial_index,q,M,N,gamma,threshold,admissible,error_l2,bound_value,"
    "bound_satisfied,residual,objective,oracle_gap,chain_all_pass,converged";

inline std::string to_csv_row(const TrialRecord& r) {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  std::string row;
  row += std::to_string(r.trial_index);
  row += ',' + format_double(r.q);
  row += ',' + format_double(r.M);
  row += ',' + std::to_string(r.N);
  row += ',' + opt(r.gamma);
  row += ',' + format_double(r.threshold);
  row += ',' + std::string(r.admissible ? "1" : "0");
  row += ',' + format_double(r.error_l2);
  row += ',' + opt(r.bound_value);
  row += ',' + std::string(r.bound_satisfied ? "1" : "0");
  row += ',' + format_double(r.residual);
  row += ',' + format_double(r.objective);
  row += ',' + opt(r.oracle_gap);
  row += ',' + std::string(r.chain_all_pass ? "1" : "0");
  row += ',' + std::string(r.converged ? "1" : "0");
  return row;
}

/// Order-independent aggregation over a record collection.
inline json summarize(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw InputError("summarize: empty record collection");
  std::vector<double> qs;
  for (const auto& r : records)
    if (std::find(qs.begin(), qs.end(), r.q) == qs.end()) qs.push_back(r.q);
  std::sort(qs.begin(), qs.end());

  json per_q = json::object();
  json summary;
  double mean_err_q1 = 0.0;
  int cnt_q1 = 0;
  for (const auto& r : records)
    if (r.q == 1.0 && r.converged) {
      mean_err_q1 += r.error_l2;
      ++cnt_q1;
    }
  if (cnt_q1 > 0) mean_err_q1 /= cnt_q1;

  for (double q : qs) {
    int total = 0, converged = 0, admissible = 0, certified = 0, satisfied = 0, chain_pass = 0;
    int gamma_count = 0, gamma_gt2 = 0;
    double gamma_sum = 0.0, gamma_min = std::numeric_limits<double>::infinity(),
           gamma_max = -std::numeric_limits<double>::infinity();
    double tight_sum = 0.0;
    int tight_count = 0;
    double err_sum = 0.0;
    int err_count = 0;
    for (const auto& r : records) {
      if (r.q != q) continue;
      ++total;
      if (r.converged) ++converged;
      if (r.admissible) ++admissible;
      if (r.chain_all_pass) ++chain_pass;
      if (r.gamma) {
        ++gamma_count;
        gamma_sum += *r.gamma;
        gamma_min = std::min(gamma_min, *r.gamma);
        gamma_max = std::max(gamma_max, *r.gamma);
        if (*r.gamma > 2.0) ++gamma_gt2;
      }
      if (r.converged) {
        err_sum += r.error_l2;
        ++err_count;
      }
      if (r.admissible && r.converged && r.chain_all_pass) {
        ++certified;
        if (r.bound_satisfied) ++satisfied;
        if (r.bound_value && *r.bound_value > 0.0) {
          tight_sum += r.error_l2 / *r.bound_value;
          ++tight_count;
        }
      }
    }
    json jq;
    jq["trials"] = total;
    jq["converged"] = converged;
    jq["admissible"] = admissible;
    jq["chain_all_pass"] = chain_pass;
    jq["certified"] = certified;  // admissible && converged && chain pass
    jq["bound_satisfied"] = satisfied;
    jq["bound_satisfied_rate"] = certified > 0 ? static_cast<double>(satisfied) / certified : 1.0;
    jq["mean_tightness_ratio"] = tight_count > 0 ? tight_sum / tight_count : 0.0;
    jq["mean_error_l2"] = err_count > 0 ? err_sum / err_count : 0.0;
    if (gamma_count > 0) {
      jq["mean_gamma"] = gamma_sum / gamma_count;
      jq["min_gamma"] = gamma_min;
      jq["max_gamma"] = gamma_max;
      jq["frac_gamma_gt_2"] = static_cast<double>(gamma_gt2) / gamma_count;
    }
    if (q < 1.0 && cnt_q1 > 0 && err_count > 0)
      jq["mean_error_vs_q1"] = err_sum / err_count - mean_err_q1;
    per_q[format_double(q)] = jq;
  }
  summary["records"] = static_cast<int>(records.size());
  summary["per_q"] = per_q;
  return summary;
}

inline int thread_budget() {
  if (const char* env = std::getenv("LQ_CERTIFY_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

struct ExperimentOutcome {
  std::vector<TrialRecord> records;
  std::vector<ChainTrace> traces;  // same indexing as records
  json summary;
};

/// Full Monte Carlo certification run: solve, certify, audit, aggregate.
/// Trial scheduling is parallel but output is identical to serial execution.
inline ExperimentOutcome run_experiment(const ExperimentConfig& cfg, bool write_files = true) {
  cfg.validate();
  const int nq = static_cast<int>(cfg.q_list.size());
  std::vector<TrialRecord> records(static_cast<std::size_t>(cfg.trials) * nq);
  std::vector<ChainTrace> traces(records.size());

  auto run_trial = [&](int trial) {
    const Instance inst = generate_instance(cfg, trial);
    const double M = mutual_coherence(inst.dictionary);
    const int N = inst.ground_truth.sparsity;
    for (int qi = 0; qi < nq; ++qi) {
      const double q = cfg.q_list[static_cast<std::size_t>(qi)];
      RecoveryProblem problem(inst.dictionary, inst.observation, cfg.sigma, q);
      SolverConfig scfg = cfg.solver;
      scfg.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(trial),
                              1000 + static_cast<std::uint64_t>(qi));
      const RecoveryResult res = solve_constrained(problem, scfg, inst.ground_truth.values);
      const Vector e = res.x_star - inst.ground_truth.values;

      TrialRecord rec;
      rec.trial_index = trial;
      rec.q = q;
      rec.M = M;
      rec.N = N;
      rec.residual = res.residual;
      rec.objective = res.objective;
      rec.converged = res.diagnostics.converged;
      rec.error_l2 = e.norm();

      double gamma_eff = 1.0;
      if (q < 1.0) {
        if (rec.error_l2 > 1e-14) {
          gamma_eff = gamma_of_error(e, q, N);
          rec.gamma = gamma_eff;
        } else {
          gamma_eff = 1.0 / N;  // worst case; bound trivially holds at e = 0
        }
      }
      const BoundCertificate cert = cq_constant(q, M, N, gamma_eff, cfg.epsilon, cfg.sigma);
      rec.threshold = cert.threshold;
      rec.admissible = cert.admissible;
      rec.bound_value = cert.bound_value;
      rec.bound_satisfied =
          cert.admissible && cert.bound_value && rec.error_l2 <= *cert.bound_value + 1e-9;

      ChainTrace trace =
          audit_solution_chain(inst.dictionary, inst.ground_truth, res, q, cfg.epsilon, cfg.sigma);
      rec.chain_all_pass = trace.all_pass();
      traces[static_cast<std::size_t>(trial) * nq + qi] = std::move(trace);

      if (cfg.n <= 14 && N <= 6) {
        try {
          const RecoveryResult orc = oracle_global(problem, std::min(6, cfg.n), OracleMode::Lq, scfg);
          rec.oracle_gap = res.objective - orc.objective;
        } catch (const InfeasibleError&) {
        }
      }
      records[static_cast<std::size_t>(trial) * nq + qi] = std::move(rec);
    }
  };

  const int threads = std::min(thread_budget(), cfg.trials);
  if (threads <= 1) {
    for (int t = 0; t < cfg.trials; ++t) run_trial(t);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        for (int t = w; t < cfg.trials; t += threads) run_trial(t);
      });
    for (auto& th : pool) th.join();
  }

  ExperimentOutcome out;
  out.records = std::move(records);
  out.traces = std::move(traces);
  out.summary = summarize(out.records);
  if (write_files) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(cfg.output_path, ec);
    const std::string csv_path = (fs::path(cfg.output_path) / "records.csv").string();
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) throw FileError("cannot write " + csv_path);
    csv << kRecordsCsvHeader << '\n';
    for (const auto& r : out.records) csv << to_csv_row(r) << '\n';
    const std::string sum_path = (fs::path(cfg.output_path) / "summary.json").string();
    std::ofstream sj(sum_path, std::ios::binary);
    if (!sj) throw FileError("cannot write " + sum_path);
    sj << out.summary.dump(2) << '\n';
  }
  return out;
}

}  // namespace lqc
