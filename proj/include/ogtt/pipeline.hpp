#ifndef OGTT_PIPELINE_HPP
#define OGTT_PIPELINE_HPP

// Batch jobs behind the command-line tool. Each run_* function writes its
// files under config.out and returns a process exit code:
// 0 success, 1 partial or verification failure, 2 configuration or input error.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "ogtt/classify.hpp"
#include "ogtt/identifiability.hpp"
#include "ogtt/inference.hpp"
#include "ogtt/io.hpp"
#include "ogtt/model.hpp"
#include "ogtt/stability.hpp"

namespace ogtt {

namespace fs = std::filesystem;

enum ExitCode : int { kExitOk = 0, kExitPartial = 1, kExitInput = 2 };

struct Range {
  double lo;
  double hi;
};

/// Parameter ranges for one synthetic group; g0 is drawn as Gb + g0_offset.
struct CohortProfile {
  std::array<Range, 5> theta;  ///< indexed like ParamVector
  Range g0_offset;
};

inline CohortProfile healthy_profile() {
  return {{{{0.8, 1.2}, {6.0, 10.0}, {5.0, 15.0}, {80.0, 95.0}, {3.0, 6.0}}}, {0.0, 10.0}};
}

inline CohortProfile impaired_profile() {
  return {{{{0.8, 1.2}, {1.5, 3.0}, {5.0, 15.0}, {85.0, 100.0}, {0.5, 1.5}}}, {0.0, 10.0}};
}

struct CohortConfig {
  std::size_t n = 20;
  double impaired_fraction = 0.5;
  CohortProfile healthy = healthy_profile();
  CohortProfile impaired = impaired_profile();
};

struct RunConfig {
  fs::path input;
  fs::path out = ".";
  std::size_t n_iter = 10000;
  std::size_t burn_in = 1000;
  std::uint64_t seed = 20240101;
  double step = kDefaultStep;
  double c = 1.0;
  std::size_t workers = 0;  ///< 0 means hardware concurrency
  std::size_t band_samples = 200;
  std::size_t band_stride = 5;  ///< integration steps between band time points
  ModelParams params{};         ///< simulate
  double g0 = 90.0;             ///< simulate
  double t_end = 2.0;           ///< simulate
  CohortConfig cohort{};

  void validate() const {
    if (!(n_iter > burn_in)) throw InvalidArgument("iters must exceed burnin");
    if (n_iter - burn_in < 100) throw InvalidArgument("need at least 100 post-burn-in iterations");
    if (!(step > 0.0) || !std::isfinite(step)) throw InvalidArgument("step must be positive");
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("c must be positive");
    if (band_samples == 0 || band_stride == 0) throw InvalidArgument("band settings must be positive");
  }

  InferenceConfig inference() const {
    InferenceConfig ic;
    ic.n_iter = n_iter;
    ic.burn_in = burn_in;
    ic.step = step;
    ic.seed = seed;
    return ic;
  }
};

// ---------------------------------------------------------------- simulate

inline int run_simulate(const RunConfig& config, std::ostream& log = std::cerr) {
  try {
    config.params.validate();
    if (!(config.t_end > 0.0) || !(config.step > 0.0)) throw InvalidArgument("t_end and step must be positive");
    const Trajectory traj = simulate(config.params, config.g0, config.t_end, config.step);
    fs::create_directories(config.out);
    auto out = open_output(config.out / "trajectory.csv");
    write_trajectory(out, traj, config.params);
    return kExitOk;
  } catch (const IntegrationError& e) {
    log << "integration failed: " << e.what() << '\n';
    return kExitPartial;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

// ---------------------------------------------------------------- make-cohort

struct CohortMember {
  std::string id;
  ParamVector theta;
  double g0;
  GlucoseSeries noisy;
};

/// Draws each member from its group's ranges, simulates, adds N(0, sigma^2)
/// noise, and redraws any member with a value outside (20, 600).
inline std::vector<CohortMember> make_cohort(const CohortConfig& cc, std::uint64_t seed, double step = kDefaultStep,
                                             const ModelParams& constants = {}) {
  if (!(cc.impaired_fraction >= 0.0 && cc.impaired_fraction <= 1.0))
    throw InvalidArgument("impaired_fraction must be in [0, 1]");
  std::mt19937_64 rng(mix_seed(seed));
  std::normal_distribution<double> noise(0.0, constants.sigma);
  auto uniform = [&](Range r) { return std::uniform_real_distribution<double>(r.lo, r.hi)(rng); };
  const auto n_impaired = std::size_t(std::llround(cc.impaired_fraction * double(cc.n)));
  const int width = std::max<int>(3, int(std::to_string(cc.n).size()));
  std::vector<CohortMember> members;
  for (std::size_t i = 0; i < cc.n; ++i) {
    // Spreads the impaired members evenly through the cohort.
    const bool impaired = (i + 1) * n_impaired / cc.n > i * n_impaired / cc.n;
    const CohortProfile& prof = impaired ? cc.impaired : cc.healthy;
    std::string id = std::to_string(i + 1);
    id = "P" + std::string(std::size_t(std::max(0, width - int(id.size()))), '0') + id;
    for (int attempt = 0;; ++attempt) {
      if (attempt == 1000) throw InvalidArgument("cohort ranges keep producing glucose outside (20, 600)");
      CohortMember m{id, {}, 0.0, {}};
      for (std::size_t k = 0; k < 5; ++k) m.theta[k] = uniform(prof.theta[k]);
      m.g0 = m.theta[kGb] + uniform(prof.g0_offset);
      ModelParams p = with_theta(constants, m.theta);
      const auto g = simulate_glucose(p, m.g0, kObservationTimes, step);
      bool ok = true;
      for (std::size_t k = 0; k < 5; ++k) {
        m.noisy[k] = round_to_output(g[k] + noise(rng));
        ok = ok && m.noisy[k] > kMinGlucose && m.noisy[k] < kMaxGlucose;
      }
      if (ok) {
        members.push_back(std::move(m));
        break;
      }
    }
  }
  return members;
}

inline int run_make_cohort(const RunConfig& config, std::ostream& log = std::cerr) {
  try {
    const auto members = make_cohort(config.cohort, config.seed, config.step);
    fs::create_directories(config.out);
    std::vector<PatientRecord> records;
    for (const auto& m : members) records.push_back(PatientRecord::make(m.id, m.noisy));
    auto patients = open_output(config.out / "patients.csv");
    write_patients(patients, records);
    auto truth = open_output(config.out / "truth.csv");
    truth << "id";
    for (const char* name : kParamNames) truth << ',' << name;
    truth << ",g0,category\n";
    for (std::size_t i = 0; i < members.size(); ++i) {
      truth << members[i].id;
      for (double v : members[i].theta) truth << ',' << format_number(v);
      truth << ',' << format_number(members[i].g0) << ',' << to_string(records[i].category) << '\n';
    }
    return kExitOk;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

// ---------------------------------------------------------------- infer

/// Pointwise glucose quantiles over trajectories of evenly spaced post-burn-in samples.
struct GlucoseBand {
  std::vector<double> t, q025, q25, median, q75, q975, map_traj;
};

inline GlucoseBand posterior_band(const Chain& chain, const ParamVector& map, double g0, const ModelParams& constants,
                                  std::size_t n_traj, double step = kDefaultStep, std::size_t stride = 5,
                                  double t_end = 2.0) {
  const std::size_t from = chain.burn_in;
  const std::size_t n_post = chain.size() - from;
  if (n_post == 0) throw InvalidArgument("no post-burn-in samples");
  n_traj = std::min(n_traj, n_post);
  const Trajectory map_traj = simulate(with_theta(constants, map), g0, t_end, step);

  GlucoseBand band;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < map_traj.size(); i += stride) rows.push_back(i);
  if (rows.back() != map_traj.size() - 1) rows.push_back(map_traj.size() - 1);
  std::vector<std::vector<double>> curves(rows.size());
  for (std::size_t k = 0; k < n_traj; ++k) {
    const std::size_t idx = from + k * n_post / n_traj;
    const Trajectory tr = simulate(with_theta(constants, chain.sample(idx)), g0, t_end, step);
    for (std::size_t r = 0; r < rows.size(); ++r) curves[r].push_back(tr.states[rows[r]].G);
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto& c = curves[r];
    std::sort(c.begin(), c.end());
    band.t.push_back(map_traj.times[rows[r]]);
    band.q025.push_back(quantile_sorted(c, 0.025));
    band.q25.push_back(quantile_sorted(c, 0.25));
    band.median.push_back(quantile_sorted(c, 0.5));
    band.q75.push_back(quantile_sorted(c, 0.75));
    band.q975.push_back(quantile_sorted(c, 0.975));
    band.map_traj.push_back(map_traj.states[rows[r]].G);
  }
  return band;
}

inline void write_band(std::ostream& out, const GlucoseBand& b) {
  out << "t,q025,q25,median,q75,q975,map_traj\n";
  for (std::size_t i = 0; i < b.t.size(); ++i) {
    out << format_number(b.t[i]) << ',' << format_number(b.q025[i]) << ',' << format_number(b.q25[i]) << ','
        << format_number(b.median[i]) << ',' << format_number(b.q75[i]) << ',' << format_number(b.q975[i]) << ','
        << format_number(b.map_traj[i]) << '\n';
  }
}

/// Local stability of the insulin and glucagon loops at the MAP estimate.
inline Json stability_json(const ParamVector& map, const ModelParams& constants) {
  Json j;
  j["discriminant"] = round_to_output(cubic_discriminant(map[kTheta1], constants.lambda5));
  j["all_real"] = characteristic_roots(map[kTheta1], constants.lambda5).all_real();
  j["locally_attractive"] = is_locally_attractive(map[kTheta1], map[kTheta2], constants.lambda5, constants.lambda7);
  return j;
}

inline std::size_t resolve_workers(std::size_t requested, std::size_t jobs) {
  std::size_t w = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(w, jobs));
}

/// Runs `job(i)` for i in [0, n) on a bounded pool of threads.
template <class Job>
void parallel_for(std::size_t n, std::size_t workers, Job&& job) {
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t i = next++; i < n; i = next++) job(i);
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(loop);
  loop();
  for (auto& t : pool) t.join();
}

inline int run_infer(const RunConfig& config, std::ostream& log = std::cerr) {
  PatientTable table;
  try {
    config.validate();
    table = parse_patients(config.input);
    fs::create_directories(config.out);
  } catch (const ParseError& e) {
    log << config.input.string() << ':' << e.line() << ": " << e.what() << '\n';
    return kExitInput;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    log << "error: " << e.what() << '\n';
    return kExitInput;
  }
  for (const auto& err : table.errors)
    log << config.input.string() << ':' << err.line << ": skipped row: " << err.message << '\n';

  const InferenceConfig ic = config.inference();
  const auto& patients = table.records;
  std::vector<std::string> failures(patients.size());
  parallel_for(patients.size(), resolve_workers(config.workers, patients.size()), [&](std::size_t i) {
    const PatientRecord& rec = patients[i];
    try {
      const PatientPosterior post = infer_patient(rec, ic);
      {
        auto out = open_output(config.out / (rec.id + ".chain.csv"));
        write_chain(out, post.chain);
      }
      {
        SummaryRecord sr{rec.id, rec.category, post.summary, ic.n_iter, ic.burn_in, ic.seed, post.chain.seed};
        Json j = summary_json(sr);
        j["stability"] = stability_json(post.summary.map, ic.constants);
        auto out = open_output(config.out / (rec.id + ".summary.json"));
        out << j.dump(2) << '\n';
      }
      {
        const GlucoseBand band = posterior_band(post.chain, post.summary.map, rec.glucose[0], ic.constants,
                                                config.band_samples, ic.step, config.band_stride);
        auto out = open_output(config.out / (rec.id + ".band.csv"));
        write_band(out, band);
      }
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });
  std::size_t failed = 0;
  for (std::size_t i = 0; i < patients.size(); ++i) {
    if (failures[i].empty()) continue;
    ++failed;
    log << "failed: " << failures[i] << '\n';
  }
  log << "inferred " << patients.size() - failed << " of " << patients.size() << " patients\n";
  return failed || !table.errors.empty() ? kExitPartial : kExitOk;
}

// ---------------------------------------------------------------- classify

/// Reads every *.summary.json in `dir`, ordered by file name.
inline std::vector<SummaryRecord> read_summaries(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InvalidArgument(dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.size() > 13 && name.ends_with(".summary.json")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw InvalidArgument("no *.summary.json files in " + dir.string());
  std::vector<SummaryRecord> out;
  for (const auto& f : files) out.push_back(read_summary(f));
  return out;
}

inline Json classifier_json(const ClassifierModel& m) {
  Json j;
  j["c"] = m.c;
  j["standardized"] = m.standardized;
  j["features"] = {"inv_theta1", "inv_theta3"};
  j["planes"] = Json::array();
  for (std::size_t k = 0; k < kQuantileGrid.size(); ++k) {
    Json p;
    p["q"] = kQuantileGrid[k];
    p["w"] = {round_to_output(m.planes[k].w[0]), round_to_output(m.planes[k].w[1])};
    p["b"] = round_to_output(m.planes[k].b);
    j["planes"].push_back(p);
  }
  return j;
}

inline int run_classify(const RunConfig& config, std::ostream& log = std::cerr) {
  std::vector<SummaryRecord> records;
  ClassifierModel model;
  try {
    if (!(config.c > 0.0)) throw InvalidArgument("c must be positive");
    records = read_summaries(config.input);
    std::vector<PosteriorSummary> summaries;
    std::vector<Category> categories;
    for (const auto& r : records) {
      summaries.push_back(r.summary);
      categories.push_back(r.category);
    }
    EnsembleOptions opt;
    opt.c = config.c;
    model = quantile_ensemble(summaries, categories, opt);
    fs::create_directories(config.out);
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    log << "error: " << e.what() << '\n';
    return kExitInput;
  }

  auto out = open_output(config.out / "classification.csv");
  out << "id,category,inv_theta1,inv_theta3,predicted,impaired_votes,transition,possible_misclassification";
  for (int q : kQuantileGrid) out << ",margin_q" << q;
  out << '\n';
  for (const auto& r : records) {
    const Point2 s = insulin_scores(r.summary, EstimateSelector::map());
    const Prediction p = predict(model, r.summary);
    const bool flagged = is_impaired(r.category) && p.label < 0;
    out << r.id << ',' << to_string(r.category) << ',' << format_number(s[0]) << ',' << format_number(s[1]) << ','
        << (p.label > 0 ? "impaired" : "healthy") << ',' << p.impaired_votes << ',' << int(p.transition) << ','
        << int(flagged);
    for (double m : p.margins) out << ',' << format_number(m);
    out << '\n';
  }
  auto planes = open_output(config.out / "hyperplanes.json");
  planes << classifier_json(model).dump(2) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- verify

struct Check {
  std::string name;
  double value;
  double tolerance;
  bool passed;
};

/// Similarity-transform checks on random parameter draws.
inline std::vector<Check> identifiability_checks(std::uint64_t seed, double lambda5 = kHormoneClearance,
                                                 double lambda7 = kHormoneClearance) {
  std::mt19937_64 rng(mix_seed(seed));
  auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  double worst_same = 0.0, min_theta0 = std::numeric_limits<double>::infinity(), min_theta1 = min_theta0;
  for (int k = 0; k < 200; ++k) {
    const double th0 = u(0.5, 3.0), th1 = u(1.0, 20.0), th3 = u(2.0, 20.0), th3t = u(2.0, 20.0);
    const auto a = reduced_matrix(th0, th1, th3, lambda5, lambda7);
    const auto at = reduced_matrix(th0, th1, th3t, lambda5, lambda7);
    worst_same = std::max(worst_same, verify_similarity(a, at, build_transform(th3, th3t, th0, lambda5)));
    const double d0 = (rng() % 2 ? 1.0 : -1.0) * u(0.01, 0.4);
    min_theta0 = std::min(min_theta0, min_similarity_residual(a, reduced_matrix(th0 + d0, th1, th3t, lambda5, lambda7)));
    const double d1 = (rng() % 2 ? 1.0 : -1.0) * u(0.01, 0.9);
    min_theta1 = std::min(min_theta1, min_similarity_residual(a, reduced_matrix(th0, th1 + d1, th3t, lambda5, lambda7)));
  }
  return {
      {"similarity residual, theta3 changed (max of 200)", worst_same, 1e-12, worst_same <= 1e-12},
      {"best-T residual, theta0 changed >= 0.01 (min of 200)", min_theta0, 1e-6, min_theta0 > 1e-6},
      {"best-T residual, theta1 changed >= 0.01 (min of 200)", min_theta1, 1e-6, min_theta1 > 1e-6},
  };
}

/// Discriminant and root checks for the characteristic cubic.
inline std::vector<Check> stability_checks(std::uint64_t seed, double lambda5 = kHormoneClearance) {
  std::vector<Check> out;
  const double thr = discriminant_threshold(lambda5);
  const double scale = 64.0 * std::pow(lambda5, 4) * thr;
  const double d_at = std::abs(cubic_discriminant(thr, lambda5)) / scale;
  out.push_back({"|discriminant| at 16/27 lambda^2 (relative)", d_at, 1e-14, d_at <= 1e-14});

  int sign_errors = 0;
  for (int k = 1; k <= 100; ++k) {
    const double th = 2.0 * thr * (k - 0.5) / 100.0;
    const double d = cubic_discriminant(th, lambda5);
    if ((th < thr) != (d > 0.0)) ++sign_errors;
  }
  out.push_back({"discriminant sign errors over 100-point sweep", double(sign_errors), 0.0, sign_errors == 0});

  std::mt19937_64 rng(mix_seed(seed));
  std::uniform_real_distribution<double> u(1e-3 * thr, thr * (1.0 - 1e-3));
  int bracket_errors = 0;
  double worst_residual = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double th = u(rng);
    const CubicRoots r = characteristic_roots(th, lambda5);
    std::vector<double> re;
    for (const auto& z : r.roots) {
      re.push_back(z.real());
      if (z.imag() != 0.0) ++bracket_errors;
      worst_residual = std::max(worst_residual, std::abs(characteristic_polynomial(z, th, lambda5)));
    }
    std::sort(re.begin(), re.end());
    const double l = lambda5;
    if (!(re[0] > -4 * l && re[0] < -2 * l && re[1] > -2 * l && re[1] < -2 * l / 3 && re[2] > -2 * l / 3 && re[2] < 0))
      ++bracket_errors;
  }
  out.push_back({"real roots outside their brackets (50 draws)", double(bracket_errors), 0.0, bracket_errors == 0});
  out.push_back({"max cubic residual at computed roots", worst_residual, 1e-9, worst_residual <= 1e-9});

  const double bound = attractivity_bound(lambda5);
  int attract_errors = 0;
  for (int k = 1; k <= 100; ++k) {
    const double th = 2.0 * bound * (k - 0.5) / 100.0;
    const bool stable = max_real_part(characteristic_roots(th, lambda5)) < 0.0;
    if (stable != (th < bound)) ++attract_errors;
  }
  out.push_back({"stability sign errors around 8 lambda^2", double(attract_errors), 0.0, attract_errors == 0});
  return out;
}

inline int report_checks(const std::vector<Check>& checks, std::ostream& out) {
  bool all = true;
  for (const auto& c : checks) {
    out << (c.passed ? "PASS  " : "FAIL  ") << c.name << ": " << format_number(c.value)
        << " (tolerance " << format_number(c.tolerance) << ")\n";
    all = all && c.passed;
  }
  return all ? kExitOk : kExitPartial;
}

}  // namespace ogtt

#endif  // OGTT_PIPELINE_HPP
